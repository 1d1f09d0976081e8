"""Cleaning pipeline: normalization, mention stripping, length filter, dedup.

Order of operations is fixed: normalize_text -> strip_mentions -> length
filter -> exact-match dedup, so dedup sees fully canonical text.
"""

import logging
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional

import regex

from ..config import CleanConfig
from ..jsonl import read_json, read_jsonl, write_json, write_jsonl
from .ingest import RawPost

logger = logging.getLogger(__name__)

# CJK Unified Ideographs: main block, extension A, extensions B-F (+I), extensions G-H
CJK_RANGES = "㐀-䶿一-鿿\U00020000-\U0002ebef\U00030000-\U0003134f"

CHINESE_PUNCTUATION = "，。、；：？！“”‘’（）《》〈〉【】「」『』—…·～"
ASCII_PUNCTUATION = '.,:;!?()"-'

SHORT_LINK_HOSTS = ("t.cn", "dwz.cn", "url.cn", "sinaurl.cn", "bit.ly")

_URL_CHARS = r"[A-Za-z0-9\-._~:/?#\[\]@!$&'()*+,;=%]"
URL_PATTERN = regex.compile(
    rf"(?:https?://|www\.){_URL_CHARS}+"
    rf"|(?<![A-Za-z0-9.])(?:{'|'.join(regex.escape(h) for h in SHORT_LINK_HOSTS)})/[A-Za-z0-9_\-]+",
    flags=regex.IGNORECASE,
)

def _class_escape(chars: str) -> str:
    return "".join("\\" + c if c in "\\]^-[" else c for c in chars)


# "@" survives normalization so strip_mentions can still see the mention marker.
_ALLOWED = (
    CJK_RANGES
    + "0-9０-９"
    + _class_escape(CHINESE_PUNCTUATION + ASCII_PUNCTUATION + "@")
    + r"\s"
)
DISALLOWED_PATTERN = regex.compile(f"[^{_ALLOWED}]")
CJK_PATTERN = regex.compile(f"[{CJK_RANGES}]")
# A bare "@" is treated as a mention with an empty name.
MENTION_PATTERN = regex.compile(r"@[^\s\p{P}]*")
WHITESPACE_PATTERN = regex.compile(r"\s+")


class DropReason(str, Enum):
    """Why a record was dropped by the pipeline."""

    NONE = "none"
    TOO_SHORT = "too_short"
    EXACT_DUPLICATE = "exact_duplicate"
    MENTION_DUPLICATE = "mention_duplicate"


@dataclass(frozen=True)
class BriefingRecord:
    """A cleaned briefing text with provenance and cleaning flags."""

    record_id: str
    text: str
    source_post_id: str
    cjk_count: int
    dropped: bool = False
    drop_reason: DropReason = DropReason.NONE
    account_id: str = ""
    posted_at: str = ""
    engagement: int = 0

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["drop_reason"] = self.drop_reason.value
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BriefingRecord":
        return cls(**{**data, "drop_reason": DropReason(data.get("drop_reason", "none"))})


@dataclass
class CleaningStats:
    """Counters for one pipeline run."""

    input_count: int = 0
    url_stripped_count: int = 0
    short_dropped_count: int = 0
    duplicate_dropped_count: int = 0
    output_count: int = 0
    excluded_count: int = 0

    @property
    def is_conserved(self) -> bool:
        return self.output_count == (
            self.input_count
            - self.excluded_count
            - self.short_dropped_count
            - self.duplicate_dropped_count
        )


def _collapse_whitespace(text: str) -> str:
    return WHITESPACE_PATTERN.sub(" ", text).strip()


def normalize_text(text: str) -> str:
    """
    Remove URLs, then every character outside the allowed classes; collapse whitespace.

    "@" is kept so strip_mentions, which runs after this, can find mention
    tokens. Any "@" left over is removed by strip_mentions, so the pipeline
    output never carries it.
    """
    text = URL_PATTERN.sub("", text)
    text = DISALLOWED_PATTERN.sub("", text)
    return _collapse_whitespace(text)


def strip_mentions(text: str) -> str:
    """Delete every @mention token (an "@" plus following non-space, non-punctuation chars)."""
    return _collapse_whitespace(MENTION_PATTERN.sub("", text))


def count_cjk(text: str) -> int:
    """Count code points in the CJK Unified Ideographs blocks."""
    return len(CJK_PATTERN.findall(text))


def clean_pipeline(
    posts: Iterable[RawPost],
    config: Optional[CleanConfig] = None,
) -> tuple[list[BriefingRecord], CleaningStats]:
    """
    Turn raw posts into briefing records.

    Excluded post ids are removed before cleaning and do not appear in the
    output. Every other post yields exactly one record, kept or dropped,
    in input order.

    Args:
        posts: Ingested posts
        config: Cleaning settings (min_length defaults to 15)

    Returns:
        Tuple of (records, stats)
    """
    config = config or CleanConfig()
    excluded = set(config.exclude_ids)
    stats = CleaningStats()
    records: list[BriefingRecord] = []
    first_seen: dict[str, str] = {}  # final text -> text before mention stripping

    for post in posts:
        stats.input_count += 1
        if post.post_id in excluded:
            stats.excluded_count += 1
            continue

        raw = post.full_text
        if URL_PATTERN.search(raw):
            stats.url_stripped_count += 1
        normalized = normalize_text(raw)
        text = strip_mentions(normalized)
        cjk = count_cjk(text)

        reason = DropReason.NONE
        if cjk < config.min_length:
            reason = DropReason.TOO_SHORT
            stats.short_dropped_count += 1
        elif text in first_seen:
            if first_seen[text] == normalized:
                reason = DropReason.EXACT_DUPLICATE
            else:
                reason = DropReason.MENTION_DUPLICATE
            stats.duplicate_dropped_count += 1
        else:
            first_seen[text] = normalized
            stats.output_count += 1

        records.append(
            BriefingRecord(
                record_id=post.post_id,
                text=text,
                source_post_id=post.post_id,
                cjk_count=cjk,
                dropped=reason is not DropReason.NONE,
                drop_reason=reason,
                account_id=post.account_id,
                posted_at=post.posted_at,
                engagement=post.engagement,
            )
        )

    logger.info(
        "cleaned %d posts: kept %d, short %d, duplicate %d, excluded %d",
        stats.input_count,
        stats.output_count,
        stats.short_dropped_count,
        stats.duplicate_dropped_count,
        stats.excluded_count,
    )
    return records, stats


def stats_path_for(path: Path) -> Path:
    """Sidecar path for the stats of a briefing JSONL file."""
    path = Path(path)
    return path.with_name(path.stem + ".stats.json")


def write_briefings(path: Path, records: list[BriefingRecord], stats: CleaningStats) -> int:
    """Write records as JSONL plus the stats JSON sidecar."""
    count = write_jsonl(path, (r.to_dict() for r in records))
    write_json(stats_path_for(path), asdict(stats))
    return count


def read_briefings(path: Path, kept_only: bool = True) -> list[BriefingRecord]:
    """Read a briefing JSONL file written by write_briefings."""
    records = []
    for _, obj in read_jsonl(path):
        if obj is None:
            continue
        record = BriefingRecord.from_dict(obj)
        if kept_only and record.dropped:
            continue
        records.append(record)
    return records


def read_stats(path: Path) -> CleaningStats:
    """Read the stats sidecar of a briefing JSONL file."""
    return CleaningStats(**read_json(stats_path_for(path)))
