"""CSV ingestion of crawled posts (body text plus pre-run OCR texts)."""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import pandas as pd

from ..config import DEFAULT_COLUMN_MAP
from ..errors import DataError

logger = logging.getLogger(__name__)

COUNT_FIELDS = ("reposts", "likes", "comments")


@dataclass(frozen=True)
class RawPost:
    """One crawled social-media post."""

    post_id: str
    account_id: str
    posted_at: str
    reposts: int
    likes: int
    comments: int
    body_text: str
    image_texts: tuple[str, ...] = field(default_factory=tuple)

    @property
    def full_text(self) -> str:
        """Body text followed by each OCR text, newline-joined."""
        return "\n".join((self.body_text, *self.image_texts))

    @property
    def engagement(self) -> int:
        return self.reposts + self.likes + self.comments


class MissingColumn(DataError):
    """A mapped column is absent from the CSV header."""

    def __init__(self, name: str):
        super().__init__(f"missing column: {name}")
        self.name = name


class MalformedRow(DataError):
    """A data row that cannot become a RawPost."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"malformed row at line {line}: {reason}")
        self.line = line
        self.reason = reason


def _parse_count(value: str, name: str) -> int:
    try:
        count = int(value.strip())
    except ValueError:
        raise ValueError(f"{name} is not an integer: {value!r}") from None
    if count < 0:
        raise ValueError(f"{name} is negative: {count}")
    return count


def _split_image_texts(cell: str, separator: str) -> tuple[str, ...]:
    if not cell:
        return ()
    return tuple(part for part in cell.split(separator) if part)


def _read_records(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header plus (first physical line, fields) for every non-blank record."""
    with path.open(encoding="utf-8-sig", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path} is empty")
        records: list[tuple[int, list[str]]] = []
        start = reader.line_num + 1
        try:
            for fields in reader:
                if fields:
                    records.append((start, fields))
                start = reader.line_num + 1
        except csv.Error as e:
            raise DataError(f"{path}:{start}: unreadable CSV: {e}") from e
    return header, records


def ingest_csv(
    path: Path,
    column_map: Optional[dict[str, str]] = None,
    strict: bool = False,
    image_separator: str = "|",
) -> tuple[list[RawPost], list[MalformedRow]]:
    """
    Read a UTF-8 CSV of posts.

    Line numbers in reports are physical file lines (header is line 1), so a
    quoted cell spanning several lines shifts every later row.

    Args:
        path: CSV file with a header row
        column_map: RawPost field name -> CSV column name
        strict: Raise on the first malformed row instead of skipping it
        image_separator: Separator between OCR texts inside the image column

    Returns:
        Tuple of (posts in file order, malformed-row reports)
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    mapping = dict(DEFAULT_COLUMN_MAP)
    mapping.update(column_map or {})

    header, records = _read_records(path)
    for name in mapping.values():
        if name not in header:
            raise MissingColumn(name)

    reports: list[MalformedRow] = []

    def _reject(report: MalformedRow, cause: Optional[Exception] = None) -> None:
        if strict:
            raise report from cause
        logger.warning("skipping %s", report)
        reports.append(report)

    width = len(header)
    frame = pd.DataFrame(
        [(fields + [""] * width)[:width] for _, fields in records], columns=header, dtype=str
    )

    posts: list[RawPost] = []
    seen: set[str] = set()
    for (line, fields), row in zip(records, frame.to_dict(orient="records")):
        if len(fields) != width:
            _reject(MalformedRow(line, f"wrong field count ({len(fields)} of {width})"))
            continue
        try:
            post_id = row[mapping["post_id"]].strip()
            if not post_id:
                raise ValueError("empty post_id")
            if post_id in seen:
                raise ValueError(f"duplicate post_id {post_id!r}")
            counts = {name: _parse_count(row[mapping[name]], name) for name in COUNT_FIELDS}
        except ValueError as e:
            _reject(MalformedRow(line, str(e)), e)
            continue

        seen.add(post_id)
        posts.append(
            RawPost(
                post_id=post_id,
                account_id=row[mapping["account_id"]],
                posted_at=row[mapping["posted_at"]],
                body_text=row[mapping["body_text"]],
                image_texts=_split_image_texts(row[mapping["image_texts"]], image_separator),
                **counts,
            )
        )

    logger.info("ingested %d posts from %s (%d malformed)", len(posts), path, len(reports))
    return posts, reports
