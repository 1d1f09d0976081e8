"""Chat-format fine-tuning samples built from briefings and gold records."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from ..corpus.cleaning import BriefingRecord
from ..errors import DataError
from ..jsonl import write_jsonl
from ..schema.record import ExtractionRecord, InvalidRecord, canonical_json
from .templates import PromptTemplates, render_user_prompt

logger = logging.getLogger(__name__)

SAMPLE_ROLES = ("system", "user", "assistant")


class IdMismatch(DataError):
    """A briefing and its gold record carry different record ids."""

    def __init__(self, briefing_id: str, gold_id: str):
        super().__init__(f"briefing id {briefing_id!r} does not match gold id {gold_id!r}")
        self.briefing_id = briefing_id
        self.gold_id = gold_id


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class ChatSample:
    """One system/user/assistant training conversation."""

    messages: tuple[ChatMessage, ChatMessage, ChatMessage]

    def __post_init__(self):
        roles = tuple(m.role for m in self.messages)
        if roles != SAMPLE_ROLES:
            raise DataError(f"chat sample roles must be {SAMPLE_ROLES}, got {roles}")

    def to_dict(self) -> dict[str, Any]:
        return {"messages": [{"role": m.role, "content": m.content} for m in self.messages]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ChatSample":
        messages = tuple(ChatMessage(m["role"], m["content"]) for m in data["messages"])
        if len(messages) != 3:
            raise DataError(f"chat sample needs 3 messages, got {len(messages)}")
        return cls(messages=messages)  # type: ignore[arg-type]

    @property
    def assistant_content(self) -> str:
        return self.messages[2].content


def synth_sample(
    templates: PromptTemplates,
    briefing: BriefingRecord,
    gold: ExtractionRecord,
) -> ChatSample:
    """Build the three-message sample; the assistant turn is the gold canonical JSON."""
    return ChatSample(
        messages=(
            ChatMessage("system", templates.system_template),
            ChatMessage("user", render_user_prompt(templates, briefing)),
            ChatMessage("assistant", canonical_json(gold)),
        )
    )


def align_gold(
    briefings: Sequence[BriefingRecord],
    gold: Sequence[tuple[str, ExtractionRecord]],
) -> list[tuple[BriefingRecord, tuple[str, ExtractionRecord]]]:
    """
    Pair each gold record with the kept briefing of the same id, in gold order.

    Raises:
        IdMismatch: a gold id has no kept briefing
    """
    by_id = {b.record_id: b for b in briefings if not b.dropped}
    pairs = []
    for record_id, record in gold:
        briefing = by_id.get(record_id)
        if briefing is None:
            raise IdMismatch("<none>", record_id)
        pairs.append((briefing, (record_id, record)))
    return pairs


def synth_dataset(
    templates: PromptTemplates,
    pairs: Iterable[tuple[BriefingRecord, tuple[str, ExtractionRecord]]],
    out: Path,
) -> int:
    """
    Write one {"messages": [...]} line per pair, in input order.

    Every pair is checked before anything is written.

    Args:
        templates: Prompt templates used for the system and user turns
        pairs: (briefing, (gold record_id, gold record)) pairs
        out: Destination JSONL path

    Returns:
        Number of lines written
    """
    samples: list[ChatSample] = []
    for briefing, (gold_id, gold) in pairs:
        if briefing.record_id != gold_id:
            raise IdMismatch(briefing.record_id, gold_id)
        try:
            samples.append(synth_sample(templates, briefing, gold))
        except InvalidRecord as e:
            raise InvalidRecord(e.report, gold_id) from e
    count = write_jsonl(out, (s.to_dict() for s in samples))
    logger.info("wrote %d chat samples to %s", count, out)
    return count
