"""Bounded-concurrency batch extraction over a chat-completions endpoint."""

import asyncio
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Awaitable, Callable, Optional, Sequence

from ..config import EndpointConfig
from ..corpus.cleaning import BriefingRecord
from ..errors import DataError
from ..jsonl import write_jsonl
from ..prompts.templates import PromptTemplates, few_shot_augment, render_user_prompt
from .client import ChatClient, ChatError, ExhaustedRetries, build_request

logger = logging.getLogger(__name__)


class TranscriptStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass
class Transcript:
    """Request, response and outcome for one briefing."""

    record_id: str
    messages: list[dict[str, str]]
    response_text: str = ""
    latency_ms: float = 0.0
    attempts: int = 0
    status: TranscriptStatus = TranscriptStatus.OK
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status is TranscriptStatus.OK

    def to_dict(self) -> dict[str, Any]:
        return {
            "record_id": self.record_id,
            "messages": self.messages,
            "response_text": self.response_text,
            "latency_ms": round(self.latency_ms, 3),
            "attempts": self.attempts,
            "status": self.status.value,
            "error": self.error,
        }

    def raw_output_row(self) -> dict[str, Any]:
        return {"record_id": self.record_id, "output": self.response_text, "status": self.status.value}


@dataclass
class BatchResult:
    """Transcripts in input order plus counts."""

    transcripts: list[Transcript] = field(default_factory=list)

    @property
    def ok_count(self) -> int:
        return sum(1 for t in self.transcripts if t.ok)

    @property
    def failed_count(self) -> int:
        return len(self.transcripts) - self.ok_count

    @property
    def all_failed(self) -> bool:
        return bool(self.transcripts) and self.ok_count == 0

    @property
    def raw_outputs(self) -> list[str]:
        return [t.response_text for t in self.transcripts]

    def write(self, transcripts_path: Path, raw_outputs_path: Path) -> None:
        write_jsonl(transcripts_path, (t.to_dict() for t in self.transcripts))
        write_jsonl(raw_outputs_path, (t.raw_output_row() for t in self.transcripts))


def build_messages(
    templates: PromptTemplates,
    briefing: BriefingRecord,
    exemplars: Sequence[tuple[str, str]] = (),
    few_shot: int = 0,
) -> list[dict[str, str]]:
    """System plus (optionally few-shot augmented) user message for one briefing."""
    user = few_shot_augment(render_user_prompt(templates, briefing), exemplars, few_shot)
    return [
        {"role": "system", "content": templates.system_template},
        {"role": "user", "content": user},
    ]


async def run_batch(
    briefings: Sequence[BriefingRecord],
    templates: PromptTemplates,
    cfg: EndpointConfig,
    client: Optional[ChatClient] = None,
    exemplars: Sequence[tuple[str, str]] = (),
    few_shot: int = 0,
    on_result: Optional[Callable[[int, Transcript], Awaitable[None]]] = None,
) -> BatchResult:
    """
    Run every briefing through the endpoint.

    Per-record failures land in the transcript; the batch always completes.

    Args:
        briefings: Kept briefings, in output order
        templates: Prompt templates
        cfg: Endpoint configuration (max_parallel_requests bounds in-flight requests)
        client: Chat client to reuse; one is created and closed otherwise
        exemplars: Few-shot (text, canonical gold JSON) pairs
        few_shot: Number of exemplars per prompt
        on_result: Async callback invoked as each record finishes (index, transcript)

    Returns:
        BatchResult with transcripts aligned to briefings

    Raises:
        DataError: a dropped briefing was passed in
        AuthMissing: the endpoint needs a key and none is set
    """
    dropped = [b.record_id for b in briefings if b.dropped]
    if dropped:
        raise DataError(f"{len(dropped)} dropped briefings passed to run_batch: {dropped[:5]}")

    # Render everything up front so template errors surface before any request.
    requests = [
        build_messages(templates, b, exemplars, few_shot) for b in briefings
    ]

    owns_client = client is None
    chat_client = client or ChatClient(cfg)
    # A missing key fails the whole run once, before any request.
    chat_client.check_auth()
    semaphore = asyncio.Semaphore(cfg.max_parallel_requests)

    async def one(index: int, briefing: BriefingRecord) -> Transcript:
        messages = requests[index]
        transcript = Transcript(record_id=briefing.record_id, messages=messages)
        async with semaphore:
            started = time.perf_counter()
            try:
                response = await chat_client.chat_full(
                    build_request(messages, cfg, stream=cfg.stream)
                )
                transcript.response_text = response.content
                transcript.attempts = response.attempts
                if not response.content:
                    transcript.status = TranscriptStatus.FAILED
                    transcript.error = "empty response"
            except ChatError as e:
                transcript.status = TranscriptStatus.FAILED
                transcript.attempts = e.attempts
                transcript.error = chat_client.redact(str(e))
                level = logging.WARNING if isinstance(e, ExhaustedRetries) else logging.INFO
                logger.log(level, "record %s failed: %s", briefing.record_id, transcript.error)
            transcript.latency_ms = (time.perf_counter() - started) * 1000
        if on_result:
            await on_result(index, transcript)
        return transcript

    try:
        transcripts = await asyncio.gather(*(one(i, b) for i, b in enumerate(briefings)))
    finally:
        if owns_client:
            await chat_client.close()

    result = BatchResult(transcripts=list(transcripts))
    logger.info(
        "batch finished: %d ok, %d failed of %d",
        result.ok_count,
        result.failed_count,
        len(result.transcripts),
    )
    return result
