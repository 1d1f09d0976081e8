"""Chat-completions client, batch runner and model-output parsing."""

from .batch import BatchResult, Transcript, TranscriptStatus, build_messages, run_batch
from .client import (
    AuthMissing,
    ChatClient,
    ChatError,
    ChatResponse,
    EmptyMessages,
    ExhaustedRetries,
    HttpError,
    Timeout,
    UnknownRole,
    build_request,
)
from .parsing import (
    KeyAliasMap,
    MalformedJson,
    ParsedExtraction,
    ParseMode,
    SchemaViolation,
    parse_many,
    parse_or_empty,
    parse_output,
)
from .repair import NoJsonFound, RepairKind, extract_json_blob, repair_json

__all__ = [
    "BatchResult",
    "Transcript",
    "TranscriptStatus",
    "build_messages",
    "run_batch",
    "AuthMissing",
    "ChatClient",
    "ChatError",
    "ChatResponse",
    "EmptyMessages",
    "ExhaustedRetries",
    "HttpError",
    "Timeout",
    "UnknownRole",
    "build_request",
    "KeyAliasMap",
    "MalformedJson",
    "ParsedExtraction",
    "ParseMode",
    "SchemaViolation",
    "parse_many",
    "parse_or_empty",
    "parse_output",
    "NoJsonFound",
    "RepairKind",
    "extract_json_blob",
    "repair_json",
]
