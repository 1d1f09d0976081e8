"""Post ingestion and the briefing cleaning pipeline."""

from .ingest import RawPost, MissingColumn, MalformedRow, ingest_csv
from .cleaning import (
    BriefingRecord,
    CleaningStats,
    DropReason,
    clean_pipeline,
    count_cjk,
    normalize_text,
    read_briefings,
    strip_mentions,
    write_briefings,
)

__all__ = [
    "RawPost",
    "MissingColumn",
    "MalformedRow",
    "ingest_csv",
    "BriefingRecord",
    "CleaningStats",
    "DropReason",
    "clean_pipeline",
    "count_cjk",
    "normalize_text",
    "read_briefings",
    "strip_mentions",
    "write_briefings",
]
