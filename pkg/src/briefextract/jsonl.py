"""JSON Lines helpers shared by every artifact writer."""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional

logger = logging.getLogger(__name__)


def write_jsonl(path: Path, rows: Iterable[Any]) -> int:
    """
    Write one JSON object per line (UTF-8, non-ASCII kept verbatim).

    Returns:
        Number of lines written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
            count += 1
    logger.debug("wrote %d lines to %s", count, path)
    return count


def read_jsonl(path: Path) -> Iterator[tuple[int, Optional[Any]]]:
    """
    Iterate (line_number, object) pairs; object is None when a line is not JSON.

    Blank lines are skipped. Line numbers are 1-based.
    """
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError:
                logger.warning("%s:%d is not valid JSON", path, line_no)
                yield line_no, None


def write_json(path: Path, obj: Any) -> None:
    """Write a single pretty-printed JSON document."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def read_json(path: Path) -> Any:
    """Read a single JSON document."""
    return json.loads(Path(path).read_text(encoding="utf-8"))
