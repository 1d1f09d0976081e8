"""Locate and repair JSON blobs inside raw model output.

All repairs work on a string-aware segmentation of the blob, so text inside
string literals is never touched except for its quote style.
"""

import re
from enum import Enum

from ..errors import DataError

_FENCE_PATTERN = re.compile(r"```json[ \t]*\r?\n?(.*?)```", re.DOTALL | re.IGNORECASE)

_FULLWIDTH_CODE = str.maketrans({"，": ",", "：": ":", "｛": "{", "｝": "}", "［": "[", "］": "]"})
_TRAILING_COMMA = re.compile(r",(\s*)(?=[}\]])")
_LITERALS = re.compile(r"\b(True|TRUE|False|FALSE|Null|NULL|None)\b")

# opening delimiter -> accepted closing delimiters
_STRING_DELIMITERS: dict[str, str] = {
    '"': '"',
    "“": '”"',
    "'": "'",
    "‘": "’'",
}


class RepairKind(str, Enum):
    """Repairs applied by repair_json, in application order."""

    FULLWIDTH_PUNCT = "fullwidth_punct"
    SINGLE_QUOTES = "single_quotes"
    TRAILING_COMMA = "trailing_comma"
    LITERAL_CASE = "literal_case"


class NoJsonFound(DataError):
    """Neither a ```json fence nor a balanced {...} span exists."""

    def __init__(self, message: str = "no JSON object found in model output"):
        super().__init__(message)


def _balanced_span(text: str, start: int) -> int:
    """End index (exclusive) of the balanced object starting at start, or -1."""
    depth = 0
    closing = ""
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if closing:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch in closing:
                closing = ""
            continue
        if ch in _STRING_DELIMITERS:
            closing = _STRING_DELIMITERS[ch]
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return -1


def extract_json_blob(raw: str) -> str:
    """
    Return the interior of the first ```json fence, else the first balanced {...} span.

    Braces inside string literals are ignored by the scan.
    """
    fence = _FENCE_PATTERN.search(raw)
    if fence:
        return fence.group(1).strip()
    start = raw.find("{")
    while start != -1:
        end = _balanced_span(raw, start)
        if end != -1:
            return raw[start:end]
        start = raw.find("{", start + 1)
    raise NoJsonFound()


def _segments(text: str) -> list[tuple[bool, str]]:
    """Split text into (is_string, chunk) pieces; string chunks keep their delimiters."""
    pieces: list[tuple[bool, str]] = []
    buf: list[str] = []
    closing = ""
    escaped = False
    for ch in text:
        if closing:
            buf.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch in closing:
                pieces.append((True, "".join(buf)))
                buf = []
                closing = ""
            continue
        if ch in _STRING_DELIMITERS:
            if buf:
                pieces.append((False, "".join(buf)))
            buf = [ch]
            closing = _STRING_DELIMITERS[ch]
        else:
            buf.append(ch)
    if buf:
        pieces.append((bool(closing), "".join(buf)))
    return pieces


def _requote(chunk: str) -> str:
    """Rewrite a string chunk with straight double quotes, escaping inner double quotes."""
    opener = chunk[0]
    closes = chunk[-1] in _STRING_DELIMITERS[opener] and len(chunk) > 1
    body = chunk[1:-1] if closes else chunk[1:]
    out: list[str] = []
    escaped = False
    for ch in body:
        if escaped:
            out.append("\\" + ch if ch != "'" else "'")
            escaped = False
        elif ch == "\\":
            escaped = True
        elif ch == '"':
            out.append('\\"')
        else:
            out.append(ch)
    if escaped:
        out.append("\\\\")
    return '"' + "".join(out) + ('"' if closes else "")


def _fullwidth_pass(text: str) -> str:
    out = []
    for is_string, chunk in _segments(text):
        if not is_string:
            out.append(chunk.translate(_FULLWIDTH_CODE))
        elif chunk[0] == "“":
            out.append(_requote(chunk))
        else:
            out.append(chunk)
    return "".join(out)


def _single_quote_pass(text: str) -> str:
    return "".join(
        _requote(chunk) if is_string and chunk[0] in "'‘" else chunk
        for is_string, chunk in _segments(text)
    )


def _code_pass(text: str, pattern: re.Pattern, repl) -> str:
    return "".join(
        chunk if is_string else pattern.sub(repl, chunk) for is_string, chunk in _segments(text)
    )


def _trailing_comma_pass(text: str) -> str:
    return _code_pass(text, _TRAILING_COMMA, r"\1")


def _literal_pass(text: str) -> str:
    mapping = {"none": "null"}
    return _code_pass(
        text, _LITERALS, lambda m: mapping.get(m.group(1).lower(), m.group(1).lower())
    )


_PASSES = (
    (RepairKind.FULLWIDTH_PUNCT, _fullwidth_pass),
    (RepairKind.SINGLE_QUOTES, _single_quote_pass),
    (RepairKind.TRAILING_COMMA, _trailing_comma_pass),
    (RepairKind.LITERAL_CASE, _literal_pass),
)


def repair_json(blob: str) -> tuple[str, list[RepairKind]]:
    """
    Apply the fixed repair sequence and report which repairs changed the blob.

    Returns:
        Tuple of (repaired text, repairs applied in order)
    """
    applied: list[RepairKind] = []
    for kind, repair in _PASSES:
        repaired = repair(blob)
        if repaired != blob:
            applied.append(kind)
            blob = repaired
    return blob, applied
