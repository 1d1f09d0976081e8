"""Recover extraction records from raw model output.

Missing fields stay absent here; how absence is scored is decided by the
evaluation module only.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Any, Iterable, Optional

from ..errors import DataError
from ..schema.record import (
    AMOUNT_FIELDS,
    BOOLEAN_FIELDS,
    CANONICAL_KEYS,
    CODES_FIELD,
    COUNT_FIELDS,
    FIELD_PATHS,
    PLACE_FIELDS,
    ExtractionRecord,
    ValidationReport,
    ViolationKind,
    canonical_place,
    record_from_values,
    record_to_values,
    validate_values,
)
from .repair import NoJsonFound, RepairKind, extract_json_blob, repair_json

logger = logging.getLogger(__name__)

GROUP_PATHS: tuple[str, ...] = (
    "location",
    "event",
    "impact",
    "impact.deaths",
    "impact.injuries",
    "impact.economic_losses",
)

# Chinese spellings accepted alongside the English canonical keys.
DEFAULT_ALIASES: dict[str, tuple[str, ...]] = {
    "location": ("位置信息", "地点信息", "地理位置"),
    "location.province": ("省份", "省"),
    "location.city": ("城市", "市"),
    "event": ("事件特征", "案件特征"),
    "event.type_codes": ("Case Type", "案件类型", "类型代码", "案件类型代码"),
    "event.illegal_means": ("违法手段", "作案手段", "犯罪手段"),
    "event.cybercrime": ("网络犯罪", "是否网络犯罪"),
    "event.completed_illegal_act": ("Crime Success", "是否既遂", "违法行为是否既遂"),
    "event.case_closure": ("是否结案", "是否破案"),
    "event.police_handling": ("警方处置", "处置措施", "警方处理"),
    "impact": ("影响评估",),
    "impact.deaths": ("死亡", "死亡情况"),
    "impact.deaths.existence": ("是否存在", "有无"),
    "impact.deaths.number": ("人数", "数量"),
    "impact.injuries": ("受伤", "受伤情况"),
    "impact.injuries.existence": ("是否存在", "有无"),
    "impact.injuries.number": ("人数", "数量"),
    "impact.economic_losses": ("经济损失",),
    "impact.economic_losses.existence": ("是否存在", "有无"),
    "impact.economic_losses.amount": ("金额", "损失金额"),
    "impact.social_impact": ("社会影响", "是否造成社会影响"),
}


def _canonical_segment(path: str) -> str:
    """English key of a leaf or group path."""
    depth = path.count(".")
    for leaf, keys in CANONICAL_KEYS.items():
        if leaf == path or leaf.startswith(path + "."):
            return keys[depth]
    raise KeyError(path)


def _norm_key(key: str) -> str:
    return re.sub(r"[\s_\-]+", "", key).casefold()


def _parent(path: str) -> str:
    return path.rsplit(".", 1)[0] if "." in path else ""


class ParseMode(str, Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class MalformedJson(DataError):
    """The located blob is not parseable JSON (after repair, in lenient mode)."""


class SchemaViolation(DataError):
    """Strict-mode schema failure."""

    def __init__(self, report: ValidationReport):
        details = "; ".join(f"{i.path or '<root>'}: {i.message}" for i in report.violations)
        super().__init__(f"schema violation ({details})")
        self.report = report


@dataclass
class KeyAliasMap:
    """Accepted key spellings per canonical path, resolved relative to the parent path."""

    aliases: dict[str, tuple[str, ...]] = field(default_factory=lambda: dict(DEFAULT_ALIASES))

    def __post_init__(self):
        self._lookup: dict[str, dict[str, str]] = {}
        for path in GROUP_PATHS + FIELD_PATHS:
            spellings = (_canonical_segment(path), *self.aliases.get(path, ()))
            table = self._lookup.setdefault(_parent(path), {})
            for spelling in spellings:
                key = _norm_key(spelling)
                if table.get(key, path) != path:
                    raise ValueError(
                        f"alias {spelling!r} maps to both {table[key]} and {path}"
                    )
                table[key] = path

    def resolve(self, parent: str, key: str) -> Optional[str]:
        """Canonical child path of parent for a key spelling, or None."""
        return self._lookup.get(parent, {}).get(_norm_key(str(key)))

    @classmethod
    def english_only(cls) -> "KeyAliasMap":
        return cls(aliases={})


@dataclass
class ParsedExtraction:
    """A possibly partial record recovered from model output."""

    values: dict[str, Any] = field(default_factory=dict)
    repairs: list[RepairKind] = field(default_factory=list)
    report: ValidationReport = field(default_factory=ValidationReport)
    error: str = ""  # set when nothing could be recovered

    @property
    def present_fields(self) -> frozenset[str]:
        return frozenset(self.values)

    @property
    def absent_fields(self) -> frozenset[str]:
        return frozenset(FIELD_PATHS) - self.present_fields

    def has(self, path: str) -> bool:
        return path in self.values

    def get(self, path: str, default: Any = None) -> Any:
        return self.values.get(path, default)

    @property
    def record(self) -> Optional[ExtractionRecord]:
        """Complete record, when all 15 fields are present and valid."""
        if self.absent_fields or not self.report.valid:
            return None
        return record_from_values(self.values)

    @classmethod
    def empty(cls, error: str) -> "ParsedExtraction":
        return cls(error=error)

    @classmethod
    def from_record(cls, record: ExtractionRecord) -> "ParsedExtraction":
        values = record_to_values(record)
        return cls(values=values, report=validate_values(values))

    def to_dict(self) -> dict[str, Any]:
        values: dict[str, Any] = {}
        for path, value in self.values.items():
            if isinstance(value, Decimal):
                value = str(value)
            elif isinstance(value, (set, frozenset, tuple)):
                value = sorted(value, key=str)
            values[path] = value
        return {
            "values": values,
            "repairs": [r.value for r in self.repairs],
            "report": self.report.to_dict(),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ParsedExtraction":
        values = {}
        for path, value in data.get("values", {}).items():
            if path not in FIELD_PATHS:
                continue
            if path in AMOUNT_FIELDS and isinstance(value, str):
                try:
                    value = Decimal(value)
                except InvalidOperation:
                    pass
            values[path] = value
        return cls(
            values=values,
            repairs=[RepairKind(r) for r in data.get("repairs", [])],
            report=validate_values(values),
            error=data.get("error", ""),
        )


def _to_decimal(value: Any) -> Optional[Decimal]:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, Decimal)):
        return Decimal(value)
    if isinstance(value, str):
        text = value.strip().replace(",", "").translate(
            str.maketrans("０１２３４５６７８９．", "0123456789.")
        )
        try:
            number = Decimal(text)
        except InvalidOperation:
            return None
        return number if number.is_finite() else None
    return None


def _coerce(path: str, value: Any, report: ValidationReport) -> Any:
    """Lenient-mode coercions; each one is recorded as a warning."""
    coerced = value
    if path in COUNT_FIELDS and not (isinstance(value, int) and not isinstance(value, bool)):
        number = _to_decimal(value)
        if number is not None and number == number.to_integral_value():
            coerced = int(number)
    elif path in AMOUNT_FIELDS and isinstance(value, str):
        number = _to_decimal(value)
        if number is not None:
            coerced = number
    elif path in BOOLEAN_FIELDS and isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("true", "false"):
            coerced = lowered == "true"
    elif path == CODES_FIELD:
        items = value if isinstance(value, list) else [value] if isinstance(value, (str, int)) else None
        if items is not None:
            codes = []
            for item in items:
                if isinstance(item, int) and not isinstance(item, bool):
                    item = f"{item:02d}"
                elif isinstance(item, str) and item.strip().isdigit() and len(item.strip()) <= 2:
                    item = item.strip().zfill(2)
                codes.append(item)
            coerced = codes
    if coerced != value or type(coerced) is not type(value):
        report.warn(path, ViolationKind.COERCED_VALUE, f"coerced {value!r} to {coerced!r}")
    return coerced


def _walk(
    node: dict[str, Any],
    parent: str,
    aliases: KeyAliasMap,
    mode: ParseMode,
    values: dict[str, Any],
    report: ValidationReport,
) -> None:
    for key, value in node.items():
        path = aliases.resolve(parent, key)
        where = f"{parent}.{key}" if parent else str(key)
        if path is None:
            if mode is ParseMode.STRICT:
                report.violation(where, ViolationKind.UNKNOWN_KEY, f"unknown key {key!r}")
            else:
                report.warn(where, ViolationKind.UNKNOWN_KEY, f"unknown key {key!r}")
            continue
        if path in GROUP_PATHS:
            if isinstance(value, dict):
                _walk(value, path, aliases, mode, values, report)
            elif mode is ParseMode.STRICT:
                report.violation(path, ViolationKind.WRONG_TYPE, f"expected an object at {key!r}")
            else:
                report.warn(path, ViolationKind.WRONG_TYPE, f"expected an object at {key!r}")
            continue
        if path in values:
            report.warn(path, ViolationKind.UNKNOWN_KEY, f"duplicate key for {path}; last wins")
        if mode is ParseMode.LENIENT:
            value = _coerce(path, value, report)
        if path in PLACE_FIELDS and isinstance(value, str):
            value = canonical_place(value)
        values[path] = value


def parse_output(
    raw: str,
    aliases: Optional[KeyAliasMap] = None,
    mode: ParseMode = ParseMode.LENIENT,
) -> ParsedExtraction:
    """
    Parse raw model output into a ParsedExtraction.

    Args:
        raw: Model output text (prose, fences and all)
        aliases: Accepted key spellings; defaults to English plus Chinese
        mode: STRICT raises on any repair, unknown key, missing field or
            violation; LENIENT repairs and keeps whatever is recoverable

    Returns:
        The parsed extraction

    Raises:
        NoJsonFound: in both modes
        MalformedJson: in both modes (lenient: only after repair failed)
        SchemaViolation: strict mode only
    """
    aliases = aliases or KeyAliasMap()
    mode = ParseMode(mode)
    blob = extract_json_blob(raw)
    repairs: list[RepairKind] = []
    if mode is ParseMode.LENIENT:
        blob, repairs = repair_json(blob)
    try:
        obj = json.loads(blob, parse_float=Decimal)
    except json.JSONDecodeError as e:
        raise MalformedJson(f"cannot parse JSON: {e.msg} at position {e.pos}") from e
    if not isinstance(obj, dict):
        raise MalformedJson(f"expected a JSON object, got {type(obj).__name__}")

    report = ValidationReport()
    values: dict[str, Any] = {}
    _walk(obj, "", aliases, mode, values, report)

    for path in FIELD_PATHS:
        if path not in values:
            report.warn(path, ViolationKind.MISSING_FIELD, "field absent from output")
            if mode is ParseMode.STRICT:
                report.violation(path, ViolationKind.MISSING_FIELD, "field absent from output")

    checked = validate_values(values)
    report.violations.extend(checked.violations)
    report.warnings.extend(checked.warnings)

    if mode is ParseMode.STRICT and not report.valid:
        raise SchemaViolation(report)
    return ParsedExtraction(values=values, repairs=repairs, report=report)


def parse_or_empty(
    raw: str,
    aliases: Optional[KeyAliasMap] = None,
) -> ParsedExtraction:
    """Lenient parse that turns NoJsonFound/MalformedJson into an all-absent result."""
    try:
        return parse_output(raw, aliases, ParseMode.LENIENT)
    except (NoJsonFound, MalformedJson) as e:
        logger.debug("unparseable output: %s", e)
        return ParsedExtraction.empty(str(e))


def parse_many(raws: Iterable[str], aliases: Optional[KeyAliasMap] = None) -> list[ParsedExtraction]:
    aliases = aliases or KeyAliasMap()
    return [parse_or_empty(raw, aliases) for raw in raws]
