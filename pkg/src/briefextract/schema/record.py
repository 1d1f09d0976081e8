"""The 15-field extraction record, its validation and canonical JSON form."""

import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Union

from ..errors import DataError
from ..jsonl import read_jsonl
from .codes import is_valid_code

logger = logging.getLogger(__name__)

# Scored leaf fields, in canonical serialization order.
FIELD_PATHS: tuple[str, ...] = (
    "location.province",
    "location.city",
    "event.type_codes",
    "event.illegal_means",
    "event.cybercrime",
    "event.completed_illegal_act",
    "event.case_closure",
    "event.police_handling",
    "impact.deaths.existence",
    "impact.deaths.number",
    "impact.injuries.existence",
    "impact.injuries.number",
    "impact.economic_losses.existence",
    "impact.economic_losses.amount",
    "impact.social_impact",
)

CANONICAL_KEYS: dict[str, tuple[str, ...]] = {
    "location.province": ("Location", "Province"),
    "location.city": ("Location", "City"),
    "event.type_codes": ("Event Characteristics", "Type Code"),
    "event.illegal_means": ("Event Characteristics", "Illegal Means"),
    "event.cybercrime": ("Event Characteristics", "Cybercrime"),
    "event.completed_illegal_act": ("Event Characteristics", "Completed Illegal Act"),
    "event.case_closure": ("Event Characteristics", "Case Closure"),
    "event.police_handling": ("Event Characteristics", "Police Handling"),
    "impact.deaths.existence": ("Impact Assessment", "Deaths", "Existence"),
    "impact.deaths.number": ("Impact Assessment", "Deaths", "Number"),
    "impact.injuries.existence": ("Impact Assessment", "Injuries", "Existence"),
    "impact.injuries.number": ("Impact Assessment", "Injuries", "Number"),
    "impact.economic_losses.existence": ("Impact Assessment", "Economic Losses", "Existence"),
    "impact.economic_losses.amount": ("Impact Assessment", "Economic Losses", "Amount"),
    "impact.social_impact": ("Impact Assessment", "Social Impact"),
}

BOOLEAN_FIELDS: tuple[str, ...] = (
    "impact.deaths.existence",
    "impact.injuries.existence",
    "impact.economic_losses.existence",
    "event.completed_illegal_act",
    "impact.social_impact",
    "event.cybercrime",
    "event.case_closure",
)
COUNT_FIELDS: tuple[str, ...] = ("impact.deaths.number", "impact.injuries.number")
AMOUNT_FIELDS: tuple[str, ...] = ("impact.economic_losses.amount",)
PLACE_FIELDS: tuple[str, ...] = ("location.province", "location.city")
TEXT_FIELDS: tuple[str, ...] = ("event.illegal_means", "event.police_handling")
CODES_FIELD = "event.type_codes"

# claim path -> (existence path, quantity path)
CLAIMS: dict[str, tuple[str, str]] = {
    "impact.deaths": ("impact.deaths.existence", "impact.deaths.number"),
    "impact.injuries": ("impact.injuries.existence", "impact.injuries.number"),
    "impact.economic_losses": (
        "impact.economic_losses.existence",
        "impact.economic_losses.amount",
    ),
}

_FULLWIDTH_DIGITS = str.maketrans("０１２３４５６７８９", "0123456789")
_CENT = Decimal("0.01")
# Amounts at or above this cannot be held to the cent in a 28-digit context.
AMOUNT_LIMIT = Decimal("1e26")


def canonical_place(value: str) -> str:
    """Trim and fold full-width digits. No gazetteer resolution."""
    return value.strip().translate(_FULLWIDTH_DIGITS)


@dataclass(frozen=True)
class LocationInfo:
    """Province and prefecture-level city; empty string means not stated."""

    province: str = ""
    city: str = ""

    def __post_init__(self):
        for name in ("province", "city"):
            value = getattr(self, name)
            if isinstance(value, str):
                object.__setattr__(self, name, canonical_place(value))


@dataclass(frozen=True)
class EventCharacteristics:
    """Case type codes, means, and four outcome flags."""

    type_codes: frozenset[str] = field(default_factory=frozenset)
    illegal_means: str = ""
    cybercrime: bool = False
    completed_illegal_act: bool = False
    case_closure: bool = False
    police_handling: str = ""


@dataclass(frozen=True)
class CountedClaim:
    """Existence flag plus head count."""

    existence: bool = False
    number: int = 0


@dataclass(frozen=True)
class AmountClaim:
    """Existence flag plus amount in yuan."""

    existence: bool = False
    amount: Decimal = Decimal(0)


@dataclass(frozen=True)
class ImpactAssessment:
    """Casualties, losses and social impact."""

    deaths: CountedClaim = field(default_factory=CountedClaim)
    injuries: CountedClaim = field(default_factory=CountedClaim)
    economic_losses: AmountClaim = field(default_factory=AmountClaim)
    social_impact: bool = False


@dataclass(frozen=True)
class ExtractionRecord:
    """The full structured record for one briefing."""

    location: LocationInfo = field(default_factory=LocationInfo)
    event: EventCharacteristics = field(default_factory=EventCharacteristics)
    impact: ImpactAssessment = field(default_factory=ImpactAssessment)


class ViolationKind(str, Enum):
    """Kinds of schema problems, used for both violations and warnings."""

    UNKNOWN_TYPE_CODE = "UnknownTypeCode"
    DUPLICATE_TYPE_CODE = "DuplicateTypeCode"
    NEGATIVE_COUNT = "NegativeCount"
    NEGATIVE_AMOUNT = "NegativeAmount"
    AMOUNT_OUT_OF_RANGE = "AmountOutOfRange"
    EXCESS_PRECISION = "ExcessPrecision"
    EXISTENCE_MISMATCH = "ExistenceMismatch"
    WRONG_TYPE = "WrongType"
    EMPTY_TYPE_CODES = "EmptyTypeCodes"
    MISSING_FIELD = "MissingField"
    UNKNOWN_KEY = "UnknownKey"
    COERCED_VALUE = "CoercedValue"


@dataclass(frozen=True)
class Issue:
    """One violation or warning."""

    path: str
    kind: ViolationKind
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"path": self.path, "kind": self.kind.value, "message": self.message}


@dataclass
class ValidationReport:
    """Result of validating a candidate record. Violations are data, not errors."""

    violations: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def violation(self, path: str, kind: ViolationKind, message: str) -> None:
        self.violations.append(Issue(path, kind, message))

    def warn(self, path: str, kind: ViolationKind, message: str) -> None:
        self.warnings.append(Issue(path, kind, message))

    def has(self, kind: ViolationKind) -> bool:
        return any(i.kind is kind for i in self.violations + self.warnings)

    def to_dict(self) -> dict[str, Any]:
        return {
            "valid": self.valid,
            "violations": [i.to_dict() for i in self.violations],
            "warnings": [i.to_dict() for i in self.warnings],
        }


class InvalidRecord(DataError):
    """A record failed validation where a valid one is required."""

    def __init__(self, report: ValidationReport, record_id: str = ""):
        details = "; ".join(f"{i.path}: {i.message}" for i in report.violations)
        prefix = f"record {record_id}: " if record_id else ""
        super().__init__(f"{prefix}invalid record ({details})")
        self.report = report
        self.record_id = record_id


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check_field(path: str, value: Any, report: ValidationReport) -> None:
    if path in BOOLEAN_FIELDS:
        if not isinstance(value, bool):
            report.violation(path, ViolationKind.WRONG_TYPE, f"expected true/false, got {value!r}")
    elif path in PLACE_FIELDS or path in TEXT_FIELDS:
        if not isinstance(value, str):
            report.violation(path, ViolationKind.WRONG_TYPE, f"expected text, got {value!r}")
    elif path == CODES_FIELD:
        if not isinstance(value, (list, tuple, set, frozenset)):
            report.violation(path, ViolationKind.WRONG_TYPE, f"expected a code list, got {value!r}")
            return
        codes = list(value)
        for code in codes:
            if not is_valid_code(code):
                report.violation(path, ViolationKind.UNKNOWN_TYPE_CODE, f"unknown code {code!r}")
        if len(set(map(str, codes))) != len(codes):
            report.violation(path, ViolationKind.DUPLICATE_TYPE_CODE, "duplicate codes")
        if not codes:
            report.warn(path, ViolationKind.EMPTY_TYPE_CODES, "no case type selected")
    elif path in COUNT_FIELDS:
        if not _is_int(value):
            report.violation(path, ViolationKind.WRONG_TYPE, f"expected an integer, got {value!r}")
        elif value < 0:
            report.violation(path, ViolationKind.NEGATIVE_COUNT, f"negative count {value}")
    elif path in AMOUNT_FIELDS:
        if not (_is_int(value) or isinstance(value, Decimal)) or (
            isinstance(value, Decimal) and not value.is_finite()
        ):
            report.violation(path, ViolationKind.WRONG_TYPE, f"expected an amount, got {value!r}")
        elif value < 0:
            report.violation(path, ViolationKind.NEGATIVE_AMOUNT, f"negative amount {value}")
        elif value >= AMOUNT_LIMIT:
            report.violation(path, ViolationKind.AMOUNT_OUT_OF_RANGE, f"amount too large: {value}")
        elif isinstance(value, Decimal) and _below_cent(value):
            report.violation(
                path, ViolationKind.EXCESS_PRECISION, f"more than two decimals: {value}"
            )


def _below_cent(value: Decimal) -> bool:
    """True if any non-zero digit sits after the second decimal place."""
    _, digits, exponent = value.as_tuple()
    if not isinstance(exponent, int) or exponent >= -2:
        return False
    return any(digits[exponent + 2 :])


def validate_values(values: Mapping[str, Any]) -> ValidationReport:
    """
    Validate a flat path -> value mapping; absent paths are not checked.

    Used for both complete records and partially parsed model outputs.
    """
    report = ValidationReport()
    for path in FIELD_PATHS:
        if path in values:
            _check_field(path, values[path], report)

    for claim, (exists_path, quantity_path) in CLAIMS.items():
        if exists_path not in values or quantity_path not in values:
            continue
        exists, quantity = values[exists_path], values[quantity_path]
        if exists is False and (_is_int(quantity) or isinstance(quantity, Decimal)):
            if quantity != 0:
                report.violation(
                    claim,
                    ViolationKind.EXISTENCE_MISMATCH,
                    f"existence is false but quantity is {quantity}",
                )
    return report


def record_to_values(record: ExtractionRecord) -> dict[str, Any]:
    """Flatten a record into its 15 leaf values keyed by field path."""
    loc, ev, imp = record.location, record.event, record.impact
    return {
        "location.province": loc.province,
        "location.city": loc.city,
        "event.type_codes": ev.type_codes,
        "event.illegal_means": ev.illegal_means,
        "event.cybercrime": ev.cybercrime,
        "event.completed_illegal_act": ev.completed_illegal_act,
        "event.case_closure": ev.case_closure,
        "event.police_handling": ev.police_handling,
        "impact.deaths.existence": imp.deaths.existence,
        "impact.deaths.number": imp.deaths.number,
        "impact.injuries.existence": imp.injuries.existence,
        "impact.injuries.number": imp.injuries.number,
        "impact.economic_losses.existence": imp.economic_losses.existence,
        "impact.economic_losses.amount": imp.economic_losses.amount,
        "impact.social_impact": imp.social_impact,
    }


def record_from_values(values: Mapping[str, Any]) -> ExtractionRecord:
    """Build a record from all 15 leaf values. Raises KeyError if one is missing."""
    amount = values["impact.economic_losses.amount"]
    return ExtractionRecord(
        location=LocationInfo(values["location.province"], values["location.city"]),
        event=EventCharacteristics(
            type_codes=frozenset(values["event.type_codes"]),
            illegal_means=values["event.illegal_means"],
            cybercrime=values["event.cybercrime"],
            completed_illegal_act=values["event.completed_illegal_act"],
            case_closure=values["event.case_closure"],
            police_handling=values["event.police_handling"],
        ),
        impact=ImpactAssessment(
            deaths=CountedClaim(
                values["impact.deaths.existence"], values["impact.deaths.number"]
            ),
            injuries=CountedClaim(
                values["impact.injuries.existence"], values["impact.injuries.number"]
            ),
            economic_losses=AmountClaim(
                values["impact.economic_losses.existence"],
                amount if isinstance(amount, Decimal) else Decimal(amount),
            ),
            social_impact=values["impact.social_impact"],
        ),
    )


def get_field(record: ExtractionRecord, path: str) -> Any:
    """Value of one leaf field."""
    return record_to_values(record)[path]


def default_record() -> ExtractionRecord:
    """The all-empty record used as the prompt's output format example."""
    return ExtractionRecord()


def validate(record: Union[ExtractionRecord, Mapping[str, Any]]) -> ValidationReport:
    """Check every record invariant. Empty type codes is a warning only."""
    values = record_to_values(record) if isinstance(record, ExtractionRecord) else record
    return validate_values(values)


def format_amount(amount: Union[int, Decimal]) -> str:
    """Render an amount with at most two decimals and no trailing zeros."""
    value = Decimal(amount)
    with localcontext() as ctx:
        ctx.prec = max(ctx.prec, value.adjusted() + 4)
        q = value.quantize(_CENT)
        if q == q.to_integral_value():
            return str(int(q))
        return format(q.normalize(), "f")


def _dump(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Decimal):
        return format_amount(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        return "[" + ",".join(_dump(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(
            json.dumps(k, ensure_ascii=False) + ":" + _dump(v) for k, v in value.items()
        ) + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def nest_values(values: Mapping[str, Any]) -> dict[str, Any]:
    """Nest flat values under the canonical key names, in canonical order."""
    root: dict[str, Any] = {}
    for path in FIELD_PATHS:
        if path not in values:
            continue
        *parents, leaf = CANONICAL_KEYS[path]
        node = root
        for key in parents:
            node = node.setdefault(key, {})
        value = values[path]
        if path == CODES_FIELD:
            value = sorted(value)
        node[leaf] = value
    return root


def canonical_json(record: ExtractionRecord) -> str:
    """
    Serialize with the canonical key names and order, no insignificant whitespace.

    Type codes are sorted ascending. Raises InvalidRecord on violations.
    """
    report = validate(record)
    if not report.valid:
        raise InvalidRecord(report)
    return _dump(nest_values(record_to_values(record)))


def parse_record(source: Union[str, Mapping[str, Any]]) -> ExtractionRecord:
    """
    Strictly parse canonical JSON (text or already-decoded object).

    Every canonical key must be present and no other keys may appear.
    """
    obj = json.loads(source, parse_float=Decimal) if isinstance(source, str) else source
    report = ValidationReport()
    values: dict[str, Any] = {}
    missing = object()
    for path, keys in CANONICAL_KEYS.items():
        node: Any = obj
        for key in keys:
            if not isinstance(node, Mapping) or key not in node:
                node = missing
                break
            node = node[key]
        if node is missing:
            report.violation(path, ViolationKind.MISSING_FIELD, f"missing key {'/'.join(keys)}")
        elif node is None:
            report.violation(path, ViolationKind.WRONG_TYPE, f"null at {'/'.join(keys)}")
        else:
            values[path] = node
    if report.valid:
        report.violations.extend(validate_values(values).violations)
    if _extra_keys(obj, _KEY_TREE):
        report.violation("", ViolationKind.UNKNOWN_KEY, "unexpected keys in record")
    if not report.valid:
        raise InvalidRecord(report)
    return record_from_values(values)


def _key_tree() -> dict[str, Any]:
    """Nested canonical keys; leaves map to None."""
    root: dict[str, Any] = {}
    for *parents, leaf in CANONICAL_KEYS.values():
        node = root
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = None
    return root


_KEY_TREE = _key_tree()


def _extra_keys(obj: Any, template: Mapping[str, Any]) -> bool:
    if not isinstance(obj, Mapping):
        return False
    for key, value in obj.items():
        if key not in template:
            return True
        if isinstance(template[key], Mapping) and _extra_keys(value, template[key]):
            return True
    return False


def load_gold(path: Path) -> list[tuple[str, ExtractionRecord]]:
    """
    Read gold annotations: JSONL of {"record_id", "record"}.

    The record may be a canonical object or a canonical JSON string.
    """
    gold: list[tuple[str, ExtractionRecord]] = []
    seen: set[str] = set()
    for line_no, obj in read_jsonl(path):
        if not isinstance(obj, dict) or "record_id" not in obj or "record" not in obj:
            raise DataError(f"{path}:{line_no}: expected {{record_id, record}}")
        record_id = str(obj["record_id"])
        if record_id in seen:
            raise DataError(f"{path}:{line_no}: duplicate record_id {record_id}")
        seen.add(record_id)
        raw = obj["record"]
        try:
            record = parse_record(raw if isinstance(raw, str) else _decimalize(raw))
        except InvalidRecord as e:
            raise InvalidRecord(e.report, record_id) from e
        gold.append((record_id, record))
    logger.info("loaded %d gold records from %s", len(gold), path)
    return gold


def _decimalize(obj: Any) -> Any:
    """Round-trip a decoded object so floats become Decimals."""
    return json.loads(json.dumps(obj, ensure_ascii=False), parse_float=Decimal)


def gold_row(record_id: str, record: ExtractionRecord) -> dict[str, Any]:
    """One gold JSONL row, the inverse of load_gold."""
    return {"record_id": record_id, "record": json.loads(canonical_json(record))}
