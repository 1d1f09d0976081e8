"""Which metric scores which field."""

from dataclasses import dataclass, field
from enum import Enum

from ..schema.record import (
    AMOUNT_FIELDS,
    BOOLEAN_FIELDS,
    CODES_FIELD,
    COUNT_FIELDS,
    FIELD_PATHS,
    PLACE_FIELDS,
    TEXT_FIELDS,
)

GENERATION = "generation"


class MetricKind(str, Enum):
    BOOLEAN = "boolean"  # accuracy, recall, f1 (percent)
    EMR_NUMERIC = "emr_numeric"  # exact match rate (percent)
    EMR_STRING = "emr_string"
    JACCARD = "jaccard"  # mean per-sample Jaccard in [0, 1]
    TFIDF_COSINE = "tfidf_cosine"  # mean per-sample cosine in [0, 1]
    GENERATION = "generation"  # bleu4, rouge1, rouge2, rougeL (percent)


METRIC_NAMES: dict[MetricKind, tuple[str, ...]] = {
    MetricKind.BOOLEAN: ("accuracy", "recall", "f1"),
    MetricKind.EMR_NUMERIC: ("emr",),
    MetricKind.EMR_STRING: ("emr",),
    MetricKind.JACCARD: ("jaccard",),
    MetricKind.TFIDF_COSINE: ("cosine",),
    MetricKind.GENERATION: ("bleu4", "rouge1", "rouge2", "rougeL"),
}


def _default_entries() -> dict[str, MetricKind]:
    entries: dict[str, MetricKind] = {}
    for path in FIELD_PATHS:
        if path in BOOLEAN_FIELDS:
            entries[path] = MetricKind.BOOLEAN
        elif path in COUNT_FIELDS or path in AMOUNT_FIELDS:
            entries[path] = MetricKind.EMR_NUMERIC
        elif path in PLACE_FIELDS:
            entries[path] = MetricKind.EMR_STRING
        elif path == CODES_FIELD:
            entries[path] = MetricKind.JACCARD
        elif path in TEXT_FIELDS:
            entries[path] = MetricKind.TFIDF_COSINE
    entries[GENERATION] = MetricKind.GENERATION
    return entries


@dataclass(frozen=True)
class FieldMetricPlan:
    """Field path -> metric kind, plus the whole-output generation entry."""

    entries: dict[str, MetricKind] = field(default_factory=_default_entries)

    def __post_init__(self):
        fields_only = [p for p in self.entries if p != GENERATION]
        if sorted(fields_only) != sorted(FIELD_PATHS) or GENERATION not in self.entries:
            raise ValueError("plan must cover all 15 fields once plus the generation entry")

    def metric_keys(self) -> list[str]:
        """Flat "<entry>:<metric>" keys in plan order."""
        return [
            f"{entry}:{name}" for entry, kind in self.entries.items() for name in METRIC_NAMES[kind]
        ]

    def fields_of(self, kind: MetricKind) -> list[str]:
        return [p for p, k in self.entries.items() if k is kind]

    def to_dict(self) -> dict[str, str]:
        return {entry: kind.value for entry, kind in self.entries.items()}

    @classmethod
    def from_dict(cls, data: dict[str, str]) -> "FieldMetricPlan":
        return cls(entries={entry: MetricKind(kind) for entry, kind in data.items()})


def default_plan() -> FieldMetricPlan:
    return FieldMetricPlan()
