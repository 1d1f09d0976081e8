"""Agreement between two annotators' gold records."""

import logging
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Optional, Sequence

from ..jsonl import write_jsonl
from ..metrics.classification import DegenerateMarginals, LengthMismatch, cohen_kappa
from ..schema.record import (
    BOOLEAN_FIELDS,
    CODES_FIELD,
    FIELD_PATHS,
    PLACE_FIELDS,
    ExtractionRecord,
    format_amount,
    record_to_values,
)
from .scoring import IdMisalignment

logger = logging.getLogger(__name__)

KAPPA_FIELDS: tuple[str, ...] = BOOLEAN_FIELDS + PLACE_FIELDS + (CODES_FIELD,)
POOLED = "pooled"


@dataclass(frozen=True)
class Disagreement:
    """One field on which the annotators differ, for adjudication."""

    record_id: str
    path: str
    value_a: Any
    value_b: Any

    def to_dict(self) -> dict[str, Any]:
        return {
            "record_id": self.record_id,
            "path": self.path,
            "value_a": _plain(self.value_a),
            "value_b": _plain(self.value_b),
        }


@dataclass
class AgreementReport:
    """Per-field and pooled kappa plus the disagreement list."""

    kappas: dict[str, Optional[float]] = field(default_factory=dict)
    undefined: dict[str, str] = field(default_factory=dict)
    pooled: Optional[float] = None
    disagreements: list[Disagreement] = field(default_factory=list)
    record_count: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "record_count": self.record_count,
            "kappas": self.kappas,
            "pooled": self.pooled,
            "undefined": self.undefined,
            "disagreement_count": len(self.disagreements),
        }

    def write_disagreements(self, path: Path) -> int:
        return write_jsonl(path, (d.to_dict() for d in self.disagreements))


def _plain(value: Any) -> Any:
    if isinstance(value, Decimal):
        return format_amount(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return value


def _label(path: str, value: Any) -> Any:
    """Hashable, sortable label for kappa."""
    if path == CODES_FIELD:
        return ",".join(sorted(value))
    return value


def _kappa_or_undefined(labels_a: list, labels_b: list) -> tuple[Optional[float], str]:
    try:
        return cohen_kappa(labels_a, labels_b), ""
    except DegenerateMarginals as e:
        return None, str(e)


def annotator_agreement(
    gold_a: Sequence[tuple[str, ExtractionRecord]],
    gold_b: Sequence[tuple[str, ExtractionRecord]],
) -> AgreementReport:
    """
    Cohen's kappa per boolean and categorical field, pooled kappa over every
    boolean decision, and every differing (record, field) pair.

    Fields with degenerate marginals are reported undefined, not 1.
    """
    if len(gold_a) != len(gold_b):
        raise LengthMismatch(f"{len(gold_a)} vs {len(gold_b)} annotated records")
    for i, ((id_a, _), (id_b, _)) in enumerate(zip(gold_a, gold_b)):
        if id_a != id_b:
            raise IdMisalignment(f"position {i}: annotator A {id_a!r} vs annotator B {id_b!r}")

    values_a = [record_to_values(r) for _, r in gold_a]
    values_b = [record_to_values(r) for _, r in gold_b]
    report = AgreementReport(record_count=len(gold_a))

    for (record_id, _), va, vb in zip(gold_a, values_a, values_b):
        for path in FIELD_PATHS:
            if va[path] != vb[path]:
                report.disagreements.append(Disagreement(record_id, path, va[path], vb[path]))

    if not gold_a:
        return report

    for path in KAPPA_FIELDS:
        kappa, reason = _kappa_or_undefined(
            [_label(path, v[path]) for v in values_a], [_label(path, v[path]) for v in values_b]
        )
        report.kappas[path] = kappa
        if reason:
            report.undefined[path] = reason

    pooled_a = [v[path] for v in values_a for path in BOOLEAN_FIELDS]
    pooled_b = [v[path] for v in values_b for path in BOOLEAN_FIELDS]
    report.pooled, reason = _kappa_or_undefined(pooled_a, pooled_b)
    if reason:
        report.undefined[POOLED] = reason

    logger.info(
        "agreement over %d records: pooled kappa %s, %d disagreements",
        report.record_count,
        "undefined" if report.pooled is None else f"{report.pooled:.4f}",
        len(report.disagreements),
    )
    return report
