"""Boolean classification scores, exact match rate, Jaccard and Cohen's kappa."""

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Any, Callable, Iterable, Optional, Sequence

from sklearn.metrics import cohen_kappa_score, confusion_matrix

from ..errors import DataError
from .generation import EmptyInput

_FULLWIDTH_DIGITS = str.maketrans("０１２３４５６７８９", "0123456789")


class EmptyTally(DataError):
    """A confusion tally with no samples."""


class LengthMismatch(DataError):
    """Two sequences that must be aligned have different lengths."""


class DegenerateMarginals(DataError):
    """Chance agreement is 1 (both annotators constant and identical); kappa is undefined."""


@dataclass(frozen=True)
class ConfusionTally:
    """Binary confusion counts with true as the positive class."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionTally") -> "ConfusionTally":
        return ConfusionTally(
            self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn
        )

    @classmethod
    def from_labels(cls, gold: Sequence[bool], pred: Sequence[bool]) -> "ConfusionTally":
        """Tally aligned boolean labels."""
        if len(gold) != len(pred):
            raise LengthMismatch(f"{len(gold)} gold labels vs {len(pred)} predictions")
        if not gold:
            return cls()
        tn, fp, fn, tp = confusion_matrix(
            [bool(g) for g in gold], [bool(p) for p in pred], labels=[False, True]
        ).ravel()
        return cls(tp=int(tp), tn=int(tn), fp=int(fp), fn=int(fn))


def classification_scores(tally: ConfusionTally) -> tuple[float, float, float]:
    """
    Accuracy, recall and F1 as fractions in [0, 1].

    With no positives anywhere (tp = fp = fn = 0) recall and F1 are 1. When
    the gold side has no positives but predictions do, recall is 1 and F1 is 0.
    """
    if tally.total == 0:
        raise EmptyTally("cannot score an empty tally")
    accuracy = (tally.tp + tally.tn) / tally.total
    if tally.tp == tally.fp == tally.fn == 0:
        return accuracy, 1.0, 1.0
    recall = tally.tp / (tally.tp + tally.fn) if tally.tp + tally.fn else 1.0
    f1 = 2 * tally.tp / (2 * tally.tp + tally.fp + tally.fn)
    return accuracy, recall, f1


class Comparator(str, Enum):
    NUMERIC = "numeric"
    STRING = "string"


def _as_decimal(value: Any) -> Optional[Decimal]:
    if value is None or isinstance(value, bool):
        return None
    try:
        number = Decimal(str(value).strip().translate(_FULLWIDTH_DIGITS))
    except InvalidOperation:
        return None
    return number if number.is_finite() else None


def numbers_equal(pred: Any, gold: Any) -> bool:
    """Exact equality after decimal normalization ("2" = 2 = 2.0)."""
    a, b = _as_decimal(pred), _as_decimal(gold)
    return a is not None and b is not None and a == b


def strings_equal(pred: Any, gold: Any) -> bool:
    """Exact equality after trimming and folding full-width digits."""
    if not isinstance(pred, str) or not isinstance(gold, str):
        return False
    return pred.strip().translate(_FULLWIDTH_DIGITS) == gold.strip().translate(_FULLWIDTH_DIGITS)


COMPARATORS: dict[Comparator, Callable[[Any, Any], bool]] = {
    Comparator.NUMERIC: numbers_equal,
    Comparator.STRING: strings_equal,
}


def emr(
    pred_values: Sequence[Any],
    gold_values: Sequence[Any],
    equality: Comparator = Comparator.NUMERIC,
) -> float:
    """Exact match rate as a percentage. None in pred_values never matches."""
    if len(pred_values) != len(gold_values):
        raise LengthMismatch(f"{len(pred_values)} predictions vs {len(gold_values)} gold values")
    if not gold_values:
        raise EmptyInput("emr needs at least one value")
    same = COMPARATORS[Comparator(equality)]
    hits = sum(1 for p, g in zip(pred_values, gold_values) if same(p, g))
    return 100.0 * hits / len(gold_values)


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """|A & B| / |A | B|, with J(empty, empty) = 1."""
    set_a, set_b = set(a), set(b)
    union = set_a | set_b
    if not union:
        return 1.0
    return len(set_a & set_b) / len(union)


def cohen_kappa(labels_a: Sequence[Any], labels_b: Sequence[Any]) -> float:
    """
    Cohen's kappa between two annotators.

    Raises:
        LengthMismatch: lists differ in length
        EmptyInput: no labels
        DegenerateMarginals: both annotators used one and the same label
    """
    if len(labels_a) != len(labels_b):
        raise LengthMismatch(f"{len(labels_a)} vs {len(labels_b)} labels")
    if not labels_a:
        raise EmptyInput("kappa needs at least one label pair")
    if len(set(labels_a) | set(labels_b)) == 1:
        raise DegenerateMarginals("chance agreement is 1; kappa undefined")
    return float(cohen_kappa_score(list(labels_a), list(labels_b)))
