"""Seeded k-fold partitioning of record ids."""

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from ..errors import DataError
from ..jsonl import read_json, write_json

logger = logging.getLogger(__name__)

PRNG_NAME = "python-random-mt19937"


class TooFewRecords(DataError):
    """Fewer records than folds."""


@dataclass
class FoldSpec:
    """Fold assignment for every record id; ids keep their input order."""

    k: int
    seed: int
    assignments: dict[str, int] = field(default_factory=dict)
    prng: str = PRNG_NAME

    def test_ids(self, fold: int) -> list[str]:
        """Ids held out in this fold, in input order."""
        self._check_fold(fold)
        return [rid for rid, f in self.assignments.items() if f == fold]

    def train_ids(self, fold: int) -> list[str]:
        self._check_fold(fold)
        return [rid for rid, f in self.assignments.items() if f != fold]

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for f in self.assignments.values():
            counts[f] += 1
        return counts

    def _check_fold(self, fold: int) -> None:
        if not 0 <= fold < self.k:
            raise DataError(f"fold {fold} out of range 0..{self.k - 1}")

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "seed": self.seed, "prng": self.prng, "assignments": self.assignments}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FoldSpec":
        return cls(
            k=int(data["k"]),
            seed=int(data["seed"]),
            assignments={str(k): int(v) for k, v in data["assignments"].items()},
            prng=data.get("prng", PRNG_NAME),
        )

    def write(self, path: Path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def read(cls, path: Path) -> "FoldSpec":
        try:
            return cls.from_dict(read_json(path))
        except (KeyError, ValueError, TypeError) as e:
            raise DataError(f"{path} is not a fold spec: {e}") from e


def kfold_split(ids: Sequence[str], k: int = 5, seed: int = 42) -> FoldSpec:
    """
    Shuffle ids with random.Random(seed) and deal them round-robin into k folds.

    Fold sizes differ by at most one.
    """
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    if len(ids) < k:
        raise TooFewRecords(f"{len(ids)} records cannot fill {k} folds")
    if len(set(ids)) != len(ids):
        raise DataError("record ids must be unique")

    order = list(ids)
    random.Random(seed).shuffle(order)
    dealt = {rid: i % k for i, rid in enumerate(order)}
    spec = FoldSpec(k=k, seed=seed, assignments={rid: dealt[rid] for rid in ids})
    logger.info("split %d records into %d folds (seed %d): %s", len(ids), k, seed, spec.sizes())
    return spec
