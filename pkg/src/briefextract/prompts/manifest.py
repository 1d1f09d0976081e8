"""Training manifest handed to the external fine-tuning framework."""

import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from ..errors import ConfigError, DataError
from ..jsonl import write_json

logger = logging.getLogger(__name__)


class InvariantViolation(DataError):
    """per_device_batch x grad_accum_steps differs from effective_batch."""


@dataclass(frozen=True)
class TrainingManifest:
    """Fine-tuning hyperparameters. The trainer interprets them; nothing here trains."""

    max_seq_len: int = 1024
    epochs: int = 60
    learning_rate: float = 2e-4
    scheduler: str = "cosine"
    warmup_ratio: float = 0.03
    per_device_batch: int = 4
    grad_accum_steps: int = 8
    effective_batch: int = 32
    adaptation_method: str = "LoRA"
    base_model: str = "Qwen2.5-7B"
    folds: int = 5
    seed: int = 42
    dataset: str = ""

    def check(self) -> None:
        if self.per_device_batch * self.grad_accum_steps != self.effective_batch:
            raise InvariantViolation(
                f"per_device_batch ({self.per_device_batch}) x grad_accum_steps "
                f"({self.grad_accum_steps}) != effective_batch ({self.effective_batch})"
            )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def build_manifest(overrides: Optional[Mapping[str, Any]] = None) -> TrainingManifest:
    """
    Apply overrides to the defaults.

    When the batch factors are overridden without effective_batch, the
    effective batch follows their product.
    """
    overrides = dict(overrides or {})
    known = {f.name for f in fields(TrainingManifest)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown training manifest keys: {sorted(unknown)}")
    manifest = replace(TrainingManifest(), **overrides)
    if "effective_batch" not in overrides:
        manifest = replace(
            manifest, effective_batch=manifest.per_device_batch * manifest.grad_accum_steps
        )
    manifest.check()
    return manifest


def emit_training_manifest(
    out: Path,
    overrides: Optional[Mapping[str, Any]] = None,
) -> TrainingManifest:
    """Build the manifest and write it as a flat JSON document."""
    manifest = build_manifest(overrides)
    write_json(out, manifest.to_dict())
    logger.info("wrote training manifest to %s", out)
    return manifest
