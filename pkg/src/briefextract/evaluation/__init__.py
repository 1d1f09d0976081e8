"""Field-to-metric wiring, run scoring, folds, reports and annotator agreement."""

from .agreement import AgreementReport, Disagreement, annotator_agreement
from .folds import FoldSpec, TooFewRecords, kfold_split
from .plan import GENERATION, FieldMetricPlan, MetricKind, default_plan
from .report import (
    MEAN_OF_FOLDS,
    EvalReport,
    PlanMismatch,
    ReportFormat,
    aggregate_folds,
    render_comparison,
    render_report,
    write_report,
)
from .scoring import IdMisalignment, score_run

__all__ = [
    "AgreementReport",
    "Disagreement",
    "annotator_agreement",
    "FoldSpec",
    "TooFewRecords",
    "kfold_split",
    "GENERATION",
    "FieldMetricPlan",
    "MetricKind",
    "default_plan",
    "MEAN_OF_FOLDS",
    "EvalReport",
    "PlanMismatch",
    "ReportFormat",
    "aggregate_folds",
    "render_comparison",
    "render_report",
    "write_report",
    "IdMisalignment",
    "score_run",
]
