"""Evaluation reports: fold aggregation and markdown/csv/json rendering."""

import io
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import pandas as pd

from ..errors import DataError
from ..jsonl import read_json, write_json
from ..metrics.generation import EmptyInput
from .plan import GENERATION, FieldMetricPlan

logger = logging.getLogger(__name__)

MEAN_OF_FOLDS = "mean-of-folds"

BOOLEAN_COLUMNS: dict[str, str] = {
    "impact.deaths.existence": "Death",
    "impact.injuries.existence": "Injury",
    "impact.economic_losses.existence": "Economic loss",
    "event.completed_illegal_act": "Crime success",
    "impact.social_impact": "Social impact",
    "event.cybercrime": "Cybercrime",
    "event.case_closure": "Case closure",
}
EMR_COLUMNS: dict[str, str] = {
    "impact.deaths.number": "Deaths",
    "impact.injuries.number": "Injuries",
    "impact.economic_losses.amount": "Economic losses",
    "location.province": "Province",
    "location.city": "City",
}
SIMILARITY_COLUMNS: dict[str, tuple[str, str]] = {
    "event.type_codes": ("Case type", "jaccard"),
    "event.police_handling": ("Police handling", "cosine"),
    "event.illegal_means": ("Criminal methods", "cosine"),
}
GENERATION_COLUMNS: dict[str, str] = {
    "bleu4": "BLEU-4",
    "rouge1": "ROUGE-1",
    "rouge2": "ROUGE-2",
    "rougeL": "ROUGE-L",
}


class PlanMismatch(DataError):
    """Reports built from different metric plans cannot be averaged."""


class ReportFormat(str, Enum):
    MARKDOWN = "markdown"
    CSV = "csv"
    JSON = "json"


FORMAT_SUFFIX = {ReportFormat.MARKDOWN: ".md", ReportFormat.CSV: ".csv", ReportFormat.JSON: ".json"}


@dataclass
class EvalReport:
    """
    Metric values keyed "<field path>:<metric>" (generation entries use "generation:<metric>").

    Boolean, EMR and generation values are percentages; Jaccard and cosine are
    fractions in [0, 1]. Undefined values are None with a reason in `undefined`.
    """

    metrics: dict[str, Optional[float]] = field(default_factory=dict)
    undefined: dict[str, str] = field(default_factory=dict)
    absent: dict[str, int] = field(default_factory=dict)
    sample_count: int = 0
    fold: str = "all"
    excluded: dict[str, int] = field(default_factory=dict)
    plan: FieldMetricPlan = field(default_factory=FieldMetricPlan)

    def value(self, path: str, metric: str) -> Optional[float]:
        return self.metrics.get(f"{path}:{metric}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "fold": self.fold,
            "sample_count": self.sample_count,
            "metrics": self.metrics,
            "undefined": self.undefined,
            "absent": self.absent,
            "excluded": self.excluded,
            "plan": self.plan.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvalReport":
        return cls(
            metrics=dict(data["metrics"]),
            undefined=dict(data.get("undefined", {})),
            absent={k: int(v) for k, v in data.get("absent", {}).items()},
            sample_count=int(data.get("sample_count", 0)),
            fold=str(data.get("fold", "all")),
            excluded={k: int(v) for k, v in data.get("excluded", {}).items()},
            plan=FieldMetricPlan.from_dict(data["plan"]) if "plan" in data else FieldMetricPlan(),
        )

    def write(self, path: Path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def read(cls, path: Path) -> "EvalReport":
        try:
            return cls.from_dict(read_json(path))
        except (KeyError, ValueError, TypeError) as e:
            raise DataError(f"{path} is not a saved evaluation report: {e}") from e


def aggregate_folds(reports: Sequence[EvalReport]) -> EvalReport:
    """
    Unweighted mean of every metric across folds.

    Undefined entries are left out of the mean and counted in `excluded`; a
    metric undefined in every fold stays undefined.
    """
    if not reports:
        raise EmptyInput("aggregate_folds needs at least one report")
    plan = reports[0].plan
    for report in reports[1:]:
        if report.plan.to_dict() != plan.to_dict():
            raise PlanMismatch(f"fold {report.fold} was scored with a different plan")

    merged = EvalReport(fold=MEAN_OF_FOLDS, plan=plan)
    for key in plan.metric_keys():
        values = [r.metrics.get(key) for r in reports]
        defined = [v for v in values if v is not None]
        skipped = len(values) - len(defined)
        if skipped:
            merged.excluded[key] = skipped
        if defined:
            merged.metrics[key] = sum(defined) / len(defined)
        else:
            merged.metrics[key] = None
            reasons = {r.undefined.get(key, "undefined") for r in reports}
            merged.undefined[key] = "; ".join(sorted(reasons))
    for report in reports:
        for path, count in report.absent.items():
            merged.absent[path] = merged.absent.get(path, 0) + count
    merged.sample_count = sum(r.sample_count for r in reports)
    return merged


def _cell(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.2f}"


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return lines


def _markdown(report: EvalReport) -> str:
    lines = [f"# Evaluation report ({report.fold})", "", f"Samples: {report.sample_count}", ""]

    lines.append("## Boolean fields (%)")
    lines.append("")
    lines.extend(
        _table(
            ["Metric", *BOOLEAN_COLUMNS.values()],
            [
                [metric.capitalize() if metric != "f1" else "F1"]
                + [_cell(report.value(path, metric)) for path in BOOLEAN_COLUMNS]
                for metric in ("accuracy", "recall", "f1")
            ],
        )
    )
    lines.append("")

    lines.append("## Exact match rate (%)")
    lines.append("")
    lines.extend(
        _table(
            ["Metric", *EMR_COLUMNS.values()],
            [["EMR"] + [_cell(report.value(path, "emr")) for path in EMR_COLUMNS]],
        )
    )
    lines.append("")

    lines.append("## Similarity")
    lines.append("")
    lines.extend(
        _table(
            ["Metric", *(label for label, _ in SIMILARITY_COLUMNS.values())],
            [
                ["Similarity"]
                + [_cell(report.value(path, metric)) for path, (_, metric) in SIMILARITY_COLUMNS.items()]
            ],
        )
    )
    lines.append("")

    lines.append("## Generation (%)")
    lines.append("")
    lines.extend(
        _table(
            list(GENERATION_COLUMNS.values()),
            [[_cell(report.value(GENERATION, metric)) for metric in GENERATION_COLUMNS]],
        )
    )

    if any(report.absent.values()):
        lines.extend(["", "## Absent fields", ""])
        lines.extend(
            _table(
                ["Field", "Absent"],
                [[path, str(count)] for path, count in report.absent.items() if count],
            )
        )
    if report.undefined:
        lines.extend(["", "## Undefined", ""])
        lines.extend(_table(["Metric", "Reason"], [[k, v] for k, v in report.undefined.items()]))
    if report.excluded:
        lines.extend(["", "## Excluded from mean", ""])
        lines.extend(_table(["Metric", "Folds"], [[k, str(v)] for k, v in report.excluded.items()]))
    return "\n".join(lines) + "\n"


def _frame(report: EvalReport) -> pd.DataFrame:
    rows = []
    for key in report.plan.metric_keys():
        entry, metric = key.rsplit(":", 1)
        rows.append(
            {
                "fold": report.fold,
                "field": entry,
                "metric": metric,
                "value": report.metrics.get(key),
                "undefined": report.undefined.get(key, ""),
                "absent": report.absent.get(entry, 0),
                "samples": report.sample_count,
            }
        )
    return pd.DataFrame(rows)


def render_report(report: EvalReport, fmt: ReportFormat = ReportFormat.MARKDOWN) -> str:
    """Render one report as markdown tables, long-format CSV or JSON."""
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.JSON:
        return json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n"
    if fmt is ReportFormat.CSV:
        buf = io.StringIO()
        _frame(report).to_csv(buf, index=False, lineterminator="\n")
        return buf.getvalue()
    return _markdown(report)


def _comparison_markdown(reports: Mapping[str, EvalReport]) -> str:
    lines = ["# Model comparison", ""]
    for metric in ("accuracy", "recall", "f1"):
        lines.append(f"## Boolean fields: {metric} (%)")
        lines.append("")
        lines.extend(
            _table(
                ["Model", *BOOLEAN_COLUMNS.values()],
                [
                    [name] + [_cell(r.value(path, metric)) for path in BOOLEAN_COLUMNS]
                    for name, r in reports.items()
                ],
            )
        )
        lines.append("")
    lines.append("## Exact match rate (%)")
    lines.append("")
    lines.extend(
        _table(
            ["Model", *EMR_COLUMNS.values()],
            [[name] + [_cell(r.value(p, "emr")) for p in EMR_COLUMNS] for name, r in reports.items()],
        )
    )
    lines.extend(["", "## Similarity", ""])
    lines.extend(
        _table(
            ["Model", *(label for label, _ in SIMILARITY_COLUMNS.values())],
            [
                [name] + [_cell(r.value(p, m)) for p, (_, m) in SIMILARITY_COLUMNS.items()]
                for name, r in reports.items()
            ],
        )
    )
    lines.extend(["", "## Generation (%)", ""])
    lines.extend(
        _table(
            ["Model", *GENERATION_COLUMNS.values()],
            [
                [name] + [_cell(r.value(GENERATION, m)) for m in GENERATION_COLUMNS]
                for name, r in reports.items()
            ],
        )
    )
    return "\n".join(lines) + "\n"


def render_comparison(
    reports: Mapping[str, EvalReport],
    fmt: ReportFormat = ReportFormat.MARKDOWN,
) -> str:
    """Side-by-side rendering, one row per model."""
    if not reports:
        raise EmptyInput("render_comparison needs at least one report")
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.JSON:
        return json.dumps(
            {name: r.to_dict() for name, r in reports.items()}, ensure_ascii=False, indent=2
        ) + "\n"
    if fmt is ReportFormat.CSV:
        wide = pd.DataFrame(
            {name: pd.Series(r.metrics, dtype="float64") for name, r in reports.items()}
        ).T
        wide.index.name = "model"
        buf = io.StringIO()
        wide.to_csv(buf, lineterminator="\n")
        return buf.getvalue()
    return _comparison_markdown(reports)


def write_report(report: EvalReport, out_dir: Path, stem: str, formats: Sequence[str]) -> list[Path]:
    """Write the report once per requested format; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in formats:
        fmt = ReportFormat(name)
        path = out_dir / f"{stem}{FORMAT_SUFFIX[fmt]}"
        path.write_text(render_report(report, fmt), encoding="utf-8")
        written.append(path)
    logger.info("wrote %s", ", ".join(str(p) for p in written))
    return written
