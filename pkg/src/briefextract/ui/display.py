"""Console summaries using the Rich library."""

from typing import Optional

from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.style import Style
from rich.table import Table

from ..corpus.cleaning import CleaningStats
from ..evaluation.agreement import AgreementReport
from ..evaluation.folds import FoldSpec
from ..evaluation.plan import GENERATION
from ..evaluation.report import (
    BOOLEAN_COLUMNS,
    EMR_COLUMNS,
    GENERATION_COLUMNS,
    SIMILARITY_COLUMNS,
    EvalReport,
)
from ..llm.batch import BatchResult


def _fmt(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.2f}"


class ReportDisplay:
    """Render pipeline results on a Rich console."""

    STYLE_HEADER = Style(color="bright_blue", bold=True)
    STYLE_OK = Style(color="green")
    STYLE_FAIL = Style(color="red", bold=True)
    STYLE_DIM = Style(dim=True)

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def print_cleaning_stats(self, stats: CleaningStats):
        """Print the cleaning counts and whether they balance."""
        table = Table(title="Cleaning", show_header=True, header_style=self.STYLE_HEADER)
        table.add_column("Stage")
        table.add_column("Count", justify="right")
        table.add_row("Input posts", str(stats.input_count))
        table.add_row("Excluded by id", str(stats.excluded_count))
        table.add_row("URLs stripped", str(stats.url_stripped_count))
        table.add_row("Too short", str(stats.short_dropped_count))
        table.add_row("Duplicates", str(stats.duplicate_dropped_count))
        table.add_row("Kept", str(stats.output_count), style=self.STYLE_OK)
        self.console.print(table)
        if not stats.is_conserved:
            self.console.print("[bold red]Counts do not balance[/bold red]")

    def print_split(self, spec: FoldSpec):
        sizes = ", ".join(str(s) for s in spec.sizes())
        self.console.print(
            f"[green]{len(spec.assignments)}[/green] records in {spec.k} folds "
            f"(seed {spec.seed}): {sizes}"
        )

    def print_batch_summary(self, result: BatchResult, max_failures: int = 10):
        """Print ok/failed counts and the first few failures."""
        style = self.STYLE_FAIL if result.failed_count else self.STYLE_OK
        self.console.print(
            Panel(
                f"{result.ok_count} ok, {result.failed_count} failed "
                f"of {len(result.transcripts)}",
                title="Inference",
                style=style,
            )
        )
        failures = [t for t in result.transcripts if not t.ok][:max_failures]
        if failures:
            table = Table(show_header=True, header_style=self.STYLE_HEADER)
            table.add_column("Record")
            table.add_column("Attempts", justify="right")
            table.add_column("Error", style=self.STYLE_DIM)
            for t in failures:
                table.add_row(t.record_id, str(t.attempts), escape(t.error))
            self.console.print(table)

    def print_eval_report(self, report: EvalReport):
        """Boolean, exact-match, similarity and generation tables."""
        self.console.print(
            f"\n[bold]Evaluation ({report.fold})[/bold], {report.sample_count} samples"
        )

        boolean = Table(title="Boolean fields (%)", header_style=self.STYLE_HEADER)
        boolean.add_column("Metric")
        for label in BOOLEAN_COLUMNS.values():
            boolean.add_column(label, justify="right")
        for metric in ("accuracy", "recall", "f1"):
            boolean.add_row(metric, *(_fmt(report.value(p, metric)) for p in BOOLEAN_COLUMNS))
        self.console.print(boolean)

        exact = Table(title="Exact match rate (%)", header_style=self.STYLE_HEADER)
        for label in EMR_COLUMNS.values():
            exact.add_column(label, justify="right")
        exact.add_row(*(_fmt(report.value(p, "emr")) for p in EMR_COLUMNS))
        self.console.print(exact)

        similarity = Table(title="Similarity", header_style=self.STYLE_HEADER)
        for label, _ in SIMILARITY_COLUMNS.values():
            similarity.add_column(label, justify="right")
        similarity.add_row(*(_fmt(report.value(p, m)) for p, (_, m) in SIMILARITY_COLUMNS.items()))
        self.console.print(similarity)

        generation = Table(title="Generation (%)", header_style=self.STYLE_HEADER)
        for label in GENERATION_COLUMNS.values():
            generation.add_column(label, justify="right")
        generation.add_row(*(_fmt(report.value(GENERATION, m)) for m in GENERATION_COLUMNS))
        self.console.print(generation)

        absent = {p: c for p, c in report.absent.items() if c}
        if absent:
            self.console.print(
                "[yellow]Absent fields:[/yellow] "
                + ", ".join(f"{p} ({c})" for p, c in absent.items())
            )

    def print_agreement(self, report: AgreementReport):
        """Per-field kappa, pooled kappa and the disagreement count."""
        table = Table(title="Annotator agreement (Cohen's kappa)", header_style=self.STYLE_HEADER)
        table.add_column("Field")
        table.add_column("Kappa", justify="right")
        for path, kappa in report.kappas.items():
            table.add_row(path, _fmt(kappa))
        table.add_row("pooled (boolean)", _fmt(report.pooled), style="bold")
        self.console.print(table)
        self.console.print(f"{len(report.disagreements)} disagreements over {report.record_count} records")
