"""Tests for the Rich console summaries."""

import pytest
from rich.console import Console

from briefextract.corpus.cleaning import CleaningStats
from briefextract.evaluation.agreement import AgreementReport
from briefextract.evaluation.folds import kfold_split
from briefextract.evaluation.report import EvalReport
from briefextract.llm.batch import BatchResult, Transcript, TranscriptStatus
from briefextract.ui.display import ReportDisplay


@pytest.fixture
def display():
    return ReportDisplay(Console(record=True, width=160))


def text(display: ReportDisplay) -> str:
    return display.console.export_text()


class TestReportDisplay:
    """Tests for ReportDisplay."""

    def test_cleaning_stats(self, display):
        stats = CleaningStats(input_count=40, short_dropped_count=4, duplicate_dropped_count=5, output_count=31)
        display.print_cleaning_stats(stats)
        out = text(display)
        assert "Kept" in out and "31" in out
        assert "do not balance" not in out

    def test_unbalanced_stats_flagged(self, display):
        display.print_cleaning_stats(CleaningStats(input_count=10, output_count=3))
        assert "do not balance" in text(display)

    def test_split(self, display):
        display.print_split(kfold_split([f"r{i}" for i in range(11)], 5, 1))
        assert "11 records in 5 folds (seed 1): 3, 2, 2, 2, 2" in text(display)

    def test_batch_failures_escaped(self, display):
        result = BatchResult(
            transcripts=[
                Transcript("r1", [], response_text="{}"),
                Transcript("r2", [], status=TranscriptStatus.FAILED, attempts=4, error="HTTP 500 [bold]x[/bold]"),
            ]
        )
        display.print_batch_summary(result)
        out = text(display)
        assert "1 ok, 1 failed of 2" in out
        assert "[bold]x[/bold]" in out

    def test_eval_report(self, display):
        report = EvalReport(fold="fold-2", sample_count=7)
        report.metrics["impact.deaths.existence:accuracy"] = 85.714
        report.absent = {"location.city": 2, "location.province": 0}
        display.print_eval_report(report)
        out = text(display)
        assert "Evaluation (fold-2)" in out
        assert "85.71" in out
        assert "undefined" in out
        assert "location.city (2)" in out
        assert "location.province" not in out

    def test_agreement(self, display):
        report = AgreementReport(kappas={"event.cybercrime": 0.4, "location.province": None}, pooled=0.4, record_count=50)
        display.print_agreement(report)
        out = text(display)
        assert "0.40" in out
        assert "0 disagreements over 50 records" in out
