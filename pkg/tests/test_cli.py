"""End-to-end CLI tests against a mock OpenAI-compatible server.

The mock answers each request with the canonical gold JSON of the briefing
it finds in the user message, so a clean run scores the maximum everywhere.
"""

import io
import json
import random
import re
import socket
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from rich.console import Console

from briefextract.corpus.cleaning import DropReason, read_briefings
from briefextract.main import main
from briefextract.schema.record import canonical_json, gold_row
from briefextract.ui.cli import CLI

from .conftest import FIXTURES, random_record

CASE_NUMBER = re.compile(r"案件编号(\d\d)")
POST_IDS = [f"p{i:02d}" for i in range(1, 11)]


class _GoldEchoHandler(BaseHTTPRequestHandler):
    """Returns the gold record for the last case number in the user message."""

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers.get("Content-Length", 0))))
        user = body["messages"][-1]["content"]
        number = CASE_NUMBER.findall(user)[-1]
        self.server.requests.append(body)

        if number in self.server.corrupt:
            content = "抱歉，无法从该通报中提取信息。"
        else:
            content = self.server.gold_json[f"p{number}"]
        response = {
            "id": "mock-001",
            "object": "chat.completion",
            "model": body.get("model", "mock-model"),
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": content},
                    "finish_reason": "stop",
                }
            ],
        }
        payload = json.dumps(response, ensure_ascii=False).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, format, *args):
        pass  # Suppress request logs


@pytest.fixture
def gold():
    rng = random.Random(99)
    return {post_id: random_record(rng) for post_id in POST_IDS}


@pytest.fixture
def gold_path(tmp_path, gold):
    path = tmp_path / "gold.jsonl"
    path.write_text(
        "".join(json.dumps(gold_row(rid, r), ensure_ascii=False) + "\n" for rid, r in gold.items()),
        encoding="utf-8",
    )
    return path


@pytest.fixture
def mock_server(gold):
    server = ThreadingHTTPServer(("127.0.0.1", 0), _GoldEchoHandler)
    server.gold_json = {rid: canonical_json(r) for rid, r in gold.items()}
    server.corrupt = set()
    server.requests = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


class Runner:
    """Runs the CLI in one work directory and keeps the console output."""

    def __init__(self, work, base_url):
        self.work = work
        self.base_url = base_url
        self.output = ""

    def __call__(self, *argv: str) -> int:
        buf = io.StringIO()
        code = CLI(console=Console(file=buf, width=200)).run(
            ["-q", "--work-dir", str(self.work), *argv]
        )
        self.output = buf.getvalue()
        return code

    def infer(self, *argv: str) -> int:
        return self(
            "infer",
            "--provider",
            "ollama",
            "--base-url",
            self.base_url,
            "--model",
            "mock-model",
            *argv,
        )

    def report(self, label: str) -> dict:
        return json.loads((self.work / "eval" / f"report.{label}.json").read_text(encoding="utf-8"))


@pytest.fixture
def run(tmp_path, mock_server):
    host, port = mock_server.server_address[:2]
    return Runner(tmp_path / "work", f"http://{host}:{port}/v1")


def assert_maximum(report: dict):
    for key, value in report["metrics"].items():
        best = 1.0 if key.endswith((":jaccard", ":cosine")) else 100.0
        assert value == pytest.approx(best), key
    assert sum(report["absent"].values()) == 0


class TestPipeline:
    """clean -> synth -> split -> infer -> eval through the CLI."""

    def test_clean(self, run):
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        path = run.work / "briefings.jsonl"
        assert [r.record_id for r in read_briefings(path)] == POST_IDS

        everything = read_briefings(path, kept_only=False)
        dropped = {r.record_id: r.drop_reason for r in everything if r.dropped}
        assert dropped == {"p11": DropReason.EXACT_DUPLICATE, "p12": DropReason.TOO_SHORT}
        assert "Kept" in run.output

    def test_full_run_scores_maximum(self, run, gold_path, mock_server):
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        assert run("synth", "--gold", str(gold_path)) == 0
        assert run("split", "--gold", str(gold_path)) == 0
        assert run.infer() == 0
        assert run("eval", "--gold", str(gold_path)) == 0

        assert len(mock_server.requests) == 10
        assert len((run.work / "dataset.jsonl").read_text(encoding="utf-8").splitlines()) == 10
        manifest = json.loads((run.work / "training_manifest.json").read_text())
        assert manifest["seed"] == 42 and manifest["folds"] == 5
        folds = json.loads((run.work / "folds.json").read_text())
        assert sorted(folds["assignments"]) == POST_IDS

        report = run.report("all")
        assert report["sample_count"] == 10
        assert_maximum(report)
        assert (run.work / "eval" / "report.all.md").exists()

    def test_folds_and_aggregate(self, run, gold_path):
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        assert run("--seed", "7", "split", "--k", "5") == 0
        for fold in range(5):
            assert run.infer("--fold", str(fold)) == 0
            assert run("eval", "--fold", str(fold), "--gold", str(gold_path)) == 0
            assert run.report(f"fold-{fold}")["sample_count"] == 2
        assert run("eval", "--aggregate") == 0

        merged = run.report("mean-of-folds")
        assert merged["fold"] == "mean-of-folds"
        assert merged["sample_count"] == 10
        assert_maximum(merged)

    def test_corrupted_outputs_counted_absent(self, run, gold_path, mock_server):
        mock_server.corrupt = {"03"}
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        assert run.infer() == 0
        assert run("eval", "--gold", str(gold_path), "--format", "csv") == 0

        report = run.report("all")
        assert set(report["absent"].values()) == {1}
        assert report["metrics"]["location.province:emr"] == pytest.approx(90.0)
        assert report["metrics"]["impact.deaths.number:emr"] == pytest.approx(90.0)
        for key, value in report["metrics"].items():
            if key.endswith((":accuracy", ":emr")):
                assert value < 100.0, key
        assert report["metrics"]["event.type_codes:jaccard"] < 1.0
        assert report["metrics"]["generation:bleu4"] < 100.0
        assert (run.work / "eval" / "report.all.csv").exists()

        predictions = (run.work / "infer" / "all" / "predictions.jsonl").read_text(encoding="utf-8")
        third = json.loads(predictions.splitlines()[2])
        assert third["record_id"] == "p03"
        assert third["values"] == {}

    def test_few_shot_draws_exemplars_outside_fold(self, run, gold_path, mock_server):
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        assert run("split", "--k", "5") == 0
        assert run.infer("--fold", "0", "--few-shot", "2", "--gold", str(gold_path)) == 0

        folds = json.loads((run.work / "folds.json").read_text())
        held_out = {rid for rid, f in folds["assignments"].items() if f == 0}
        for request in mock_server.requests:
            numbers = CASE_NUMBER.findall(request["messages"][-1]["content"])
            assert len(numbers) == 3
            assert f"p{numbers[-1]}" in held_out
            assert not {f"p{n}" for n in numbers[:2]} & held_out


class TestOtherCommands:
    """kappa and report."""

    def test_kappa(self, run, tmp_path, gold, gold_path):
        rng = random.Random(5)
        other = tmp_path / "annotator_b.jsonl"
        rows = [gold_row(rid, random_record(rng) if rid == "p01" else r) for rid, r in gold.items()]
        other.write_text(
            "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in reversed(rows)),
            encoding="utf-8",
        )
        assert run("kappa", str(gold_path), str(other)) == 0

        agreement = json.loads((run.work / "agreement.json").read_text())
        assert agreement["record_count"] == 10
        disagreements = (run.work / "disagreements.jsonl").read_text(encoding="utf-8").splitlines()
        assert disagreements
        assert {json.loads(d)["record_id"] for d in disagreements} == {"p01"}

    def test_report_comparison(self, run, tmp_path, gold_path):
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        assert run.infer() == 0
        assert run("eval", "--gold", str(gold_path)) == 0
        saved = run.work / "eval" / "report.all.json"

        out = tmp_path / "comparison.csv"
        assert (
            run("report", "--label", f"base={saved}", "--label", f"tuned={saved}", "--format", "csv", "--out", str(out))
            == 0
        )
        lines = out.read_text(encoding="utf-8").splitlines()
        assert [line.split(",")[0] for line in lines] == ["model", "base", "tuned"]

        assert run("report", "--label", f"base={saved}") == 0
        assert "Model comparison" in run.output


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class TestExitCodes:
    """Error categories map to exit codes."""

    def test_usage_error(self, run):
        assert run("frobnicate") == 1
        assert run("report") == 1

    def test_missing_input(self, run):
        assert run("clean") == 1
        assert "no input CSV given" in run.output
        assert run("clean", "--input", "nope.csv") == 1

    def test_infer_before_clean(self, run):
        assert run.infer() == 1
        assert "run 'clean' first" in run.output

    def test_bad_config(self, run, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("surprise: {}\n")
        assert run("--config", str(config), "split") == 1

    def test_gold_missing_ids_is_data_error(self, run, tmp_path):
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        assert run.infer() == 0
        partial = tmp_path / "partial.jsonl"
        partial.write_text(json.dumps(gold_row("p01", random_record(random.Random(1)))) + "\n")
        assert run("eval", "--gold", str(partial)) == 2

    def test_unreachable_endpoint(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("endpoint:\n  max_retries: 0\n  timeout: 5\n")
        work = tmp_path / "work"
        runner = Runner(work, f"http://127.0.0.1:{free_port()}/v1")
        assert runner("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        code = runner("--config", str(config), "infer", "--provider", "ollama", "--base-url", runner.base_url)
        assert code == 3
        assert "requests failed" in runner.output
        raw = (work / "infer" / "all" / "raw_outputs.jsonl").read_text(encoding="utf-8").splitlines()
        assert {json.loads(r)["status"] for r in raw} == {"failed"}

    def test_missing_api_key_is_config_error(self, run, mock_server, monkeypatch):
        monkeypatch.delenv("BRIEF_EXTRACT_API_KEY", raising=False)
        assert run("clean", "--input", str(FIXTURES / "posts.csv")) == 0
        code = run("infer", "--provider", "openai", "--base-url", run.base_url, "--model", "m")
        assert code == 1
        assert "BRIEF_EXTRACT_API_KEY" in run.output
        assert mock_server.requests == []

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert "brief-extract" in capsys.readouterr().out
