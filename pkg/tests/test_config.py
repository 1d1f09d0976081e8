"""Tests for run configuration loading."""

import pytest

from briefextract.config import (
    CleanConfig,
    EndpointConfig,
    FoldConfig,
    ReportConfig,
    RunConfig,
    load_run_config,
)
from briefextract.errors import ConfigError


def write_config(tmp_path, text: str):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadRunConfig:
    """Tests for load_run_config."""

    def test_no_file_gives_defaults(self):
        cfg = load_run_config(None)
        assert isinstance(cfg, RunConfig)
        assert cfg.clean.min_length == 15
        assert cfg.folds.k == 5
        assert cfg.folds.seed == 42
        assert cfg.report.formats == ["markdown", "json"]

    def test_sections(self, tmp_path):
        path = write_config(
            tmp_path,
            """
paths:
  input_csv: posts.csv
  work_dir: out
clean:
  min_length: 20
  exclude_ids: [p1, p2]
endpoint:
  provider: ollama
  model_name: qwen2.5:14b
  max_parallel_requests: 2
folds:
  k: 10
  seed: 7
prompts:
  templates: zh
  few_shot: 2
training:
  epochs: 3
""",
        )
        cfg = load_run_config(path)
        assert cfg.paths.input_csv == "posts.csv"
        assert str(cfg.paths.work) == "out"
        assert cfg.clean.min_length == 20
        assert cfg.clean.exclude_ids == ["p1", "p2"]
        assert cfg.endpoint.model_name == "qwen2.5:14b"
        assert cfg.endpoint.base_url == "http://localhost:11434/v1"
        assert cfg.endpoint.max_parallel_requests == 2
        assert cfg.folds == FoldConfig(k=10, seed=7)
        assert cfg.prompts.templates == "zh"
        assert cfg.training == {"epochs": 3}

    def test_empty_file(self, tmp_path):
        assert load_run_config(write_config(tmp_path, "")).folds.k == 5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "nope.yaml")

    @pytest.mark.parametrize(
        "text,match",
        [
            ("metrics: {}\n", "unknown config sections"),
            ("clean:\n  minimum: 3\n", "unknown keys"),
            ("folds: 5\n", "must be a mapping"),
            ("- a\n- b\n", "must contain a mapping"),
            ("clean: [\n", "cannot parse"),
        ],
    )
    def test_rejected(self, tmp_path, text, match):
        with pytest.raises(ConfigError, match=match):
            load_run_config(write_config(tmp_path, text))


class TestInvariants:
    """Section-level checks."""

    def test_fold_count(self):
        with pytest.raises(ConfigError):
            FoldConfig(k=1)

    def test_negative_min_length(self):
        with pytest.raises(ConfigError):
            CleanConfig(min_length=-1)

    def test_parallelism(self):
        with pytest.raises(ConfigError):
            EndpointConfig(provider="ollama", max_parallel_requests=0)

    def test_report_formats(self):
        with pytest.raises(ConfigError):
            ReportConfig(formats=["html"])

    def test_provider_from_environment(self, monkeypatch):
        monkeypatch.setenv("BRIEF_EXTRACT_PROVIDER", "OpenAI")
        monkeypatch.delenv("BRIEF_EXTRACT_BASE_URL", raising=False)
        cfg = EndpointConfig()
        assert cfg.provider == "openai"
        assert cfg.base_url == "https://api.openai.com/v1"
