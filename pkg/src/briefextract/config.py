"""Configuration management for BriefExtract."""

import os
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Optional

import yaml
from dotenv import load_dotenv

from .errors import ConfigError

load_dotenv()


def _resolve_provider() -> str:
    """Resolve endpoint provider from env var, then default."""
    return os.getenv("BRIEF_EXTRACT_PROVIDER", "ollama").lower()


def _resolve_base_url() -> str:
    """Resolve base URL from env var."""
    return os.getenv("BRIEF_EXTRACT_BASE_URL", "")


def _resolve_model() -> str:
    """Resolve model name from env var."""
    return os.getenv("BRIEF_EXTRACT_MODEL", "")


def _resolve_work_dir() -> str:
    """Resolve work directory from env var, then default."""
    return os.getenv("BRIEF_EXTRACT_WORK_DIR", "work")


# Default endpoint per provider
PROVIDER_DEFAULTS: dict[str, dict[str, Any]] = {
    "ollama": {
        "base_url": "http://localhost:11434/v1",
        "model": "qwen2.5:7b",
        "requires_key": False,
    },
    "openai": {
        "base_url": "https://api.openai.com/v1",
        "model": "gpt-4o-mini",
        "requires_key": True,
    },
}

DEFAULT_COLUMN_MAP: dict[str, str] = {
    "post_id": "post_id",
    "account_id": "account_id",
    "posted_at": "posted_at",
    "reposts": "reposts",
    "likes": "likes",
    "comments": "comments",
    "body_text": "body_text",
    "image_texts": "image_texts",
}


@dataclass
class CleanConfig:
    """Settings for ingestion and the cleaning pipeline."""

    min_length: int = 15
    column_map: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLUMN_MAP))
    strict: bool = False  # malformed CSV rows are fatal when set
    exclude_ids: list[str] = field(default_factory=list)
    image_separator: str = "|"  # separator between OCR texts within one CSV cell

    def __post_init__(self):
        if self.min_length < 0:
            raise ConfigError(f"clean.min_length must be >= 0, got {self.min_length}")


@dataclass
class EndpointConfig:
    """Chat-completions endpoint settings."""

    provider: str = field(default_factory=_resolve_provider)
    base_url: str = field(default_factory=_resolve_base_url)
    model_name: str = field(default_factory=_resolve_model)
    api_key_env_var_name: str = "BRIEF_EXTRACT_API_KEY"
    temperature: float = 0.0
    max_output_tokens: int = 1024
    timeout: float = 120.0  # local inference can be slow
    max_retries: int = 3
    backoff_base: float = 1.0
    max_parallel_requests: int = 4
    stream: bool = False

    def __post_init__(self):
        """Fill in provider defaults and check invariants."""
        defaults = PROVIDER_DEFAULTS.get(self.provider, PROVIDER_DEFAULTS["openai"])
        if not self.base_url:
            self.base_url = defaults["base_url"]
        if not self.model_name:
            self.model_name = defaults["model"]
        if self.max_parallel_requests < 1:
            raise ConfigError("endpoint.max_parallel_requests must be >= 1")
        if self.temperature < 0:
            raise ConfigError("endpoint.temperature must be >= 0")
        if self.max_retries < 0:
            raise ConfigError("endpoint.max_retries must be >= 0")

    @property
    def requires_key(self) -> bool:
        """Local servers accept unauthenticated requests."""
        return bool(PROVIDER_DEFAULTS.get(self.provider, {}).get("requires_key", True))


@dataclass
class FoldConfig:
    """Cross-validation settings."""

    k: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError(f"folds.k must be >= 2, got {self.k}")


@dataclass
class PromptConfig:
    """Prompt template selection and few-shot settings."""

    templates: str = "en"  # shipped variant name or a directory with template files
    few_shot: int = 0
    exemplars: Optional[str] = None  # JSONL of {text, record} exemplars


@dataclass
class PathsConfig:
    """Input and output locations."""

    input_csv: Optional[str] = None
    gold_jsonl: Optional[str] = None
    work_dir: str = field(default_factory=_resolve_work_dir)

    @property
    def work(self) -> Path:
        return Path(self.work_dir)


@dataclass
class ReportConfig:
    """Report rendering settings."""

    formats: list[str] = field(default_factory=lambda: ["markdown", "json"])

    def __post_init__(self):
        unknown = set(self.formats) - {"markdown", "csv", "json"}
        if unknown:
            raise ConfigError(f"report.formats has unknown entries: {sorted(unknown)}")


@dataclass
class RunConfig:
    """Overall run configuration, one section per concern."""

    paths: PathsConfig = field(default_factory=PathsConfig)
    clean: CleanConfig = field(default_factory=CleanConfig)
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    folds: FoldConfig = field(default_factory=FoldConfig)
    prompts: PromptConfig = field(default_factory=PromptConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    training: dict[str, Any] = field(default_factory=dict)  # TrainingManifest overrides


def _build_section(cls: type, data: Any, section: str) -> Any:
    """Instantiate one dataclass section from a mapping, rejecting unknown keys."""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"config section '{section}' must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in config section '{section}': {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"invalid config section '{section}': {e}") from e


def load_run_config(path: Optional[Path] = None) -> RunConfig:
    """
    Load a RunConfig from a YAML file.

    Args:
        path: YAML config path. If None, defaults (plus environment) are used.

    Returns:
        The populated RunConfig
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config file {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a mapping")

    sections = {f.name: f for f in fields(RunConfig)}
    unknown = set(raw) - set(sections)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    kwargs: dict[str, Any] = {}
    for name, value in raw.items():
        default = sections[name].default_factory()  # type: ignore[misc]
        if is_dataclass(default):
            kwargs[name] = _build_section(type(default), value, name)
        else:
            if not isinstance(value, dict):
                raise ConfigError(f"config section '{name}' must be a mapping")
            kwargs[name] = value
    return RunConfig(**kwargs)
