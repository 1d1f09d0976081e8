"""Command-line interface for BriefExtract."""

import argparse
import asyncio
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.markdown import Markdown
from rich.markup import escape

from .. import __version__
from ..config import PROVIDER_DEFAULTS, EndpointConfig, RunConfig, load_run_config
from ..corpus.cleaning import BriefingRecord, clean_pipeline, read_briefings, write_briefings
from ..corpus.ingest import ingest_csv
from ..credentials import mask_key, resolve_api_key
from ..errors import BriefExtractError, ConfigError, DataError, EndpointError
from ..evaluation.agreement import annotator_agreement
from ..evaluation.folds import FoldSpec, kfold_split
from ..evaluation.report import (
    MEAN_OF_FOLDS,
    EvalReport,
    ReportFormat,
    aggregate_folds,
    render_comparison,
    write_report,
)
from ..evaluation.scoring import IdMisalignment, score_run
from ..jsonl import read_jsonl, write_json, write_jsonl
from ..llm.batch import run_batch
from ..llm.parsing import KeyAliasMap, ParsedExtraction, parse_many, parse_or_empty
from ..metrics.classification import LengthMismatch
from ..prompts.dataset import align_gold, synth_dataset
from ..prompts.manifest import emit_training_manifest
from ..prompts.templates import load_templates
from ..schema.record import ExtractionRecord, canonical_json, load_gold, parse_record
from .display import ReportDisplay

logger = logging.getLogger(__name__)

COMMANDS = ("clean", "synth", "split", "infer", "eval", "kappa", "report")


class UsageError(ConfigError):
    """Bad command-line arguments."""


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit code 1."""

    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Route log records through Rich on stderr."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )
    logging.getLogger("httpx").setLevel(logging.WARNING)


def _label_pair(text: str) -> tuple[str, str]:
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected name=path, got {text!r}")
    return name, path


class CLI:
    """Subcommand dispatcher for the extraction pipeline."""

    def __init__(self, console: Optional[Console] = None):
        """Initialize CLI."""
        self.console = console or Console()
        self.display = ReportDisplay(self.console)
        self.config = RunConfig()

    def build_parser(self) -> argparse.ArgumentParser:
        parser = _ArgumentParser(
            prog="brief-extract",
            description="Structured extraction from police briefing texts",
        )
        parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        parser.add_argument("--config", help="YAML run configuration")
        parser.add_argument("--seed", type=int, help="fold and manifest seed")
        parser.add_argument("--work-dir", help="directory for every artifact")
        noise = parser.add_mutually_exclusive_group()
        noise.add_argument("-v", "--verbose", action="store_true")
        noise.add_argument("-q", "--quiet", action="store_true")

        sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

        clean = sub.add_parser("clean", help="ingest a CSV and clean it into briefings")
        clean.add_argument("--input", help="posts CSV")
        clean.add_argument("--exclude-ids", help="file with one post_id per line to drop")
        clean.add_argument("--min-length", type=int)
        clean.add_argument("--strict", action="store_true", help="malformed rows are fatal")
        clean.add_argument("--out", help="briefing JSONL path")

        synth = sub.add_parser("synth", help="build the chat dataset and training manifest")
        synth.add_argument("--gold", help="gold JSONL")
        synth.add_argument("--templates", help="template set (en, zh) or directory")
        synth.add_argument("--out", help="dataset JSONL path")

        split = sub.add_parser("split", help="assign records to cross-validation folds")
        split.add_argument("--k", type=int)
        split.add_argument("--gold", help="split gold ids instead of kept briefing ids")

        infer = sub.add_parser("infer", help="run briefings through a chat endpoint")
        infer.add_argument("--fold", type=int, help="only the test ids of this fold")
        infer.add_argument("--few-shot", type=int)
        infer.add_argument("--exemplars", help="JSONL of {text, record} few-shot exemplars")
        infer.add_argument("--gold", help="gold JSONL used for exemplars")
        infer.add_argument("--templates")
        infer.add_argument("--provider", choices=sorted(PROVIDER_DEFAULTS))
        infer.add_argument("--base-url")
        infer.add_argument("--model")
        infer.add_argument("--max-parallel", type=int)
        infer.add_argument("--stream", action="store_true")
        infer.add_argument("--out-dir")

        evaluate = sub.add_parser("eval", help="score a run against gold records")
        evaluate.add_argument("--fold", type=int)
        evaluate.add_argument("--aggregate", action="store_true", help="average saved fold reports")
        evaluate.add_argument("--gold")
        evaluate.add_argument("--run-dir", help="directory holding raw_outputs.jsonl")
        evaluate.add_argument("--format", action="append", choices=[f.value for f in ReportFormat])

        kappa = sub.add_parser("kappa", help="agreement between two annotators")
        kappa.add_argument("annotator_a")
        kappa.add_argument("annotator_b")
        kappa.add_argument("--out-dir")

        report = sub.add_parser("report", help="compare saved reports side by side")
        report.add_argument(
            "--label", action="append", type=_label_pair, required=True, metavar="NAME=PATH"
        )
        report.add_argument("--format", choices=[f.value for f in ReportFormat], default="markdown")
        report.add_argument("--out")
        return parser

    # -- configuration -------------------------------------------------

    def _load_config(self, args: argparse.Namespace) -> RunConfig:
        """Config file (plus environment) first, then global flags."""
        cfg = load_run_config(Path(args.config) if args.config else None)
        if args.work_dir:
            cfg.paths.work_dir = args.work_dir
        if args.seed is not None:
            cfg.folds = replace(cfg.folds, seed=args.seed)
        return cfg

    @property
    def work(self) -> Path:
        return self.config.paths.work

    def _require(self, value: Optional[str], what: str) -> Path:
        if not value:
            raise ConfigError(f"no {what} given")
        path = Path(value)
        if not path.exists():
            raise ConfigError(f"{what} not found: {path}")
        return path

    def _briefings(self) -> list[BriefingRecord]:
        path = self.work / "briefings.jsonl"
        if not path.exists():
            raise ConfigError(f"{path} not found; run 'clean' first")
        return read_briefings(path)

    def _gold(self, flag: Optional[str]) -> list[tuple[str, ExtractionRecord]]:
        return load_gold(self._require(flag or self.config.paths.gold_jsonl, "gold JSONL"))

    def _run_dir(self, fold: Optional[int]) -> Path:
        return self.work / "infer" / ("all" if fold is None else f"fold-{fold}")

    def _endpoint(self, args: argparse.Namespace) -> EndpointConfig:
        endpoint = self.config.endpoint
        changes: dict[str, Any] = {}
        if args.provider:
            changes.update(provider=args.provider, base_url="", model_name="")
        if args.base_url:
            changes["base_url"] = args.base_url
        if args.model:
            changes["model_name"] = args.model
        if args.max_parallel is not None:
            changes["max_parallel_requests"] = args.max_parallel
        if args.stream:
            changes["stream"] = True
        return replace(endpoint, **changes) if changes else endpoint

    # -- subcommands ---------------------------------------------------

    def cmd_clean(self, args: argparse.Namespace) -> None:
        source = self._require(args.input or self.config.paths.input_csv, "input CSV")
        clean = self.config.clean
        if args.min_length is not None:
            clean = replace(clean, min_length=args.min_length)
        if args.strict:
            clean = replace(clean, strict=True)
        if args.exclude_ids:
            ids = [
                line.strip()
                for line in self._require(args.exclude_ids, "exclude-ids file")
                .read_text(encoding="utf-8")
                .splitlines()
                if line.strip() and not line.startswith("#")
            ]
            clean = replace(clean, exclude_ids=[*clean.exclude_ids, *ids])

        posts, malformed = ingest_csv(source, clean.column_map, clean.strict, clean.image_separator)
        records, stats = clean_pipeline(posts, clean)
        out = Path(args.out) if args.out else self.work / "briefings.jsonl"
        write_briefings(out, records, stats)
        self.display.print_cleaning_stats(stats)
        if malformed:
            self.console.print(f"[yellow]{len(malformed)} malformed rows skipped[/yellow]")
        self.console.print(f"Briefings written to {out}")

    def cmd_synth(self, args: argparse.Namespace) -> None:
        templates = load_templates(args.templates or self.config.prompts.templates)
        pairs = align_gold(self._briefings(), self._gold(args.gold))
        out = Path(args.out) if args.out else self.work / "dataset.jsonl"
        count = synth_dataset(templates, pairs, out)

        overrides = dict(self.config.training)
        overrides.setdefault("folds", self.config.folds.k)
        overrides.setdefault("seed", self.config.folds.seed)
        if args.seed is not None:
            overrides["seed"] = args.seed
        overrides["dataset"] = str(out)
        manifest = emit_training_manifest(self.work / "training_manifest.json", overrides)
        self.console.print(
            f"[green]{count}[/green] chat samples written to {out}; "
            f"manifest: {manifest.epochs} epochs, lr {manifest.learning_rate:g}, "
            f"effective batch {manifest.effective_batch}"
        )

    def cmd_split(self, args: argparse.Namespace) -> None:
        gold_path = args.gold or self.config.paths.gold_jsonl
        if gold_path:
            ids = [rid for rid, _ in self._gold(gold_path)]
        else:
            ids = [b.record_id for b in self._briefings()]
        k = args.k if args.k is not None else self.config.folds.k
        spec = kfold_split(ids, k, self.config.folds.seed)
        spec.write(self.work / "folds.json")
        self.display.print_split(spec)

    def _exemplars(self, args: argparse.Namespace, k: int, briefings, targets: set[str]):
        """(text, canonical JSON) exemplars, never drawn from the target records."""
        if k <= 0:
            return []
        source = args.exemplars or self.config.prompts.exemplars
        exemplars: list[tuple[str, str]] = []
        if source:
            for line_no, obj in read_jsonl(self._require(source, "exemplars JSONL")):
                if not isinstance(obj, dict) or "text" not in obj or "record" not in obj:
                    raise DataError(f"{source}:{line_no}: expected {{text, record}}")
                raw = obj["record"]
                record = parse_record(raw if isinstance(raw, str) else json.dumps(raw))
                exemplars.append((obj["text"], canonical_json(record)))
            return exemplars
        texts = {b.record_id: b.text for b in briefings}
        for record_id, record in self._gold(args.gold):
            if record_id in texts and record_id not in targets:
                exemplars.append((texts[record_id], canonical_json(record)))
        return exemplars

    def cmd_infer(self, args: argparse.Namespace) -> None:
        briefings = self._briefings()
        targets = briefings
        if args.fold is not None:
            spec = FoldSpec.read(self._require(str(self.work / "folds.json"), "fold spec"))
            held_out = set(spec.test_ids(args.fold))
            targets = [b for b in briefings if b.record_id in held_out]

        templates = load_templates(args.templates or self.config.prompts.templates)
        endpoint = self._endpoint(args)
        few_shot = args.few_shot if args.few_shot is not None else self.config.prompts.few_shot
        exemplars = self._exemplars(args, few_shot, briefings, {b.record_id for b in targets})

        key = resolve_api_key(endpoint.api_key_env_var_name)
        self.console.print(
            f"[green]Endpoint:[/green] {endpoint.base_url} ({endpoint.model_name})"
            + (f", key {mask_key(key)}" if key else "")
        )
        result = asyncio.run(
            run_batch(targets, templates, endpoint, exemplars=exemplars, few_shot=few_shot)
        )

        out_dir = Path(args.out_dir) if args.out_dir else self._run_dir(args.fold)
        result.write(out_dir / "transcripts.jsonl", out_dir / "raw_outputs.jsonl")
        aliases = KeyAliasMap()
        write_jsonl(
            out_dir / "predictions.jsonl",
            (
                {"record_id": t.record_id, **parse_or_empty(t.response_text, aliases).to_dict()}
                for t in result.transcripts
            ),
        )
        self.display.print_batch_summary(result)
        if result.all_failed:
            raise EndpointError(f"all {len(result.transcripts)} requests failed")

    def _predictions(self, path: Path, ids: Sequence[str]) -> list[ParsedExtraction]:
        """Saved predictions; unreadable lines count as all-absent predictions."""
        preds: list[ParsedExtraction] = []
        for index, (line_no, obj) in enumerate(read_jsonl(path)):
            if index >= len(ids):
                break
            if not isinstance(obj, dict):
                logger.warning("%s:%d unreadable; scored as absent", path, line_no)
                preds.append(ParsedExtraction.empty(f"line {line_no} unreadable"))
                continue
            if obj.get("record_id", ids[index]) != ids[index]:
                raise IdMisalignment(
                    f"{path}:{line_no}: {obj.get('record_id')!r} where {ids[index]!r} was expected"
                )
            try:
                preds.append(ParsedExtraction.from_dict(obj))
            except (ValueError, TypeError, AttributeError) as e:
                logger.warning("%s:%d unreadable (%s); scored as absent", path, line_no, e)
                preds.append(ParsedExtraction.empty(str(e)))
        if len(preds) != len(ids):
            raise LengthMismatch(f"{path} has {len(preds)} predictions for {len(ids)} outputs")
        return preds

    def cmd_eval(self, args: argparse.Namespace) -> None:
        formats = args.format or self.config.report.formats
        eval_dir = self.work / "eval"
        if args.aggregate:
            paths = sorted(eval_dir.glob("report.fold-*.json"))
            if not paths:
                raise DataError(f"no fold reports in {eval_dir}; run 'eval --fold i' first")
            merged = aggregate_folds([EvalReport.read(p) for p in paths])
            write_report(merged, eval_dir, f"report.{MEAN_OF_FOLDS}", formats)
            self.display.print_eval_report(merged)
            return

        run_dir = Path(args.run_dir) if args.run_dir else self._run_dir(args.fold)
        raw_path = self._require(str(run_dir / "raw_outputs.jsonl"), "raw outputs")
        ids: list[str] = []
        outputs: list[str] = []
        for line_no, obj in read_jsonl(raw_path):
            if not isinstance(obj, dict) or "record_id" not in obj:
                raise DataError(f"{raw_path}:{line_no}: expected {{record_id, output, status}}")
            ids.append(str(obj["record_id"]))
            outputs.append(str(obj.get("output") or ""))

        gold = dict(self._gold(args.gold))
        missing = [rid for rid in ids if rid not in gold]
        if missing:
            raise IdMisalignment(f"{len(missing)} outputs have no gold record: {missing[:5]}")
        golds = [gold[rid] for rid in ids]

        pred_path = run_dir / "predictions.jsonl"
        if pred_path.exists():
            preds = self._predictions(pred_path, ids)
        else:
            preds = parse_many(outputs)

        label = "all" if args.fold is None else f"fold-{args.fold}"
        report = score_run(preds, golds, outputs, pred_ids=ids, gold_ids=ids, fold=label)
        write_report(report, eval_dir, f"report.{label}", sorted({*formats, "json"}))
        self.display.print_eval_report(report)

    def cmd_kappa(self, args: argparse.Namespace) -> None:
        gold_a = load_gold(self._require(args.annotator_a, "annotator A file"))
        gold_b = dict(load_gold(self._require(args.annotator_b, "annotator B file")))
        ids_a = [rid for rid, _ in gold_a]
        if set(ids_a) != set(gold_b):
            raise IdMisalignment("annotator files cover different record ids")
        report = annotator_agreement(gold_a, [(rid, gold_b[rid]) for rid in ids_a])

        out_dir = Path(args.out_dir) if args.out_dir else self.work
        write_json(out_dir / "agreement.json", report.to_dict())
        report.write_disagreements(out_dir / "disagreements.jsonl")
        self.display.print_agreement(report)

    def cmd_report(self, args: argparse.Namespace) -> None:
        reports = {
            name: EvalReport.read(self._require(path, f"report for {name}"))
            for name, path in args.label
        }
        fmt = ReportFormat(args.format)
        text = render_comparison(reports, fmt)
        if args.out:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(text, encoding="utf-8")
            self.console.print(f"Comparison written to {out}")
        elif fmt is ReportFormat.MARKDOWN:
            self.console.print(Markdown(text))
        else:
            self.console.print(text, markup=False, highlight=False)

    # -- entry -----------------------------------------------------------

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Parse arguments and run one subcommand.

        Returns:
            Exit code: 0 success, 1 usage/config, 2 data, 3 endpoint
        """
        try:
            args = self.build_parser().parse_args(argv)
        except UsageError as e:
            self.console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
            return e.exit_code

        setup_logging(args.verbose, args.quiet)
        try:
            self.config = self._load_config(args)
            getattr(self, f"cmd_{args.command}")(args)
        except BriefExtractError as e:
            logger.debug("command failed", exc_info=True)
            self.console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
            return e.exit_code
        return 0
