"""Score parsed predictions against gold records.

A field absent from a prediction is always scored wrong: boolean absences
count as fn (gold true) or fp (gold false), number and place absences never
match, absent codes count as the empty set and absent text as empty text.
"""

import logging
from statistics import fmean
from typing import Any, Optional, Sequence

from ..errors import DataError
from ..llm.parsing import ParsedExtraction
from ..metrics.classification import (
    Comparator,
    ConfusionTally,
    LengthMismatch,
    classification_scores,
    emr,
    jaccard,
)
from ..metrics.generation import (
    EmptyInput,
    ReferenceTooShort,
    Tokenizer,
    bleu4,
    rouge_l,
    rouge_n,
    tokenize,
)
from ..metrics.similarity import tfidf_cosine
from ..schema.record import ExtractionRecord, canonical_json, get_field
from .plan import GENERATION, FieldMetricPlan, MetricKind
from .report import EvalReport

logger = logging.getLogger(__name__)


class IdMisalignment(DataError):
    """Predictions and gold records are not in the same record order."""


def boolean_tally(preds: Sequence[Optional[Any]], golds: Sequence[bool]) -> ConfusionTally:
    """Tally with true as the positive class; anything but a matching bool is wrong."""
    tp = tn = fp = fn = 0
    for pred, gold in zip(preds, golds):
        correct = isinstance(pred, bool) and pred == gold
        if gold:
            tp, fn = (tp + 1, fn) if correct else (tp, fn + 1)
        else:
            tn, fp = (tn + 1, fp) if correct else (tn, fp + 1)
    return ConfusionTally(tp=tp, tn=tn, fp=fp, fn=fn)


def _codes(value: Any) -> set[str]:
    if isinstance(value, (list, tuple, set, frozenset)):
        return {str(v) for v in value}
    return set()


def _text(value: Any) -> str:
    return value if isinstance(value, str) else ""


def _generation_scores(
    raw_outputs: Sequence[str],
    references: Sequence[str],
    tokenizer: Tokenizer,
    report: EvalReport,
) -> None:
    cands = [tokenize(raw, tokenizer) for raw in raw_outputs]
    refs = [tokenize(ref, tokenizer) for ref in references]
    key = f"{GENERATION}:"
    try:
        report.metrics[key + "bleu4"] = bleu4(list(zip(cands, refs))).score
    except DataError as e:
        report.metrics[key + "bleu4"] = None
        report.undefined[key + "bleu4"] = str(e)

    scorers = {
        "rouge1": lambda c, r: rouge_n(c, r, 1),
        "rouge2": lambda c, r: rouge_n(c, r, 2),
        "rougeL": rouge_l,
    }
    for name, scorer in scorers.items():
        f_scores = []
        try:
            for cand, ref in zip(cands, refs):
                if not cand:
                    f_scores.append(0.0)
                    continue
                f_scores.append(scorer(cand, ref)[2])
        except (ReferenceTooShort, EmptyInput) as e:
            report.metrics[key + name] = None
            report.undefined[key + name] = str(e)
            continue
        report.metrics[key + name] = 100.0 * fmean(f_scores)


def score_run(
    preds: Sequence[ParsedExtraction],
    golds: Sequence[ExtractionRecord],
    raw_outputs: Sequence[str],
    plan: Optional[FieldMetricPlan] = None,
    pred_ids: Optional[Sequence[str]] = None,
    gold_ids: Optional[Sequence[str]] = None,
    fold: str = "all",
    tokenizer: Tokenizer = Tokenizer.CHAR,
) -> EvalReport:
    """
    Score one run.

    Args:
        preds: Parsed predictions, aligned with golds
        golds: Gold records
        raw_outputs: Raw model outputs used for the generation scores
        plan: Field-to-metric plan; the default wiring if None
        pred_ids: Record ids of preds, checked against gold_ids when both given
        gold_ids: Record ids of golds
        fold: Label stored on the report
        tokenizer: Tokenization for generation and cosine metrics

    Returns:
        EvalReport with one value (or undefined marker) per plan metric
    """
    plan = plan or FieldMetricPlan()
    if not (len(preds) == len(golds) == len(raw_outputs)):
        raise LengthMismatch(
            f"{len(preds)} predictions, {len(golds)} gold records, {len(raw_outputs)} raw outputs"
        )
    if pred_ids is not None and gold_ids is not None:
        if len(pred_ids) != len(gold_ids):
            raise LengthMismatch(f"{len(pred_ids)} prediction ids vs {len(gold_ids)} gold ids")
        for i, (p, g) in enumerate(zip(pred_ids, gold_ids)):
            if p != g:
                raise IdMisalignment(f"position {i}: prediction {p!r} vs gold {g!r}")
    if not golds:
        raise EmptyInput("score_run needs at least one record")

    report = EvalReport(sample_count=len(golds), fold=str(fold), plan=plan)
    for path, kind in plan.entries.items():
        if kind is MetricKind.GENERATION:
            continue
        gold_values = [get_field(g, path) for g in golds]
        pred_values = [p.get(path) for p in preds]
        report.absent[path] = sum(1 for p in preds if not p.has(path))

        if kind is MetricKind.BOOLEAN:
            accuracy, recall, f1 = classification_scores(boolean_tally(pred_values, gold_values))
            report.metrics[f"{path}:accuracy"] = 100.0 * accuracy
            report.metrics[f"{path}:recall"] = 100.0 * recall
            report.metrics[f"{path}:f1"] = 100.0 * f1
        elif kind is MetricKind.EMR_NUMERIC:
            report.metrics[f"{path}:emr"] = emr(pred_values, gold_values, Comparator.NUMERIC)
        elif kind is MetricKind.EMR_STRING:
            report.metrics[f"{path}:emr"] = emr(pred_values, gold_values, Comparator.STRING)
        elif kind is MetricKind.JACCARD:
            report.metrics[f"{path}:jaccard"] = fmean(
                jaccard(_codes(p), g) for p, g in zip(pred_values, gold_values)
            )
        elif kind is MetricKind.TFIDF_COSINE:
            sims = tfidf_cosine([_text(p) for p in pred_values], gold_values, tokenizer)
            report.metrics[f"{path}:cosine"] = fmean(sims)

    if GENERATION in plan.entries:
        references = [canonical_json(g) for g in golds]
        _generation_scores(raw_outputs, references, tokenizer, report)

    absent_total = sum(report.absent.values())
    logger.info(
        "scored %d records (fold %s), %d absent field values", len(golds), fold, absent_total
    )
    return report
