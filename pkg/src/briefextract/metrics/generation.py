"""Generation metrics over token sequences: corpus BLEU-4, ROUGE-N and ROUGE-L."""

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import regex

from ..errors import DataError

TokenSeq = list[str]

_WHITESPACE = regex.compile(r"\s+")
_WORD = regex.compile(r"\p{Han}|[^\s\p{Han}]+")


class EmptyInput(DataError):
    """A metric was given nothing to score."""


class EmptyReference(DataError):
    """A BLEU reference has no tokens."""


class ReferenceTooShort(DataError):
    """The ROUGE-N reference has fewer than n tokens."""


class Tokenizer(str, Enum):
    CHAR = "char"
    WORD = "word"


def char_tokens(text: str) -> TokenSeq:
    """One token per character once whitespace is removed."""
    return list(_WHITESPACE.sub("", text))


def word_tokens(text: str) -> TokenSeq:
    """Han characters one by one, every other run split on whitespace."""
    return _WORD.findall(text)


TOKENIZERS: dict[Tokenizer, Callable[[str], TokenSeq]] = {
    Tokenizer.CHAR: char_tokens,
    Tokenizer.WORD: word_tokens,
}


def tokenize(text: str, tokenizer: Tokenizer = Tokenizer.CHAR) -> TokenSeq:
    return TOKENIZERS[Tokenizer(tokenizer)](text)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


@dataclass
class BleuComponents:
    """Everything that goes into a corpus BLEU-4 score."""

    precisions: list[float]
    matches: list[int]
    totals: list[int]
    bp: float
    candidate_len: int
    reference_len: int
    score: float
    weights: list[float] = field(default_factory=lambda: [0.25] * 4)


def bleu4(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    weights: Sequence[float] = (0.25, 0.25, 0.25, 0.25),
) -> BleuComponents:
    """
    Corpus-level BLEU-4 without smoothing.

    Clipped and total n-gram counts are summed over all pairs before the
    precisions are formed. Any zero precision makes the score 0.

    Args:
        pairs: (candidate tokens, reference tokens) pairs
        weights: n-gram weights, summing to 1

    Returns:
        BleuComponents with score in [0, 100]
    """
    if not pairs:
        raise EmptyInput("bleu4 needs at least one pair")
    if len(weights) != 4 or not math.isclose(sum(weights), 1.0):
        raise ValueError("bleu4 needs four weights summing to 1")

    matches = [0] * 4
    totals = [0] * 4
    c = r = 0
    for candidate, reference in pairs:
        if not reference:
            raise EmptyReference("bleu4 reference is empty")
        c += len(candidate)
        r += len(reference)
        for n in range(1, 5):
            cand, ref = ngrams(candidate, n), ngrams(reference, n)
            matches[n - 1] += sum(min(count, ref[gram]) for gram, count in cand.items())
            totals[n - 1] += max(len(candidate) - n + 1, 0)

    precisions = [m / t if t else 0.0 for m, t in zip(matches, totals)]
    if c == 0:
        bp = 0.0
    else:
        bp = 1.0 if c > r else math.exp(1 - r / c)
    if min(precisions) == 0.0:
        score = 0.0
    else:
        score = bp * math.exp(sum(w * math.log(p) for w, p in zip(weights, precisions))) * 100
    return BleuComponents(
        precisions=precisions,
        matches=matches,
        totals=totals,
        bp=bp,
        candidate_len=c,
        reference_len=r,
        score=score,
        weights=list(weights),
    )


def _prf(overlap: int, cand_total: int, ref_total: int) -> tuple[float, float, float]:
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def rouge_n(
    candidate: Sequence[str],
    reference: Sequence[str],
    n: int = 1,
) -> tuple[float, float, float]:
    """(precision, recall, f1) over clipped n-gram overlap."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(reference) < n:
        raise ReferenceTooShort(f"reference has {len(reference)} tokens, rouge-{n} needs {n}")
    cand, ref = ngrams(candidate, n), ngrams(reference, n)
    overlap = sum((cand & ref).values())
    return _prf(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, two-row dynamic programming."""
    if len(a) < len(b):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            current.append(previous[j - 1] + 1 if x == y else max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> tuple[float, float, float]:
    """(precision, recall, f1) from the LCS, with beta = 1."""
    if not candidate or not reference:
        raise EmptyInput("rouge_l needs non-empty candidate and reference")
    return _prf(lcs_length(candidate, reference), len(candidate), len(reference))
