"""TF-IDF cosine similarity between aligned predicted and gold texts."""

from typing import Sequence

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.preprocessing import normalize

from .classification import LengthMismatch
from .generation import EmptyInput, Tokenizer, tokenize


def fit_tfidf(texts: Sequence[str], tokenizer: Tokenizer = Tokenizer.CHAR):
    """
    Raw-count tf with idf = ln((1 + N) / (1 + df)) + 1 over texts.

    Returns:
        (sparse matrix, fitted vectorizer); rows are unnormalized
    """
    vectorizer = TfidfVectorizer(
        analyzer=lambda text: tokenize(text, tokenizer),
        smooth_idf=True,
        sublinear_tf=False,
        norm=None,
        lowercase=False,
    )
    return vectorizer.fit_transform(texts), vectorizer


def tfidf_cosine(
    pred_texts: Sequence[str],
    gold_texts: Sequence[str],
    tokenizer: Tokenizer = Tokenizer.CHAR,
) -> list[float]:
    """
    Per-pair cosine similarity, vocabulary and idf built over pred and gold together.

    Pairs with identical token sequences score exactly 1, two empty texts
    included. Otherwise a zero vector scores 0.
    """
    if len(pred_texts) != len(gold_texts):
        raise LengthMismatch(f"{len(pred_texts)} predictions vs {len(gold_texts)} gold texts")
    if not pred_texts:
        raise EmptyInput("tfidf_cosine needs at least one pair")

    n = len(pred_texts)
    identical = np.array(
        [tokenize(p, tokenizer) == tokenize(g, tokenizer) for p, g in zip(pred_texts, gold_texts)]
    )
    if identical.all():
        return [1.0] * n

    matrix, _ = fit_tfidf(list(pred_texts) + list(gold_texts), tokenizer)
    unit = normalize(matrix, norm="l2", axis=1)
    sims = np.asarray(unit[:n].multiply(unit[n:]).sum(axis=1)).ravel()
    sims = np.clip(sims, 0.0, 1.0)
    sims[identical] = 1.0
    return [float(s) for s in sims]
