"""Metric implementations: generation overlap, classification, similarity, agreement."""

from .classification import (
    Comparator,
    ConfusionTally,
    DegenerateMarginals,
    EmptyTally,
    LengthMismatch,
    classification_scores,
    cohen_kappa,
    emr,
    jaccard,
)
from .generation import (
    BleuComponents,
    EmptyInput,
    EmptyReference,
    ReferenceTooShort,
    Tokenizer,
    bleu4,
    lcs_length,
    rouge_l,
    rouge_n,
    tokenize,
)
from .similarity import tfidf_cosine

__all__ = [
    "Comparator",
    "ConfusionTally",
    "DegenerateMarginals",
    "EmptyTally",
    "LengthMismatch",
    "classification_scores",
    "cohen_kappa",
    "emr",
    "jaccard",
    "BleuComponents",
    "EmptyInput",
    "EmptyReference",
    "ReferenceTooShort",
    "Tokenizer",
    "bleu4",
    "lcs_length",
    "rouge_l",
    "rouge_n",
    "tokenize",
    "tfidf_cosine",
]
