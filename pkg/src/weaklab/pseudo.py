"""Pseudo-label assignment: cumulative vocabulary matching against the
unlabelled corpus, thresholded at epsilon."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import Dataset, NGramIndex
from .expansion import LabelVocabulary

HALVING_VOCAB_SIZE = 10


@dataclass(frozen=True)
class PseudoLabeledExample:
    document_id: str
    assigned_labels: frozenset[int]
    scores: tuple[float, ...]


def match_score(doc_ngrams: frozenset[str] | set[str], vocab: LabelVocabulary) -> float:
    """Sum of discounted scores over vocabulary phrases present in the document.

    Set membership: a phrase counts once regardless of repetition.
    """
    return sum(e.score for e in vocab.entries if e.phrase in doc_ngrams)


def compute_epsilon(vocabularies: list[LabelVocabulary], n: int) -> float:
    """ln(n), halved when the smallest vocabulary has fewer than 10 phrases."""
    if n < 2:
        raise ValueError("epsilon requires at least 2 labels")
    eps = math.log(n)
    if min(v.size for v in vocabularies) < HALVING_VOCAB_SIZE:
        eps /= 2.0
    return eps


def pseudo_label_corpus(
    dataset: Dataset,
    index: NGramIndex,
    vocabularies: list[LabelVocabulary],
    mode: str,
    epsilon: float | None = None,
) -> tuple[list[PseudoLabeledExample], list[str]]:
    """Assign high-confidence pseudo-labels; return (examples, residual ids).

    Single-label: a document is kept iff its maximum score strictly exceeds
    epsilon, and receives the argmax label (ties go to the lowest label id).
    Multi-label: kept iff any score strictly exceeds epsilon, receiving every
    label above it. The residual pool holds documents failing the threshold.
    """
    n = len(vocabularies)
    if epsilon is None:
        epsilon = compute_epsilon(vocabularies, n)
    examples: list[PseudoLabeledExample] = []
    residual: list[str] = []
    for doc in dataset.documents:
        grams = index.per_document[doc.id]
        scores = tuple(match_score(grams, v) for v in vocabularies)
        if mode == "single-label":
            best = max(range(n), key=lambda i: (scores[i], -i))
            if scores[best] > epsilon:
                examples.append(
                    PseudoLabeledExample(doc.id, frozenset({best}), scores)
                )
            else:
                residual.append(doc.id)
        else:
            assigned = frozenset(i for i in range(n) if scores[i] > epsilon)
            if assigned:
                examples.append(PseudoLabeledExample(doc.id, assigned, scores))
            else:
                residual.append(doc.id)
    return examples, residual
