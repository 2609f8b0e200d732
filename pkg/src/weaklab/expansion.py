"""Label expansion: rank corpus n-grams against label names, then threshold,
cap, and apply cross-label discounting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .corpus import LabelSet, NGramIndex, normalize_text
from .embedding import EmbeddingProvider, cosine, embed_batch

DEFAULT_TAU = 0.7
MIN_VOCAB = 2
MAX_VOCAB = 100
# Rare-ngram candidate filter kicks in above this corpus size.
RARE_FILTER_CORPUS_SIZE = 10_000


@dataclass(frozen=True)
class VocabEntry:
    phrase: str
    raw_score: float  # cosine against the label name, in [-1, 1]
    score: float  # raw_score * ln(n / LF(phrase))


@dataclass(frozen=True)
class LabelVocabulary:
    label_id: int
    entries: tuple[VocabEntry, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def phrases(self) -> set[str]:
        return {e.phrase for e in self.entries}


def rank_candidates(
    label_name: str,
    pool: dict[str, int],
    provider: EmbeddingProvider,
    min_frequency: int = 1,
) -> list[tuple[str, float]]:
    """Score every pool n-gram by cosine with the label-name embedding.

    Returns the full ranked list (descending score, ties lexicographic);
    cutting happens in preprocess_vocabularies.
    """
    candidates = sorted(p for p, c in pool.items() if c >= min_frequency)
    if not candidates:
        raise ValueError("candidate pool is empty")
    label_vec = embed_batch(provider, [normalize_text(label_name)])[0]
    vectors = embed_batch(provider, candidates)
    scored = [(phrase, cosine(label_vec, vec)) for phrase, vec in zip(candidates, vectors)]
    scored.sort(key=lambda ps: (-ps[1], ps[0]))
    return scored


def preprocess_vocabularies(
    ranked: list[list[tuple[str, float]]],
    n: int,
    tau: float = DEFAULT_TAU,
    min_k: int = MIN_VOCAB,
    max_k: int = MAX_VOCAB,
) -> tuple[list[LabelVocabulary], dict[str, int]]:
    """Cut each ranked list at the score threshold, pad to min_k, cap at max_k,
    then discount phrases shared across labels: score = raw * ln(n / LF).

    The label-frequency table LF is computed over the post-cut vocabularies.
    """
    if n < 2:
        raise ValueError("discounting requires at least 2 labels")
    if len(ranked) != n:
        raise ValueError(f"expected {n} ranked lists, got {len(ranked)}")
    cut: list[list[tuple[str, float]]] = []
    for lst in ranked:
        if not lst:
            raise ValueError("every ranked list must be non-empty")
        ordered = sorted(lst, key=lambda ps: (-ps[1], ps[0]))
        kept = [ps for ps in ordered if ps[1] >= tau]
        if len(kept) < min_k:
            kept = ordered[: min(min_k, len(ordered))]
        cut.append(kept[:max_k])

    lf: dict[str, int] = {}
    for kept in cut:
        for phrase, _ in kept:
            lf[phrase] = lf.get(phrase, 0) + 1

    vocabularies = [
        LabelVocabulary(
            label_id=i,
            entries=tuple(
                VocabEntry(phrase=p, raw_score=s, score=s * math.log(n / lf[p]))
                for p, s in kept
            ),
        )
        for i, kept in enumerate(cut)
    ]
    return vocabularies, lf


def expand_labels(
    label_set: LabelSet,
    index: NGramIndex,
    provider: EmbeddingProvider,
    tau: float = DEFAULT_TAU,
    min_k: int = MIN_VOCAB,
    max_k: int = MAX_VOCAB,
    rare_filter: bool = True,
) -> tuple[list[LabelVocabulary], dict[str, int]]:
    """Full expansion pipeline for every label in the set."""
    min_freq = 2 if rare_filter and len(index.per_document) > RARE_FILTER_CORPUS_SIZE else 1
    ranked = [
        rank_candidates(name, index.global_pool, provider, min_frequency=min_freq)
        for name in label_set.names
    ]
    return preprocess_vocabularies(ranked, n=label_set.n, tau=tau, min_k=min_k, max_k=max_k)


def vocabularies_to_json(
    vocabularies: list[LabelVocabulary], label_set: LabelSet, provider_name: str
) -> dict:
    return {
        "labels": [
            {
                "id": v.label_id,
                "name": label_set.names[v.label_id],
                "entries": [
                    {"phrase": e.phrase, "raw": e.raw_score, "score": e.score}
                    for e in v.entries
                ],
            }
            for v in vocabularies
        ],
        "n": label_set.n,
        "provider": provider_name,
    }


def vocabularies_from_json(data: dict) -> list[LabelVocabulary]:
    return [
        LabelVocabulary(
            label_id=lab["id"],
            entries=tuple(
                VocabEntry(phrase=e["phrase"], raw_score=e["raw"], score=e["score"])
                for e in lab["entries"]
            ),
        )
        for lab in data["labels"]
    ]


def load_vocabulary_file(path: str) -> tuple[list[LabelVocabulary], dict]:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return vocabularies_from_json(data), data
