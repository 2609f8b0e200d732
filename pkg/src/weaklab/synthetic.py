"""Synthetic zero-shot benchmark: labelled topics with disjoint token pools.

Used by the acceptance suite and shipped as a repo fixture generator. Each
label has a three-token surface name whose anchor tokens appear contiguously
(in random order) in that label's documents, amid topic fillers and shared
neutral tokens. Vocabulary matching therefore fires on anchor bigrams in any
order, while exact surface-name matching only catches the canonical order.
"""

from __future__ import annotations

import numpy as np

from .corpus import Dataset, Document, LabelSet

LABEL_NAMES = ("clean water supply", "medical doctor help", "food grain shortage")

_FILLERS = {
    0: ["river", "pipe", "tank", "bottle", "pump", "well", "tap", "flow",
        "drink", "liter", "reservoir", "bucket"],
    1: ["nurse", "clinic", "injury", "bandage", "patient", "hospital",
        "wound", "ambulance", "surgery", "fever", "medicine", "vaccine"],
    2: ["rice", "bread", "hunger", "meal", "crop", "harvest", "ration",
        "kitchen", "famine", "cooking", "flour", "wheat"],
}

# Topic-neutral tokens shared by all labels; they blur the embedding-space
# separation so classifier quality depends on training-set size.
_COMMON = ["please", "urgent", "area", "people", "today", "city", "street",
           "report", "need", "still", "many", "here", "now", "town"]


def make_benchmark(
    seed: int,
    n_unlabelled: int = 300,
    n_test: int = 300,
) -> tuple[Dataset, Dataset]:
    """Generate (corpus, test set) for one seed.

    The corpus is treated as unlabelled by the pipeline; its gold labels are
    carried only so pseudo-label precision can be measured.
    """
    rng = np.random.default_rng(seed)
    label_set = LabelSet(LABEL_NAMES)

    def make_docs(count: int, prefix: str) -> list[Document]:
        docs = []
        for i in range(count):
            label = int(rng.integers(0, len(LABEL_NAMES)))
            anchors = LABEL_NAMES[label].split()
            fillers = _FILLERS[label]
            tokens = [fillers[int(j)] for j in rng.integers(0, len(fillers), size=5)]
            tokens += [_COMMON[int(j)] for j in rng.integers(0, len(_COMMON), size=6)]
            rng.shuffle(tokens)
            # Contiguous anchor run in a random order.
            run = list(anchors)
            rng.shuffle(run)
            pos = int(rng.integers(0, len(tokens) + 1))
            tokens[pos:pos] = run
            docs.append(
                Document(
                    id=f"{prefix}{i}",
                    text=" ".join(tokens),
                    gold_labels=frozenset({label}),
                )
            )
        return docs

    corpus = Dataset(
        documents=tuple(make_docs(n_unlabelled, "u")),
        label_set=label_set,
        mode="single-label",
    )
    test = Dataset(
        documents=tuple(make_docs(n_test, "t")),
        label_set=label_set,
        mode="single-label",
    )
    return corpus, test
