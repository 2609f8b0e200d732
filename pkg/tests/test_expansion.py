import math

import pytest

from weaklab.corpus import Dataset, Document, LabelSet, extract_ngrams
from weaklab.embedding import BuiltinProvider
from weaklab.expansion import (
    expand_labels,
    preprocess_vocabularies,
    rank_candidates,
    vocabularies_from_json,
    vocabularies_to_json,
)


def _ranked(pairs):
    return sorted(pairs, key=lambda ps: (-ps[1], ps[0]))


class TestRankCandidates:
    def test_label_itself_ranks_first(self):
        p = BuiltinProvider()
        ranked = rank_candidates("water", {"water": 3, "tent": 1, "food": 2}, p)
        assert ranked[0][0] == "water"
        assert ranked[0][1] == pytest.approx(1.0, abs=1e-6)

    def test_reproducible(self):
        p1, p2 = BuiltinProvider(seed=5), BuiltinProvider(seed=5)
        pool = {"x": 1, "y": 1, "x y": 1}
        assert rank_candidates("x", pool, p1) == rank_candidates("x", pool, p2)

    def test_min_frequency_filter(self):
        p = BuiltinProvider()
        ranked = rank_candidates("water", {"water": 5, "hapax": 1}, p, min_frequency=2)
        assert [phrase for phrase, _ in ranked] == ["water"]


class TestPreprocessVocabularies:
    def test_full_discount_when_shared_by_all(self):
        ranked = [_ranked([("common", 0.9), (f"own{i}", 0.8)]) for i in range(3)]
        vocabs, lf = preprocess_vocabularies(ranked, n=3)
        assert lf["common"] == 3
        for v in vocabs:
            shared = next(e for e in v.entries if e.phrase == "common")
            assert shared.score == 0.0

    def test_unique_phrase_discount_value(self):
        # s = 0.8 * ln(8/1)
        ranked = [_ranked([(f"p{i}", 0.8), (f"q{i}", 0.75)]) for i in range(8)]
        vocabs, _ = preprocess_vocabularies(ranked, n=8)
        assert vocabs[0].entries[0].score == pytest.approx(0.8 * math.log(8), abs=1e-9)
        assert vocabs[0].entries[0].score == pytest.approx(1.6636, abs=1e-3)

    def test_min_two_rule_pads_below_threshold(self):
        ranked = [
            _ranked([("good0", 0.9), ("weak0", 0.3), ("weaker0", 0.1)]),
            _ranked([("good1", 0.9), ("ok1", 0.8)]),
        ]
        vocabs, _ = preprocess_vocabularies(ranked, n=2)
        assert [e.phrase for e in vocabs[0].entries] == ["good0", "weak0"]

    def test_max_cap(self):
        ranked = [
            _ranked([(f"a{i:03d}", 0.9) for i in range(150)]),
            _ranked([("b", 0.9), ("c", 0.8)]),
        ]
        vocabs, _ = preprocess_vocabularies(ranked, n=2, max_k=100)
        assert vocabs[0].size == 100

    def test_tau_monotonicity(self):
        ranked = [
            _ranked([(f"a{i}", 0.5 + i * 0.05) for i in range(10)]),
            _ranked([(f"b{i}", 0.5 + i * 0.05) for i in range(10)]),
        ]
        sizes = []
        for tau in (0.5, 0.6, 0.7, 0.8, 0.9):
            vocabs, _ = preprocess_vocabularies(ranked, n=2, tau=tau)
            sizes.append([v.size for v in vocabs])
        for prev, nxt in zip(sizes, sizes[1:]):
            assert all(b <= a for a, b in zip(prev, nxt))

    def test_discount_strictly_decreases_with_lf(self):
        n = 6
        values = [0.8 * math.log(n / lf) for lf in range(1, n + 1)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] == 0.0

    def test_idempotence(self):
        ranked = [
            _ranked([("water", 0.95), ("river water", 0.8), ("low", 0.2)]),
            _ranked([("food", 0.9), ("meal", 0.85)]),
        ]
        vocabs1, _ = preprocess_vocabularies(ranked, n=2)
        re_ranked = [
            _ranked([(e.phrase, e.raw_score) for e in v.entries]) for v in vocabs1
        ]
        vocabs2, _ = preprocess_vocabularies(re_ranked, n=2)
        assert vocabs1 == vocabs2

    def test_single_label_rejected(self):
        with pytest.raises(ValueError):
            preprocess_vocabularies([[("a", 0.9), ("b", 0.8)]], n=1)

    def test_ties_broken_lexicographically(self):
        ranked = [
            _ranked([("zebra", 0.8), ("apple", 0.8), ("mango", 0.8)]),
            _ranked([("other", 0.9), ("more", 0.8)]),
        ]
        vocabs, _ = preprocess_vocabularies(ranked, n=2)
        assert [e.phrase for e in vocabs[0].entries] == ["apple", "mango", "zebra"]

    def test_negative_raw_scores_kept_as_computed(self):
        ranked = [
            _ranked([("neg0", -0.2), ("less0", -0.4)]),
            _ranked([("pos1", 0.9), ("ok1", 0.8)]),
        ]
        vocabs, _ = preprocess_vocabularies(ranked, n=2)
        assert vocabs[0].entries[0].score == pytest.approx(-0.2 * math.log(2), abs=1e-12)


class TestExpandLabels:
    def _corpus(self):
        docs = (
            Document(id="1", text="need water supply urgently"),
            Document(id="2", text="water supply truck arrived"),
            Document(id="3", text="medical help needed here"),
            Document(id="4", text="send medical help fast"),
        )
        return Dataset(
            documents=docs,
            label_set=LabelSet(("water supply", "medical help")),
            mode="single-label",
        )

    def test_deterministic_serialization(self):
        ds = self._corpus()
        index = extract_ngrams(ds)
        out = []
        for _ in range(2):
            provider = BuiltinProvider(seed=3)
            vocabs, _ = expand_labels(ds.label_set, index, provider)
            out.append(vocabularies_to_json(vocabs, ds.label_set, provider.name))
        assert out[0] == out[1]

    def test_json_roundtrip(self):
        ds = self._corpus()
        index = extract_ngrams(ds)
        provider = BuiltinProvider(seed=3)
        vocabs, _ = expand_labels(ds.label_set, index, provider)
        data = vocabularies_to_json(vocabs, ds.label_set, provider.name)
        assert vocabularies_from_json(data) == vocabs

    def test_surface_name_enters_own_vocabulary(self):
        ds = self._corpus()
        index = extract_ngrams(ds)
        vocabs, _ = expand_labels(ds.label_set, index, BuiltinProvider(seed=3))
        assert "water supply" in vocabs[0].phrases()
        assert "medical help" in vocabs[1].phrases()
