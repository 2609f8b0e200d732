import numpy as np
import pytest

from weaklab.ensemble import (
    EnsembleConfig,
    InfoTypeWeightTable,
    PriorityLevel,
    TriagePrediction,
    build_weight_table,
    combine_priority,
    map_score_to_level,
    merge_info_types,
    merge_predictions,
    merge_priorities,
    prediction_from_json,
    prediction_to_json,
)

LEVELS = list(PriorityLevel)


def _pred(types, priority, doc_id="d"):
    return TriagePrediction(document_id=doc_id, info_types=frozenset(types), priority=priority)


class TestScoreLevelMapping:
    def test_schema_values(self):
        assert PriorityLevel.CRITICAL.score == 1.0
        assert PriorityLevel.HIGH.score == 0.75
        assert PriorityLevel.MEDIUM.score == 0.5
        assert PriorityLevel.LOW.score == 0.25

    def test_boundary_075_is_critical(self):
        assert map_score_to_level(0.75) is PriorityLevel.CRITICAL

    def test_bottom_band(self):
        assert map_score_to_level(0.0) is PriorityLevel.LOW

    def test_mid_boundaries_belong_to_higher_level(self):
        assert map_score_to_level(0.5) is PriorityLevel.HIGH
        assert map_score_to_level(0.25) is PriorityLevel.MEDIUM

    def test_round_trip_on_level_scores(self):
        # Band convention: upper boundary goes to the higher level, so exact
        # level scores of High/Medium/Low map one band up.
        assert map_score_to_level(PriorityLevel.CRITICAL.score) is PriorityLevel.CRITICAL
        assert map_score_to_level(0.74) is PriorityLevel.HIGH
        assert map_score_to_level(0.49) is PriorityLevel.MEDIUM
        assert map_score_to_level(0.24) is PriorityLevel.LOW

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            map_score_to_level(1.1)


class TestWeightTable:
    def test_constant_mean(self):
        table = build_weight_table([({1}, PriorityLevel.CRITICAL), ({1}, PriorityLevel.CRITICAL)])
        assert table.weight(1) == 1.0

    def test_hand_average(self):
        table = build_weight_table([({3}, PriorityLevel.HIGH), ({3}, PriorityLevel.LOW)])
        assert table.weight(3) == pytest.approx(0.5)

    def test_unseen_type_default(self):
        table = build_weight_table([({1}, PriorityLevel.HIGH)])
        assert table.weight(99) == 0.25

    def test_weights_bounded_by_level_scores(self):
        rng = np.random.default_rng(0)
        training = [
            (set(rng.integers(0, 10, size=rng.integers(1, 4)).tolist()),
             LEVELS[int(rng.integers(0, 4))])
            for _ in range(200)
        ]
        table = build_weight_table(training)
        assert all(0.25 <= w <= 1.0 for w in table.weights.values())

    def test_empty_training_rejected(self):
        with pytest.raises(ValueError):
            build_weight_table([])


class TestCombinePriority:
    def test_lambda_one_uses_model_priority_only(self):
        table = InfoTypeWeightTable(weights={1: 0.3})
        assert combine_priority({1}, table, PriorityLevel.HIGH, 1.0) == 0.75

    def test_lambda_zero_uses_table_only(self):
        table = InfoTypeWeightTable(weights={1: 0.3, 2: 0.7})
        assert combine_priority({1, 2}, table, PriorityLevel.CRITICAL, 0.0) == pytest.approx(0.5)

    def test_default_lambda_equal_contribution(self):
        table = InfoTypeWeightTable(weights={1: 0.5})
        assert combine_priority({1}, table, PriorityLevel.CRITICAL, 0.5) == pytest.approx(0.75)

    def test_empty_type_set_uses_default_weight(self):
        table = InfoTypeWeightTable(weights={1: 0.9})
        assert combine_priority(set(), table, PriorityLevel.LOW, 0.0) == 0.25

    def test_monotone_in_both_arguments(self):
        for lam in (0.25, 0.5, 0.75):
            prev = -1.0
            for w in (0.25, 0.5, 0.75, 1.0):
                val = (1 - lam) * w + lam * 0.5
                assert val > prev
                prev = val
            low = combine_priority({1}, InfoTypeWeightTable(weights={1: 0.5}),
                                   PriorityLevel.LOW, lam)
            high = combine_priority({1}, InfoTypeWeightTable(weights={1: 0.5}),
                                    PriorityLevel.CRITICAL, lam)
            assert high > low


class TestMergeInfoTypes:
    def test_union(self):
        merged = merge_info_types([_pred({0, 1}, PriorityLevel.LOW),
                                   _pred({1, 2}, PriorityLevel.LOW)], "union")
        assert merged == {0, 1, 2}

    def test_intersection(self):
        merged = merge_info_types([_pred({0, 1}, PriorityLevel.LOW),
                                   _pred({1, 2}, PriorityLevel.LOW)], "intersection")
        assert merged == {1}

    def test_single_predictor_identity(self):
        p = _pred({4, 7}, PriorityLevel.HIGH)
        assert merge_info_types([p], "union") == {4, 7}
        assert merge_info_types([p], "intersection") == {4, 7}

    def test_membership_properties_random(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            preds = [
                _pred(set(rng.integers(0, 8, size=rng.integers(0, 5)).tolist()),
                      PriorityLevel.LOW)
                for _ in range(int(rng.integers(1, 5)))
            ]
            union = merge_info_types(preds, "union")
            inter = merge_info_types(preds, "intersection")
            for p in preds:
                assert p.info_types <= union
                assert inter <= p.info_types


class TestMergePriorities:
    def test_highest(self):
        preds = [_pred(set(), PriorityLevel.HIGH), _pred(set(), PriorityLevel.LOW)]
        assert merge_priorities(preds, "highest") is PriorityLevel.HIGH

    def test_average_maps_back_through_bands(self):
        preds = [_pred(set(), PriorityLevel.CRITICAL), _pred(set(), PriorityLevel.MEDIUM)]
        # mean score 0.75 -> Critical under the inclusive upper boundary
        assert merge_priorities(preds, "average") is PriorityLevel.CRITICAL

    def test_lowest(self):
        preds = [_pred(set(), PriorityLevel.LOW)] * 3
        assert merge_priorities(preds, "lowest") is PriorityLevel.LOW

    def test_ordering_property_random(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            preds = [_pred(set(), LEVELS[int(rng.integers(0, 4))])
                     for _ in range(int(rng.integers(1, 6)))]
            hi = merge_priorities(preds, "highest")
            avg = merge_priorities(preds, "average")
            lo = merge_priorities(preds, "lowest")
            assert hi.score >= avg.score >= lo.score

    def test_numeric_priorities_accepted(self):
        preds = [_pred(set(), 0.8), _pred(set(), 0.1)]
        assert merge_priorities(preds, "highest") is PriorityLevel.CRITICAL


class TestMergePredictions:
    def test_grouped_merge(self):
        grouped = [[
            _pred({0}, PriorityLevel.LOW, doc_id="a"),
            _pred({1}, PriorityLevel.CRITICAL, doc_id="a"),
        ]]
        out = merge_predictions(grouped, EnsembleConfig())
        assert out[0].info_types == {0, 1}
        assert out[0].priority is PriorityLevel.CRITICAL

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EnsembleConfig(info_strategy="vote")
        with pytest.raises(ValueError):
            EnsembleConfig(combine_lambda=1.5)

    def test_json_roundtrip(self):
        p = _pred({2, 5}, PriorityLevel.MEDIUM, doc_id="x1")
        assert prediction_from_json(prediction_to_json(p)) == p
        raw = _pred(set(), 0.4, doc_id="x2")
        assert prediction_from_json(prediction_to_json(raw)) == raw
