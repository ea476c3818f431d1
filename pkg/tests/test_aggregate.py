import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectsift.aggregate import (
    ForestConfig,
    RandomForest,
    ScoreMap,
    Tree,
    WeightedScorer,
    evaluate,
    fit_score_map,
    rf_predict,
    rf_train,
    roc_auc,
    train_threshold,
    train_weighted,
    weighted_score,
)
from defectsift.errors import DimensionMismatch, IndexOutOfRegistry, LengthMismatch, SingleClassTraining



class ConstMap:
    """Score map returning its input unchanged, so S_i equals the feature value."""

    def __call__(self, x):
        return np.asarray(x, dtype=float)


def scorer(weights, maps=None):
    k = len(weights)
    return WeightedScorer(tuple(range(k)), tuple(weights), tuple(maps or [ConstMap()] * k))


def leaf_tree(cls):
    t = Tree()
    t._add(leaf_class=cls)
    return t


def gaussian_task(n, d, gap, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    X = rng.normal(size=(n, d)) + gap * y[:, None]
    return X, y


class TestWeighted:
    def test_single_identity(self):
        assert weighted_score(scorer([1.0]), np.array([0.7])) == pytest.approx(0.7)

    def test_convex(self):
        assert weighted_score(scorer([0.5, 0.5]), np.array([0.0, 1.0])) == pytest.approx(0.5)

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            scorer([0.5, 0.6])
        with pytest.raises(ValueError):
            scorer([1.5, -0.5])

    def test_index_out_of_registry(self):
        s = WeightedScorer((5,), (1.0,), (ConstMap(),))
        with pytest.raises(IndexOutOfRegistry):
            weighted_score(s, np.zeros(3))

    @settings(max_examples=60)
    @given(st.lists(st.floats(0.01, 1), min_size=1, max_size=6), st.data())
    def test_bounds_and_monotone(self, raw, data):
        w = np.array(raw) / np.sum(raw)
        k = len(raw)
        maps = [ScoreMap(0.0, "above", 1.0)] * k
        s = scorer(list(w), maps)
        x = np.array(data.draw(st.lists(st.floats(-20, 20), min_size=k, max_size=k)))
        v = weighted_score(s, x)
        comps = 1 / (1 + np.exp(-x))
        assert comps.min() - 1e-12 <= v <= comps.max() + 1e-12
        j = data.draw(st.integers(0, k - 1))
        x2 = x.copy()
        x2[j] += 1.0
        assert weighted_score(s, x2) >= v - 1e-15

    def test_matrix_matches_rows(self, rng):
        s = scorer([0.2, 0.8], [ScoreMap(0.0, "above", 1.0), ScoreMap(1.0, "below", 2.0)])
        X = rng.normal(size=(7, 2))
        assert np.allclose(weighted_score(s, X), [weighted_score(s, r) for r in X])

    def test_training(self, rng):
        X, y = gaussian_task(400, 3, 2.0, 3)
        X[:, 2] = rng.normal(size=400)  # noise column
        s = train_weighted(X, y, [0, 1, 2])
        assert sum(s.weights) == pytest.approx(1.0)
        assert s.weights[2] < min(s.weights[:2])
        scores = weighted_score(s, X)
        assert roc_auc(scores, y) > 0.9
        assert WeightedScorer.from_dict(json.loads(json.dumps(s.to_dict()))) == s


class TestScoreMap:
    def test_direction_and_center(self):
        m, ba = fit_score_map([2.0, 3.0], [0.0, 1.0])
        assert ba == 1.0 and m.theta == 1.5
        assert m(1.5) == 0.5 and m(3.0) > 0.5 > m(0.0)
        m2, _ = fit_score_map([0.0, 1.0], [2.0, 3.0])
        assert m2(0.0) > 0.5 > m2(3.0)

    def test_threshold_model(self):
        X = np.array([[0.0, 5.0], [1.0, 6.0], [2.0, 0.0], [3.0, 1.0]])
        y = np.array([0, 0, 1, 1])
        tm = train_threshold(X, y, 0)
        cls, s = tm.predict(X)
        assert list(cls) == [0, 0, 1, 1]
        assert np.all((s > 0.5) == (cls == 1))
        with pytest.raises(SingleClassTraining):
            train_threshold(X, np.ones(4), 0)


class TestForest:
    def test_separable(self):
        X = np.array([[0.0], [0.1], [0.2], [0.9], [1.0], [1.1]] * 5)
        y = np.array([0, 0, 0, 1, 1, 1] * 5)
        f = rf_train(X, y, ForestConfig(n_trees=15, seed=1))
        cls, _ = rf_predict(f, X)
        assert np.all(cls == y)

    def test_deterministic(self):
        X, y = gaussian_task(200, 4, 1.0, 0)
        cfg = ForestConfig(n_trees=10, seed=7)
        a, b = rf_train(X, y, cfg), rf_train(X, y, cfg)
        assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
        c = rf_train(X, y, ForestConfig(n_trees=10, seed=8))
        assert json.dumps(a.to_dict()) != json.dumps(c.to_dict())

    def test_oob_gaussian(self):
        X, y = gaussian_task(1000, 5, 2.0, 11)
        f = rf_train(X, y, ForestConfig(n_trees=100, seed=0))
        assert f.oob_accuracy >= 0.80

    def test_tie_goes_to_defect(self):
        f = RandomForest([leaf_tree(0), leaf_tree(1)], 1, ForestConfig(n_trees=2))
        assert rf_predict(f, np.array([0.0])) == (1, 0.5)

    @pytest.mark.parametrize("t", [1, 2, 3, 4, 5, 7, 10])
    def test_vote_grid(self, t):
        for k in range(t + 1):
            f = RandomForest([leaf_tree(1)] * k + [leaf_tree(0)] * (t - k), 1, ForestConfig(n_trees=t))
            cls, s = rf_predict(f, np.array([0.0]))
            assert s == pytest.approx(k / t)
            assert cls == int(2 * k >= t)

    @settings(max_examples=40)
    @given(st.lists(st.integers(0, 1), min_size=1, max_size=25))
    def test_majority_vote(self, votes):
        f = RandomForest([leaf_tree(v) for v in votes], 1, ForestConfig(n_trees=len(votes)))
        cls, s = rf_predict(f, np.array([3.0]))
        assert cls == (1 if 2 * sum(votes) >= len(votes) else 0)

    def test_dimension_mismatch(self):
        X, y = gaussian_task(50, 3, 1.0, 0)
        f = rf_train(X, y, ForestConfig(n_trees=3))
        with pytest.raises(DimensionMismatch):
            rf_predict(f, np.zeros(4))

    def test_single_class(self):
        with pytest.raises(SingleClassTraining):
            rf_train(np.zeros((5, 2)), np.ones(5))

    def test_round_trip(self):
        X, y = gaussian_task(120, 3, 1.0, 4)
        f = rf_train(X, y, ForestConfig(n_trees=8, seed=2))
        g = RandomForest.from_dict(json.loads(json.dumps(f.to_dict())))
        assert g.to_dict() == f.to_dict()
        assert np.array_equal(rf_predict(f, X)[1], rf_predict(g, X)[1])

    def test_min_leaf_and_depth(self):
        X, y = gaussian_task(300, 2, 0.5, 5)
        f = rf_train(X, y, ForestConfig(n_trees=5, max_depth=2, min_leaf=10, seed=3))
        for t in f.trees:
            assert len(t.feature) <= 7
            leaves = t.predict(X)
            assert set(leaves) <= {0, 1}


class TestEvaluate:
    def test_perfect(self):
        m = evaluate([1, 1, 0, 0], [0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert m["accuracy"] == m["precision"] == m["recall"] == m["f1"] == m["roc_auc"] == 1.0
        assert m["confusion"] == {"tp": 2, "fp": 0, "tn": 2, "fn": 0}

    def test_inverted_auc(self, rng):
        s = rng.random(50)
        y = rng.integers(0, 2, 50)
        assert roc_auc(-s, y) == pytest.approx(1 - roc_auc(s, y))

    def test_random_auc(self):
        rng = np.random.default_rng(0)
        assert abs(roc_auc(rng.random(10_000), rng.integers(0, 2, 10_000)) - 0.5) < 0.02

    def test_single_class_auc(self):
        assert roc_auc([0.1, 0.9], [1, 1]) == 0.5

    def test_ties_auc(self):
        assert roc_auc([0.5, 0.5], [1, 0]) == 0.5

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=40))
    def test_accuracy_identity(self, pairs):
        p, y = map(np.array, zip(*pairs))
        m = evaluate(p, p.astype(float), y)
        c = m["confusion"]
        assert c["tp"] + c["fp"] + c["tn"] + c["fn"] == len(pairs)
        assert m["accuracy"] == pytest.approx((c["tp"] + c["tn"]) / len(pairs))

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            evaluate([1, 0], [0.5], [1, 0])

    def test_precision_sentinel(self):
        m = evaluate([0, 0], [0.1, 0.2], [1, 0])
        assert m["precision"] == 0.0 and m["f1"] == 0.0
