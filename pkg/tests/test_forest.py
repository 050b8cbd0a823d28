"""Tests for CART trees and seeded random forests."""

import numpy as np
import pytest

from occer_toolkit.regression.forest import LEAF, RegressionTree, build_tree, fit_forest, predict_forest
from occer_toolkit.regression.rng import make_generator


@pytest.fixture
def step_data():
    X = np.array([[0.0, 5.0], [1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    y = np.array([1.0, 1.0, 9.0, 9.0])
    return X, y


class TestTree:

    def test_single_split_at_midpoint(self, step_data):
        X, y = step_data
        tree = build_tree(X, y, max_features=2)
        assert tree.node_count == 3
        assert tree.feature[0] == 0
        assert tree.threshold[0] == 1.5
        np.testing.assert_array_equal(tree.predict(X), y)

    def test_constant_target_is_a_leaf(self):
        X = np.arange(10.0).reshape(5, 2)
        tree = build_tree(X, np.full(5, 3.0), max_features=2)
        assert tree.node_count == 1
        assert tree.feature[0] == LEAF

    def test_ties_prefer_lowest_feature(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        tree = build_tree(X, y, max_features=2)
        assert tree.feature[0] == 0

    def test_min_samples_leaf(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        tree = build_tree(X, y, max_features=3, min_samples_leaf=5)
        counts = np.bincount(tree.apply(X), minlength=tree.node_count)
        leaves = tree.feature == LEAF
        assert counts[leaves].min() >= 5

    def test_max_depth(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(64, 2))
        y = rng.normal(size=64)
        tree = build_tree(X, y, max_features=2, max_depth=1)
        assert tree.node_count == 3

    def test_predictions_within_leaf_targets(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 3))
        y = rng.normal(size=50)
        tree = build_tree(X, y, max_features=3, min_samples_leaf=4)
        query = rng.normal(size=(100, 3)) * 3
        predictions = tree.predict(query)
        assert predictions.min() >= y.min()
        assert predictions.max() <= y.max()

    def test_dict_round_trip(self, step_data):
        X, y = step_data
        tree = build_tree(X, y, max_features=2)
        restored = RegressionTree.from_dict(tree.to_dict())
        np.testing.assert_array_equal(restored.predict(X), tree.predict(X))

    def test_fully_grown_tree_interpolates(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        tree = build_tree(X, y, max_features=3)
        np.testing.assert_array_equal(tree.predict(X), y)
        internal = tree.feature != LEAF
        assert (tree.left[internal] > 0).all() and (tree.right[internal] > 0).all()

    def test_feature_subsampling_follows_generator(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(60, 4))
        y = X[:, 0] - X[:, 3] + rng.normal(scale=0.1, size=60)
        a = build_tree(X, y, max_features=2, rng=make_generator(7))
        b = build_tree(X, y, max_features=2, rng=make_generator(7))
        assert a.to_dict() == b.to_dict()


class TestForest:

    @pytest.fixture
    def data(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(-1, 1, size=(60, 4))
        y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2
        return X, y

    def test_same_seed_same_forest(self, data):
        X, y = data
        a = fit_forest(X, y, n_trees=5, max_features=2, seed=9)
        b = fit_forest(X, y, n_trees=5, max_features=2, seed=9)
        np.testing.assert_array_equal(predict_forest(a, X), predict_forest(b, X))

    def test_threads_do_not_change_result(self, data):
        X, y = data
        serial = fit_forest(X, y, n_trees=6, max_features=2, seed=1, n_jobs=1)
        threaded = fit_forest(X, y, n_trees=6, max_features=2, seed=1, n_jobs=3)
        np.testing.assert_array_equal(predict_forest(serial, X), predict_forest(threaded, X))

    def test_different_seeds_differ(self, data):
        X, y = data
        a = fit_forest(X, y, n_trees=5, max_features=2, seed=0)
        b = fit_forest(X, y, n_trees=5, max_features=2, seed=1)
        assert not np.array_equal(predict_forest(a, X), predict_forest(b, X))

    def test_predictions_bounded_by_training_targets(self, data):
        X, y = data
        trees = fit_forest(X, y, n_trees=8, max_features=4, seed=2)
        predictions = predict_forest(trees, np.random.default_rng(0).uniform(-5, 5, size=(200, 4)))
        assert predictions.min() >= y.min()
        assert predictions.max() <= y.max()


def test_generator_streams_are_independent():
    a = make_generator(42, 0).random(4)
    b = make_generator(42, 1).random(4)
    again = make_generator(42, 0).random(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, again)


def test_negative_seed_accepted():
    assert make_generator(-1).random() == make_generator(2**64 - 1).random()
