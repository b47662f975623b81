import numpy as np
import pytest

from disdf.data import Dataset
from disdf.errors import DataError, DimensionError
from disdf.tree import (
    COMPLETELY_RANDOM,
    RANDOM_SPLIT,
    TreeModel,
    TreeParams,
    train_tree,
    tree_predict_dist,
)


def make_ds(X, y, C):
    return Dataset(np.asarray(X, dtype=float), np.asarray(y), C)


def single_leaf_tree(dist, n_features=1):
    dist = np.atleast_2d(np.asarray(dist, dtype=float))
    return TreeModel(
        kind=COMPLETELY_RANDOM,
        n_features=n_features,
        num_classes=dist.shape[1],
        feature=np.array([-1], dtype=np.int32),
        threshold=np.array([0.0]),
        left=np.array([-1], dtype=np.int32),
        right=np.array([-1], dtype=np.int32),
        dist=dist,
    )


def stump(feature, threshold, left_dist, right_dist, n_features):
    left_dist = np.asarray(left_dist, dtype=float)
    right_dist = np.asarray(right_dist, dtype=float)
    return TreeModel(
        kind=RANDOM_SPLIT,
        n_features=n_features,
        num_classes=left_dist.shape[0],
        feature=np.array([feature, -1, -1], dtype=np.int32),
        threshold=np.array([threshold, 0.0, 0.0]),
        left=np.array([1, -1, -1], dtype=np.int32),
        right=np.array([2, -1, -1], dtype=np.int32),
        dist=np.vstack([np.zeros_like(left_dist), left_dist, right_dist]),
    )


def tree_depth(tree):
    def rec(node):
        if tree.feature[node] < 0:
            return 0
        return 1 + max(rec(tree.left[node]), rec(tree.right[node]))

    return rec(0)


@pytest.mark.parametrize("kind", [RANDOM_SPLIT, COMPLETELY_RANDOM])
class TestDegenerateInputs:
    def test_single_sample_gives_one_hot_leaf(self, kind):
        ds = make_ds([[1.0, 2.0]], [1], 3)
        tree = train_tree(ds, kind, TreeParams(), np.random.default_rng(0))
        assert tree.n_nodes == 1
        np.testing.assert_allclose(tree_predict_dist(tree, [9.0, 9.0]), [0, 1, 0])

    def test_pure_node_stops_immediately(self, kind):
        ds = make_ds([[0.0], [1.0], [2.0]], [1, 1, 1], 2)
        tree = train_tree(ds, kind, TreeParams(), np.random.default_rng(0))
        assert tree.n_nodes == 1

    def test_empty_view_rejected(self, kind):
        ds = make_ds(np.empty((0, 2)), np.empty(0, dtype=int), 2)
        with pytest.raises(DataError):
            train_tree(ds, kind, TreeParams(), np.random.default_rng(0))


class TestRandomSplitSearch:
    def test_separable_data_gives_depth_one_perfect_tree(self):
        ds = make_ds([[0.0], [1.0], [10.0], [11.0]], [0, 0, 1, 1], 2)
        tree = train_tree(ds, RANDOM_SPLIT, TreeParams(), np.random.default_rng(0))
        assert tree_depth(tree) == 1
        preds = [
            int(np.argmax(tree_predict_dist(tree, row))) for row in ds.features
        ]
        assert preds == ds.labels.tolist()

    def test_threshold_is_midpoint(self):
        ds = make_ds([[0.0], [2.0]], [0, 1], 2)
        tree = train_tree(ds, RANDOM_SPLIT, TreeParams(), np.random.default_rng(0))
        assert tree.feature[0] == 0
        assert tree.threshold[0] == pytest.approx(1.0)

    def test_constant_features_give_leaf(self):
        ds = make_ds([[3.0], [3.0], [3.0]], [0, 1, 0], 2)
        tree = train_tree(ds, RANDOM_SPLIT, TreeParams(), np.random.default_rng(0))
        assert tree.n_nodes == 1
        np.testing.assert_allclose(tree.dist[0], [2 / 3, 1 / 3])

    def test_max_depth_cap(self):
        rng = np.random.default_rng(1)
        ds = make_ds(rng.normal(size=(64, 3)), rng.integers(2, size=64), 2)
        tree = train_tree(ds, RANDOM_SPLIT, TreeParams(max_depth=2), rng)
        assert tree_depth(tree) <= 2

    def test_min_leaf_stops_growth(self):
        ds = make_ds([[0.0], [1.0], [2.0], [3.0]], [0, 1, 0, 1], 2)
        tree = train_tree(
            ds, RANDOM_SPLIT, TreeParams(min_leaf=5), np.random.default_rng(0)
        )
        assert tree.n_nodes == 1


class TestCompletelyRandom:
    def test_thresholds_inside_node_range(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(-5, 5, size=(80, 4))
        ds = make_ds(X, rng.integers(3, size=80), 3)
        tree = train_tree(ds, COMPLETELY_RANDOM, TreeParams(), rng)
        internal = tree.feature >= 0
        f = tree.feature[internal]
        assert np.all(tree.threshold[internal] >= X[:, f].min(axis=0))
        assert np.all(tree.threshold[internal] < X[:, f].max(axis=0))

    def test_constant_features_give_leaf(self):
        ds = make_ds([[7.0, 7.0], [7.0, 7.0]], [0, 1], 2)
        tree = train_tree(ds, COMPLETELY_RANDOM, TreeParams(), np.random.default_rng(0))
        assert tree.n_nodes == 1


class TestPrediction:
    def test_single_leaf_returns_distribution_for_any_input(self):
        tree = single_leaf_tree([0.4, 0.4, 0.2])
        for x in ([0.0], [100.0], [-3.5]):
            np.testing.assert_allclose(tree_predict_dist(tree, x), [0.4, 0.4, 0.2])

    def test_tie_at_threshold_routes_left(self):
        tree = stump(0, 1.0, [1.0, 0.0], [0.0, 1.0], n_features=1)
        np.testing.assert_allclose(tree_predict_dist(tree, [1.0]), [1.0, 0.0])
        np.testing.assert_allclose(tree_predict_dist(tree, [1.0 + 1e-12]), [0.0, 1.0])

    def test_distributions_sum_to_one_property(self):
        rng = np.random.default_rng(7)
        ds = make_ds(rng.normal(size=(60, 5)), rng.integers(4, size=60), 4)
        tree = train_tree(ds, RANDOM_SPLIT, TreeParams(), rng)
        X = rng.normal(size=(1000, 5))
        sums = tree.predict_dist_batch(X).sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-9)
        assert tree.predict_dist_batch(X).min() >= 0.0

    def test_batch_matches_single(self):
        rng = np.random.default_rng(11)
        ds = make_ds(rng.normal(size=(40, 3)), rng.integers(2, size=40), 2)
        tree = train_tree(ds, COMPLETELY_RANDOM, TreeParams(), rng)
        X = rng.normal(size=(25, 3))
        batch = tree.predict_dist_batch(X)
        for row, expected in zip(X, batch):
            np.testing.assert_array_equal(tree_predict_dist(tree, row), expected)

    def test_dimension_mismatch(self):
        tree = single_leaf_tree([1.0, 0.0], n_features=2)
        with pytest.raises(DimensionError):
            tree_predict_dist(tree, [1.0])
        with pytest.raises(DimensionError):
            tree.predict_dist_batch(np.zeros((3, 5)))


class TestDeterminism:
    @pytest.mark.parametrize("kind", [RANDOM_SPLIT, COMPLETELY_RANDOM])
    def test_same_seed_same_structure(self, kind):
        rng = np.random.default_rng(12)
        ds = make_ds(rng.normal(size=(50, 6)), rng.integers(3, size=50), 3)
        t1 = train_tree(ds, kind, TreeParams(), np.random.default_rng(99))
        t2 = train_tree(ds, kind, TreeParams(), np.random.default_rng(99))
        np.testing.assert_array_equal(t1.feature, t2.feature)
        np.testing.assert_array_equal(t1.threshold, t2.threshold)
        np.testing.assert_array_equal(t1.left, t2.left)
        np.testing.assert_array_equal(t1.right, t2.right)
        np.testing.assert_array_equal(t1.dist, t2.dist)


class TestTreeShape:
    def test_proper_binary_tree(self):
        rng = np.random.default_rng(21)
        ds = make_ds(rng.normal(size=(70, 4)), rng.integers(3, size=70), 3)
        tree = train_tree(ds, RANDOM_SPLIT, TreeParams(), rng)
        internal = np.nonzero(tree.feature >= 0)[0]
        children = np.concatenate([tree.left[internal], tree.right[internal]])
        # every non-root node appears exactly once as a child
        assert sorted(children.tolist()) == list(range(1, tree.n_nodes))

    def test_leaf_distributions_valid(self):
        rng = np.random.default_rng(22)
        ds = make_ds(rng.normal(size=(30, 2)), rng.integers(2, size=30), 2)
        tree = train_tree(ds, COMPLETELY_RANDOM, TreeParams(), rng)
        leaves = tree.feature < 0
        np.testing.assert_allclose(tree.dist[leaves].sum(axis=1), 1.0, atol=1e-9)
        assert tree.dist[leaves].min() >= 0.0
