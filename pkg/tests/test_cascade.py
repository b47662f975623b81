import numpy as np
import pytest

from disdf.cascade import (
    CascadeModel,
    LevelModel,
    augment,
    augment_batch,
    predict,
    predict_batch,
    should_stop,
    train_cascade,
)
from disdf.config import TrainConfig
from disdf.data import Dataset
from disdf.errors import DataError, DegeneratePairsError, DimensionError
from disdf.forest import (
    ForestModel,
    class_vectors_batch,
    forest_tree_dists_batch,
    train_forest,
    uniform_weights,
)
from disdf.tree import COMPLETELY_RANDOM, RANDOM_SPLIT, TreeParams
from tests.test_tree import single_leaf_tree


def blobs(n=60, m=4, gap=8.0, seed=0, num_classes=2):
    """Well-separated Gaussian clusters, one per class."""
    rng = np.random.default_rng(seed)
    per = n // num_classes
    X, y = [], []
    for c in range(num_classes):
        center = np.full(m, c * gap)
        X.append(center + rng.normal(size=(per, m)))
        y.append(np.full(per, c))
    return Dataset(np.vstack(X), np.concatenate(y), num_classes)


def fast_cfg(**kw):
    base = dict(
        trees_per_forest=4,
        fw_iterations=100,
        max_levels=1,
        folds=3,
        seed=0,
    )
    base.update(kw)
    return TrainConfig(**base)


def leaf_forest(dists, n_features, num_classes):
    trees = [single_leaf_tree(d, n_features=n_features) for d in dists]
    return ForestModel(
        trees, COMPLETELY_RANDOM, uniform_weights(len(trees)), num_classes
    )


def manual_cascade(forest_dists, n_features, num_classes):
    """Single-level cascade of single-leaf forests with the given outputs."""
    forests = [leaf_forest([d], n_features, num_classes) for d in forest_dists]
    level = LevelModel(forests, input_dim=n_features)
    return CascadeModel(
        levels=[level],
        base_dim=n_features,
        num_classes=num_classes,
        mode="baseline",
        config=TrainConfig(),
    )


class TestShouldStop:
    def test_plateau_triggers_stop(self):
        assert should_stop([0.80, 0.85, 0.85], patience=1)

    def test_single_score_never_stops(self):
        assert not should_stop([0.9], patience=1)

    def test_monotone_rise_never_stops(self):
        scores = [0.5, 0.6, 0.7, 0.8, 0.9]
        for upto in range(1, len(scores) + 1):
            assert not should_stop(scores[:upto], patience=1)

    def test_patience_two(self):
        assert not should_stop([0.8, 0.8], patience=2)
        assert should_stop([0.8, 0.8, 0.8], patience=2)

    def test_tiny_improvement_does_not_count(self):
        assert should_stop([0.85, 0.85 + 5e-5], patience=1)

    def test_empty_scores_rejected(self):
        with pytest.raises(ValueError):
            should_stop([], patience=1)


class TestDimensions:
    def test_two_level_dimension_recurrence(self):
        # m=10, C=3, M=4: level 1 maps 10 -> 22, level 2 maps 22 -> 34
        ds = blobs(n=30, m=10, num_classes=3, seed=1)
        cfg = fast_cfg(mode="baseline")
        rng = np.random.default_rng(0)
        level1_forests = [
            train_forest(ds, kind, 3, TreeParams(), rng.spawn(1)[0])
            for kind in cfg.forest_kinds()
        ]
        level1 = LevelModel(level1_forests, input_dim=10)
        assert level1.output_dim == 22
        augmented = augment_batch(level1, ds.features)
        assert augmented.shape == (30, 22)
        ds2 = Dataset(augmented, ds.labels, ds.num_classes)
        level2_forests = [
            train_forest(ds2, kind, 3, TreeParams(), rng.spawn(1)[0])
            for kind in cfg.forest_kinds()
        ]
        level2 = LevelModel(level2_forests, input_dim=22)
        assert level2.output_dim == 34
        assert augment_batch(level2, augmented).shape == (30, 34)

    def test_trained_model_respects_recurrence(self):
        ds = blobs(n=36, m=5, num_classes=3, seed=2)
        model = train_cascade(ds, fast_cfg(max_levels=3, mode="baseline"))
        expected_in = ds.feature_dim
        for level in model.levels:
            assert level.input_dim == expected_in
            assert level.output_dim == expected_in + 4 * ds.num_classes
            expected_in = level.output_dim

    def test_retained_levels_match_best_score(self):
        ds = blobs(n=36, m=5, seed=3)
        model = train_cascade(ds, fast_cfg(max_levels=4))
        scores = model.level_scores
        best, best_idx = -np.inf, 0
        for i, s in enumerate(scores):
            if s > best + 1e-4:
                best, best_idx = s, i
        assert model.n_levels == best_idx + 1


class TestAugment:
    def test_single_forest_augment_values(self):
        forest = leaf_forest([[0.4, 0.4, 0.2]], n_features=5, num_classes=3).with_weights(
            [1.0]
        )
        level = LevelModel([forest], input_dim=5)
        x = np.arange(5.0)
        out = augment(level, x)
        assert out.shape == (8,)
        np.testing.assert_array_equal(out[:5], x)
        np.testing.assert_allclose(out[5:], [0.4, 0.4, 0.2])

    def test_appended_blocks_sum_to_one(self):
        ds = blobs(n=30, m=4, seed=4)
        model = train_cascade(ds, fast_cfg())
        level = model.levels[0]
        out = augment_batch(level, ds.features)
        for k in range(len(level.forests)):
            block = out[:, 4 + 2 * k : 4 + 2 * (k + 1)]
            np.testing.assert_allclose(block.sum(axis=1), 1.0, atol=1e-9)

    def test_dimension_mismatch(self):
        level = LevelModel(
            [leaf_forest([[1.0, 0.0]], n_features=3, num_classes=2)], input_dim=3
        )
        with pytest.raises(DimensionError):
            augment(level, np.zeros(4))


class TestPredict:
    def test_argmax_of_summed_class_vectors(self):
        model = manual_cascade(
            [[0.7, 0.3], [0.4, 0.6]], n_features=2, num_classes=2
        )
        assert predict(model, np.zeros(2)) == 0

    def test_exact_tie_goes_to_lowest_class(self):
        model = manual_cascade(
            [[0.5, 0.5], [0.5, 0.5]], n_features=2, num_classes=2
        )
        assert predict(model, np.zeros(2)) == 0

    def test_degenerate_single_tree_cascade(self):
        model = manual_cascade([[0.0, 0.0, 1.0]], n_features=1, num_classes=3)
        assert predict(model, np.zeros(1)) == 2

    def test_repeated_calls_agree(self):
        ds = blobs(n=30, m=3, seed=5)
        model = train_cascade(ds, fast_cfg())
        x = ds.features[7]
        assert predict(model, x) == predict(model, x)

    def test_batch_matches_single(self):
        ds = blobs(n=30, m=3, seed=6)
        model = train_cascade(ds, fast_cfg(max_levels=2, mode="baseline"))
        batch = predict_batch(model, ds.features)
        for row, expected in zip(ds.features, batch):
            assert predict(model, row) == expected

    def test_dimension_mismatch(self):
        model = manual_cascade([[1.0, 0.0]], n_features=2, num_classes=2)
        with pytest.raises(DimensionError):
            predict(model, np.zeros(3))


class TestTrainCascade:
    def test_baseline_mode_keeps_uniform_weights(self):
        ds = blobs(n=30, m=3, seed=7)
        model = train_cascade(ds, fast_cfg(mode="baseline", max_levels=2))
        for level in model.levels:
            for forest in level.forests:
                np.testing.assert_allclose(
                    forest.weights, 1.0 / forest.n_trees, atol=1e-12
                )

    def test_forest_kind_layout(self):
        ds = blobs(n=30, m=3, seed=8)
        model = train_cascade(ds, fast_cfg(mode="baseline"))
        kinds = [f.kind for f in model.levels[0].forests]
        assert kinds == [RANDOM_SPLIT, COMPLETELY_RANDOM, RANDOM_SPLIT, COMPLETELY_RANDOM]

    def test_trained_objective_never_worse_than_uniform(self):
        ds = blobs(n=48, m=4, seed=9)
        model = train_cascade(ds, fast_cfg(fw_iterations=300))
        assert model.train_info
        for level_info in model.train_info:
            for info in level_info:
                assert (
                    info["objective_trained"]
                    <= info["objective_uniform"] + 1e-9
                )

    def test_same_class_distance_not_increased_on_separable_toy(self):
        # with a small margin the hinge is inactive on separated clusters, so
        # the trained weights cannot enlarge the same-class distance term
        ds = blobs(n=48, m=4, gap=10.0, seed=10)
        cfg = fast_cfg(tau=0.1, lam=0.01, fw_iterations=500)
        model = train_cascade(ds, cfg)
        for info in model.train_info[0]:
            assert info["hinge_trained"] == 0.0
            assert info["hinge_uniform"] == 0.0
            assert (
                info["same_class_distance_trained"]
                <= info["same_class_distance_uniform"] + 1e-12
            )

    def test_single_class_training_fails_in_disdf_mode(self):
        features = np.random.default_rng(0).normal(size=(12, 3))
        ds = Dataset(features, np.zeros(12, dtype=int), 2)
        with pytest.raises(DegeneratePairsError, match="degenerate pair set"):
            train_cascade(ds, fast_cfg())

    def test_single_class_training_works_in_baseline_mode(self):
        features = np.random.default_rng(0).normal(size=(12, 3))
        ds = Dataset(features, np.zeros(12, dtype=int), 2)
        model = train_cascade(ds, fast_cfg(mode="baseline"))
        assert predict(model, features[0]) == 0

    def test_determinism(self):
        ds = blobs(n=36, m=4, seed=11)
        cfg = fast_cfg(seed=123)
        m1 = train_cascade(ds, cfg)
        m2 = train_cascade(ds, cfg)
        np.testing.assert_array_equal(
            predict_batch(m1, ds.features), predict_batch(m2, ds.features)
        )
        for l1, l2 in zip(m1.levels, m2.levels):
            for f1, f2 in zip(l1.forests, l2.forests):
                np.testing.assert_array_equal(f1.weights, f2.weights)

    def test_too_few_rows_rejected(self):
        ds = blobs(n=2, m=2, seed=12)
        with pytest.raises(DataError, match="folds"):
            train_cascade(ds, fast_cfg())

    def test_separable_data_perfectly_classified(self):
        ds = blobs(n=40, m=3, gap=12.0, seed=13)
        model = train_cascade(ds, fast_cfg(trees_per_forest=6))
        assert (predict_batch(model, ds.features) == ds.labels).all()

    def test_baseline_class_vectors_equal_tree_means(self):
        ds = blobs(n=30, m=3, seed=14)
        model = train_cascade(ds, fast_cfg(mode="baseline"))
        X = ds.features[:5]
        for forest in model.levels[0].forests:
            means = forest_tree_dists_batch(forest, X).mean(axis=1)
            np.testing.assert_allclose(
                class_vectors_batch(forest, X), means, atol=1e-12
            )
