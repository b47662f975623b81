"""Forests of decision trees with per-tree weights on the unit simplex."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .errors import DataError, DimensionError
from .tree import RANDOM_SPLIT, TreeModel, TreeParams, train_tree

SIMPLEX_TOL = 1e-6


def uniform_weights(n_trees: int) -> np.ndarray:
    return np.full(n_trees, 1.0 / n_trees)


def check_weights(w, n_trees: int, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate a weight vector: right length, non-negative, sums to one."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (n_trees,):
        raise DimensionError(f"expected {n_trees} weights, got shape {w.shape}")
    if w.min() < -tol or abs(w.sum() - 1.0) > tol:
        raise ValueError(
            f"weights are off the unit simplex: min {w.min():.3g}, sum {w.sum():.6g}"
        )
    return w


@dataclass
class ForestModel:
    """A bag of trees of one kind plus a weight vector on the unit simplex."""

    trees: list[TreeModel]
    kind: str
    weights: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.weights = check_weights(self.weights, len(self.trees))

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    def with_weights(self, w) -> "ForestModel":
        return replace(self, weights=check_weights(w, self.n_trees))


def train_forest(
    ds: Dataset,
    kind: str,
    n_trees: int,
    params: TreeParams,
    rng: np.random.Generator,
) -> ForestModel:
    """Train ``n_trees`` trees and initialize weights uniformly.

    Random-split-search trees each see a bootstrap resample; completely-random
    trees see the full data.  Each tree gets its own spawned rng stream, so
    training is reproducible tree by tree.
    """
    if n_trees < 1:
        raise ValueError(f"need at least one tree, got {n_trees}")
    if ds.n == 0:
        raise DataError("cannot train a forest on an empty dataset")
    trees = []
    for tree_rng in rng.spawn(n_trees):
        if kind == RANDOM_SPLIT:
            idx = tree_rng.integers(0, ds.n, size=ds.n)
            view = ds.subset(idx)
        else:
            view = ds
        trees.append(train_tree(view, kind, params, tree_rng))
    return ForestModel(trees, kind, uniform_weights(n_trees), ds.num_classes)


def forest_tree_dists(forest: ForestModel, x: np.ndarray) -> np.ndarray:
    """Per-tree class distributions for one input, shape (T, C)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (forest.n_features,):
        raise DimensionError(
            f"expected a length-{forest.n_features} vector, got shape {x.shape}"
        )
    return forest_tree_dists_batch(forest, x[None, :])[0]


def forest_tree_dists_batch(forest: ForestModel, X: np.ndarray) -> np.ndarray:
    """Per-tree class distributions for each row of X, shape (n, T, C)."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty((X.shape[0], forest.n_trees, forest.num_classes))
    for t, tree in enumerate(forest.trees):
        out[:, t, :] = tree.predict_dist_batch(X)
    return out


def forest_class_vector(forest: ForestModel, x: np.ndarray, w) -> np.ndarray:
    """Weighted class vector v_c = sum_t p_c^(t) w_t; a probability vector."""
    w = check_weights(w, forest.n_trees)
    return w @ forest_tree_dists(forest, x)


def class_vectors_batch(
    forest: ForestModel, X: np.ndarray, w: np.ndarray | None = None
) -> np.ndarray:
    """Weighted class vectors for each row of X, shape (n, C).

    Uses the forest's trained weights when ``w`` is omitted.
    """
    w = forest.weights if w is None else check_weights(w, forest.n_trees)
    dists = forest_tree_dists_batch(forest, X)
    return np.einsum("ntc,t->nc", dists, w)
