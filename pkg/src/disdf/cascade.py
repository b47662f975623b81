"""Level-by-level cascade training, feature augmentation, and prediction.

Each level holds several forests.  Every training instance's class vector is
produced out-of-fold: trees fit on folds that exclude the instance.  Those
out-of-fold per-tree distributions feed both the pairwise statistics for
weight training and the augmented features handed to the next level, while a
refit-on-all-data forest (with the trained weights attached, trees matched by
position) is what the deployed model uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MODE_DISDF, TrainConfig
from .data import Dataset, kfold_indices
from .errors import DataError, DimensionError
from .forest import (
    ForestModel,
    class_vectors_batch,
    forest_tree_dists_batch,
    train_forest,
    uniform_weights,
)
from .pairstats import compute_pair_stats
from .weightopt import ObjectiveParams, frank_wolfe, objective

IMPROVEMENT_TOL = 1e-4


@dataclass
class LevelModel:
    forests: list[ForestModel]
    input_dim: int

    @property
    def num_classes(self) -> int:
        return self.forests[0].num_classes

    @property
    def output_dim(self) -> int:
        return self.input_dim + len(self.forests) * self.num_classes


@dataclass
class CascadeModel:
    levels: list[LevelModel]
    base_dim: int
    num_classes: int
    mode: str
    config: TrainConfig
    level_scores: tuple[float, ...] = ()
    class_labels: tuple[str, ...] | None = None
    # per-level, per-forest optimizer diagnostics; not persisted
    train_info: tuple = ()

    @property
    def n_levels(self) -> int:
        return len(self.levels)


def should_stop(level_scores, patience: int) -> bool:
    """True when the best score has not improved for ``patience`` levels."""
    if len(level_scores) == 0:
        raise ValueError("need at least one recorded level score")
    if patience < 1:
        raise ValueError("patience must be >= 1")
    return len(level_scores) - 1 - _best_level(level_scores) >= patience


def _best_level(scores) -> int:
    best = -np.inf
    best_idx = 0
    for i, s in enumerate(scores):
        if s > best + IMPROVEMENT_TOL:
            best, best_idx = s, i
    return best_idx


def _hinge_total(obj: ObjectiveParams, w: np.ndarray) -> float:
    hinge = np.maximum(0.0, obj.tau - obj.q_diff @ w)
    return float(hinge @ hinge)


def _fit_forest_slot(task):
    """Fit one forest slot of a level: fold forests, refit, weight training.

    Returns the deployable forest, the out-of-fold class vectors used for
    augmentation and level scoring, and optimizer diagnostics.
    """
    (
        features,
        labels,
        num_classes,
        kind,
        n_trees,
        params,
        folds,
        mode,
        tau,
        lam,
        fw_iterations,
        pair_budget,
        fold_rngs,
        deploy_rng,
        pair_rng,
    ) = task
    n = features.shape[0]
    oof = np.empty((n, n_trees, num_classes))
    for (train_idx, hold_idx), fold_rng in zip(folds, fold_rngs):
        fold_forest = train_forest(
            Dataset(features[train_idx], labels[train_idx], num_classes),
            kind,
            n_trees,
            params,
            fold_rng,
        )
        oof[hold_idx] = forest_tree_dists_batch(fold_forest, features[hold_idx])

    deploy = train_forest(
        Dataset(features, labels, num_classes), kind, n_trees, params, deploy_rng
    )

    info = {}
    if mode == MODE_DISDF:
        stats = compute_pair_stats(oof, labels, pair_budget, pair_rng)
        obj = ObjectiveParams(stats, tau, lam)
        w_fw, gap = frank_wolfe(obj, fw_iterations)
        uniform = uniform_weights(n_trees)
        j_fw = objective(obj, w_fw)
        j_uniform = objective(obj, uniform)
        # never deploy weights worse than the uniform baseline point
        weights = w_fw if j_fw <= j_uniform else uniform
        q_same = stats.Q[stats.z == 0]
        q_diff = stats.Q[stats.z == 1]
        info = {
            "duality_gap": gap,
            "objective_trained": min(j_fw, j_uniform),
            "objective_uniform": j_uniform,
            "same_class_distance_trained": float(stats.pi @ (weights * weights)),
            "same_class_distance_uniform": float(stats.pi @ (uniform * uniform)),
            "hinge_trained": _hinge_total(obj, weights),
            "hinge_uniform": _hinge_total(obj, uniform),
            # mean out-of-fold Manhattan distances between class vectors
            "d1_same_trained": float((q_same @ weights).mean()),
            "d1_same_uniform": float((q_same @ uniform).mean()),
            "d1_diff_trained": float((q_diff @ weights).mean()),
            "d1_diff_uniform": float((q_diff @ uniform).mean()),
        }
    else:
        weights = uniform_weights(n_trees)

    deploy = deploy.with_weights(weights)
    oof_class_vectors = np.einsum("ntc,t->nc", oof, weights)
    return deploy, oof_class_vectors, info


def _train_level(features, labels, num_classes, cfg, rng, workers):
    n = features.shape[0]
    fold_rng = rng.spawn(1)[0]
    folds = kfold_indices(n, cfg.folds, fold_rng)
    tasks = []
    for kind in cfg.forest_kinds():
        children = rng.spawn(1)[0].spawn(cfg.folds + 2)
        tasks.append(
            (
                features,
                labels,
                num_classes,
                kind,
                cfg.trees_per_forest,
                cfg.tree_params(),
                folds,
                cfg.mode,
                cfg.tau,
                cfg.lam,
                cfg.fw_iterations,
                cfg.pair_budget,
                children[: cfg.folds],
                children[cfg.folds],
                children[cfg.folds + 1],
            )
        )
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(_fit_forest_slot, tasks))
    else:
        results = [_fit_forest_slot(t) for t in tasks]

    forests = [r[0] for r in results]
    oof_class_vectors = [r[1] for r in results]
    summed = np.sum(oof_class_vectors, axis=0)
    score = float(np.mean(np.argmax(summed, axis=1) == labels))
    augmented = np.hstack([features] + oof_class_vectors)
    level = LevelModel(forests, input_dim=features.shape[1])
    return level, augmented, score, [r[2] for r in results]


def train_cascade(
    train: Dataset,
    cfg: TrainConfig,
    rng: np.random.Generator | None = None,
    workers: int = 1,
) -> CascadeModel:
    """Greedily train cascade levels until the level score stops improving.

    Level score is the training-set accuracy of the level's summed
    out-of-fold class vectors.  The returned model is truncated at the
    best-scoring level.
    """
    cfg.validate()
    if train.n < cfg.folds:
        raise DataError(
            f"need at least folds = {cfg.folds} training rows, got {train.n}"
        )
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    features = train.features
    labels = train.labels
    levels: list[LevelModel] = []
    scores: list[float] = []
    infos: list[list[dict]] = []
    for q in range(cfg.max_levels):
        level, augmented, score, info = _train_level(
            features, labels, train.num_classes, cfg, rng.spawn(1)[0], workers
        )
        levels.append(level)
        scores.append(score)
        infos.append(info)
        if q + 1 == cfg.max_levels or should_stop(scores, cfg.patience):
            break
        features = augmented

    keep = _best_level(scores) + 1
    return CascadeModel(
        levels=levels[:keep],
        base_dim=train.feature_dim,
        num_classes=train.num_classes,
        mode=cfg.mode,
        config=cfg,
        level_scores=tuple(scores),
        class_labels=train.label_names,
        train_info=tuple(tuple(i) for i in infos[:keep]),
    )


def augment(level: LevelModel, x_prev: np.ndarray) -> np.ndarray:
    """Concatenate x_prev with each forest's class vector, in forest order."""
    x_prev = np.asarray(x_prev, dtype=np.float64)
    if x_prev.shape != (level.input_dim,):
        raise DimensionError(
            f"expected a length-{level.input_dim} vector, got shape {x_prev.shape}"
        )
    return augment_batch(level, x_prev[None, :])[0]


def augment_batch(level: LevelModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != level.input_dim:
        raise DimensionError(
            f"expected (n, {level.input_dim}) inputs, got {X.shape}"
        )
    return np.hstack([X] + [class_vectors_batch(f, X) for f in level.forests])


def predict(model: CascadeModel, x: np.ndarray) -> int:
    """Class of x: argmax of the final level's summed class vectors."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.base_dim,):
        raise DimensionError(
            f"expected a length-{model.base_dim} vector, got shape {x.shape}"
        )
    return int(predict_batch(model, x[None, :])[0])


def predict_batch(model: CascadeModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.base_dim:
        raise DimensionError(
            f"expected (n, {model.base_dim}) inputs, got {X.shape}"
        )
    feats = X
    for q, level in enumerate(model.levels):
        class_vectors = [class_vectors_batch(f, feats) for f in level.forests]
        if q + 1 == len(model.levels):
            return np.argmax(np.sum(class_vectors, axis=0), axis=1)
        feats = np.hstack([feats] + class_vectors)
    raise AssertionError("cascade has no levels")
