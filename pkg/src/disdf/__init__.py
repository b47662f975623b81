"""Cascade forest classifier with metric-learned per-tree weights."""

from .cascade import (
    CascadeModel,
    LevelModel,
    augment,
    augment_batch,
    predict,
    predict_batch,
    should_stop,
    train_cascade,
)
from .config import MODE_BASELINE, MODE_DISDF, TrainConfig
from .data import Dataset, kfold_indices, load_csv, load_features, split
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DegeneratePairsError,
    DimensionError,
    DisdfError,
    ModelFormatError,
    SingleClassError,
)
from .evaluation import ExperimentGrid, GridResult, accuracy, repeated_holdout, run_grid
from .forest import (
    ForestModel,
    class_vectors_batch,
    forest_class_vector,
    forest_tree_dists,
    forest_tree_dists_batch,
    train_forest,
    uniform_weights,
)
from .pairstats import PairStats, compute_pair_stats
from .serialize import load_model, save_model
from .tree import (
    COMPLETELY_RANDOM,
    RANDOM_SPLIT,
    TreeModel,
    TreeParams,
    train_tree,
    tree_predict_dist,
)
from .weightopt import (
    ObjectiveParams,
    frank_wolfe,
    gradient,
    lmo_vertex,
    objective,
    project_simplex,
    reference_solve,
)

__version__ = "0.1.0"
