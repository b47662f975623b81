"""Training configuration shared by the cascade trainer, benchmark, and CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ConfigError
from .tree import COMPLETELY_RANDOM, RANDOM_SPLIT, TreeParams

MODE_DISDF = "disdf"
MODE_BASELINE = "baseline"
MODES = (MODE_DISDF, MODE_BASELINE)


@dataclass
class TrainConfig:
    """All training hyperparameters.

    Defaults follow the cascade-of-forests convention: four forests per level
    (two random-split-search, two completely-random), three-fold class-vector
    generation, and full-depth trees.
    """

    forests_per_level: int = 4
    trees_per_forest: int = 100
    max_levels: int = 10
    patience: int = 1
    folds: int = 3
    tau: float = 0.5
    lam: float = 0.01
    fw_iterations: int = 2000
    pair_budget: int | None = None
    seed: int = 0
    mode: str = MODE_DISDF
    min_leaf: int = 1
    max_depth: int | None = None
    stratify: bool = False

    def validate(self) -> "TrainConfig":
        if self.forests_per_level < 1:
            raise ConfigError("forests_per_level must be >= 1")
        if self.trees_per_forest < 1:
            raise ConfigError("trees_per_forest must be >= 1")
        if self.max_levels < 1:
            raise ConfigError("max_levels must be >= 1")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if not self.tau > 0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.fw_iterations < 1:
            raise ConfigError("fw_iterations must be >= 1")
        if self.pair_budget is not None and self.pair_budget < 1:
            raise ConfigError("pair_budget must be >= 1 or unset")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1 or unset")
        return self

    def tree_params(self) -> TreeParams:
        return TreeParams(min_leaf=self.min_leaf, max_depth=self.max_depth)

    def forest_kinds(self) -> list[str]:
        """Per-slot tree kinds: alternating, starting with random-split-search."""
        return [
            RANDOM_SPLIT if k % 2 == 0 else COMPLETELY_RANDOM
            for k in range(self.forests_per_level)
        ]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()
