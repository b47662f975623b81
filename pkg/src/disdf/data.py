"""Loading labeled tabular data and producing reproducible splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadCellError, DataError, RaggedRowError, SingleClassError


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with 0-based integer class labels.

    ``num_classes`` is carried explicitly so that subsets keep the parent's
    class inventory even when a class is absent from the subset.
    """

    features: np.ndarray  # (n, m) float64
    labels: np.ndarray  # (n,) int64
    num_classes: int
    label_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DataError(f"features must be 2-d, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise DataError(
                f"labels length {labels.shape} does not match "
                f"{features.shape[0]} feature rows"
            )
        if self.num_classes < 2:
            raise SingleClassError(
                f"need at least 2 classes, got {self.num_classes}"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise DataError("labels must lie in [0, num_classes)")
        if features.size and not np.isfinite(features).all():
            raise BadCellError("features contain NaN or infinite values")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(
            self.features[indices],
            self.labels[indices],
            self.num_classes,
            self.label_names,
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)


def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return rows


def _is_number(token: str) -> bool:
    # used for header detection only; "nan"/"inf" parse as numbers and are
    # rejected later with an error naming the offending cell
    try:
        float(token)
    except ValueError:
        return False
    return True


def _parse_feature_cell(token: str, row_no: int, col_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise BadCellError(
            f"row {row_no}, column {col_no}: {token!r} is not a number"
        ) from None
    if not math.isfinite(value):
        raise BadCellError(
            f"row {row_no}, column {col_no}: {token!r} is not finite"
        )
    return value


def load_csv(path, label_column) -> Dataset:
    """Load a CSV file with one label column into a :class:`Dataset`.

    ``label_column`` is a 0-based column index or, when the file has a header
    row, a column name.  Labels are re-encoded to contiguous 0-based indices
    in order of first appearance.  A header row is assumed present iff the
    first row contains a non-numeric cell outside the label column.
    """
    rows = _read_rows(path)
    if not rows:
        raise DataError(f"{path}: file contains no data rows")

    width = len(rows[0])
    if isinstance(label_column, str):
        header = [c.strip() for c in rows[0]]
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise DataError(
                f"{path}: no column named {label_column!r} in header {header}"
            ) from None
        data_rows = rows[1:]
        first_line = 2
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise DataError(
                f"{path}: label column {label_idx} out of range for {width} columns"
            )
        if label_idx < 0:
            label_idx += width
        has_header = any(
            not _is_number(cell)
            for col, cell in enumerate(rows[0])
            if col != label_idx
        )
        data_rows = rows[1:] if has_header else rows
        first_line = 2 if has_header else 1

    if not data_rows:
        raise DataError(f"{path}: file contains no data rows")

    n = len(data_rows)
    m = width - 1
    if m < 1:
        raise DataError(f"{path}: need at least one feature column")

    features = np.empty((n, m), dtype=np.float64)
    encoding: dict[str, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for r, row in enumerate(data_rows):
        line_no = first_line + r
        if len(row) != width:
            raise RaggedRowError(
                f"{path}: row {line_no} has {len(row)} columns, expected {width}"
            )
        c = 0
        for col, cell in enumerate(row):
            if col == label_idx:
                continue
            features[r, c] = _parse_feature_cell(cell.strip(), line_no, col)
            c += 1
        token = row[label_idx].strip()
        labels[r] = encoding.setdefault(token, len(encoding))

    if len(encoding) < 2:
        raise SingleClassError(
            f"{path}: label column has a single class {next(iter(encoding))!r}"
        )
    names = tuple(sorted(encoding, key=encoding.get))
    return Dataset(features, labels, len(encoding), names)


def load_features(path) -> np.ndarray:
    """Load a label-free feature CSV; returns an (n, m) float matrix.

    A header row is assumed present iff the first row has any non-numeric
    cell.  An empty file yields a (0, 0) matrix.
    """
    rows = _read_rows(path)
    if not rows:
        return np.empty((0, 0), dtype=np.float64)
    has_header = any(not _is_number(cell) for cell in rows[0])
    data_rows = rows[1:] if has_header else rows
    first_line = 2 if has_header else 1
    if not data_rows:
        return np.empty((0, 0), dtype=np.float64)
    width = len(rows[0])
    features = np.empty((len(data_rows), width), dtype=np.float64)
    for r, row in enumerate(data_rows):
        if len(row) != width:
            raise RaggedRowError(
                f"{path}: row {first_line + r} has {len(row)} columns, expected {width}"
            )
        for col, cell in enumerate(row):
            features[r, col] = _parse_feature_cell(cell.strip(), first_line + r, col)
    return features


def split(
    ds: Dataset,
    n_train: int,
    n_test: int,
    seed,
    stratify: bool = False,
) -> tuple[Dataset, Dataset]:
    """Draw disjoint uniformly-random train/test subsets.

    Both subsets keep the parent's ``num_classes``.  Deterministic for a
    fixed seed.  With ``stratify=True`` the train subset allocates class
    slots proportionally (largest-remainder rounding) before sampling.
    """
    if n_train < 0 or n_test < 0:
        raise DataError("split sizes must be non-negative")
    if n_train + n_test > ds.n:
        raise DataError(
            f"n_train + n_test = {n_train + n_test} exceeds dataset size {ds.n}"
        )
    rng = np.random.default_rng(seed)
    if stratify and n_train > 0:
        train_idx = _stratified_indices(ds.labels, ds.num_classes, n_train, rng)
        rest = np.setdiff1d(np.arange(ds.n), train_idx, assume_unique=True)
        test_idx = rng.permutation(rest)[:n_test]
    else:
        perm = rng.permutation(ds.n)
        train_idx = perm[:n_train]
        test_idx = perm[n_train : n_train + n_test]
    return ds.subset(np.sort(train_idx)), ds.subset(np.sort(test_idx))


def _stratified_indices(labels, num_classes, n_train, rng) -> np.ndarray:
    counts = np.bincount(labels, minlength=num_classes)
    exact = counts * (n_train / labels.size)
    alloc = np.floor(exact).astype(int)
    remainder = exact - alloc
    short = n_train - alloc.sum()
    for c in np.argsort(-remainder):
        if short == 0:
            break
        if alloc[c] < counts[c]:
            alloc[c] += 1
            short -= 1
    picked = []
    for c in range(num_classes):
        members = np.nonzero(labels == c)[0]
        take = min(alloc[c], members.size)
        picked.append(rng.permutation(members)[:take])
    out = np.concatenate(picked) if picked else np.empty(0, dtype=np.int64)
    if out.size < n_train:  # classes exhausted; fill from the remainder
        rest = np.setdiff1d(np.arange(labels.size), out, assume_unique=True)
        out = np.concatenate([out, rng.permutation(rest)[: n_train - out.size]])
    return out


def kfold_indices(n: int, folds: int, seed) -> list[tuple[np.ndarray, np.ndarray]]:
    """Partition {0..n-1} into ``folds`` holdouts of near-equal size.

    Returns a list of (train_indices, holdout_indices) pairs; holdouts are
    pairwise disjoint, cover all indices, and differ in size by at most one.
    """
    if folds < 2:
        raise DataError(f"folds must be at least 2, got {folds}")
    if folds > n:
        raise DataError(f"folds = {folds} exceeds sample count {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base = n // folds
    extra = n % folds
    out = []
    start = 0
    for f in range(folds):
        size = base + (1 if f < extra else 0)
        holdout = perm[start : start + size]
        train = np.concatenate([perm[:start], perm[start + size :]])
        out.append((np.sort(train), np.sort(holdout)))
        start += size
    return out
