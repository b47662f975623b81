"""Pairwise squared/absolute distribution differences feeding the weight optimizer.

For a pair of training instances (i, j) and tree t, ``P[pair, t]`` is the
squared Euclidean difference between the tree's class distributions for i and
j, and ``Q[pair, t]`` the Manhattan difference.  ``z`` flags pairs as 0 for
same-class and 1 for different-class; ``pi`` aggregates P over same-class
pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePairsError

_CHUNK = 1024


@dataclass(frozen=True)
class PairStats:
    pair_i: np.ndarray  # (n_pairs,) int32, i < j
    pair_j: np.ndarray  # (n_pairs,) int32
    z: np.ndarray  # (n_pairs,) uint8; 0 same class, 1 different
    P: np.ndarray  # (n_pairs, T) squared-difference sums
    Q: np.ndarray  # (n_pairs, T) absolute-difference sums, in [0, 2]
    pi: np.ndarray  # (T,) sum of P over same-class pairs

    @property
    def n_pairs(self) -> int:
        return self.z.shape[0]

    @property
    def n_trees(self) -> int:
        return self.pi.shape[0]

    @classmethod
    def empty(cls, n_trees: int) -> "PairStats":
        """Stats with no pairs at all (objective reduces to the regularizer)."""
        return cls(
            pair_i=np.empty(0, dtype=np.int32),
            pair_j=np.empty(0, dtype=np.int32),
            z=np.empty(0, dtype=np.uint8),
            P=np.empty((0, n_trees)),
            Q=np.empty((0, n_trees)),
            pi=np.zeros(n_trees),
        )


def compute_pair_stats(
    tree_dists: np.ndarray,
    labels: np.ndarray,
    pair_budget: int | None = None,
    rng: np.random.Generator | None = None,
) -> PairStats:
    """Build :class:`PairStats` from an (n, T, C) per-tree distribution tensor.

    All unordered pairs i < j are used unless ``pair_budget`` is smaller than
    n(n-1)/2, in which case a uniform subsample that keeps at least one pair
    of each z value is retained.  Raises :class:`DegeneratePairsError` when
    every pair shares one z value (e.g. single-class data).
    """
    tree_dists = np.asarray(tree_dists, dtype=np.float64)
    labels = np.asarray(labels)
    n = labels.shape[0]
    if tree_dists.ndim != 3 or tree_dists.shape[0] != n:
        raise ValueError(
            f"tree_dists must be (n, T, C) with n = {n}, got {tree_dists.shape}"
        )
    if n < 2:
        raise DegeneratePairsError("need at least two samples to form pairs")

    ii, jj = np.triu_indices(n, k=1)
    z = (labels[ii] != labels[jj]).astype(np.uint8)
    if z.min() == z.max():
        which = "different-class" if z[0] == 1 else "same-class"
        raise DegeneratePairsError(
            f"degenerate pair set: every pair is {which}; "
            "both kinds are required"
        )

    if pair_budget is not None and pair_budget < ii.size:
        if rng is None:
            rng = np.random.default_rng()
        keep = rng.choice(ii.size, size=max(int(pair_budget), 2), replace=False)
        keep = _ensure_both_kinds(keep, z, rng)
        keep.sort()
        ii, jj, z = ii[keep], jj[keep], z[keep]

    n_pairs = ii.size
    T = tree_dists.shape[1]
    P = np.empty((n_pairs, T))
    Q = np.empty((n_pairs, T))
    for start in range(0, n_pairs, _CHUNK):
        end = min(start + _CHUNK, n_pairs)
        d = tree_dists[ii[start:end]] - tree_dists[jj[start:end]]
        P[start:end] = np.einsum("ptc,ptc->pt", d, d)
        Q[start:end] = np.abs(d).sum(axis=2)

    pi = P[z == 0].sum(axis=0)
    return PairStats(
        pair_i=ii.astype(np.int32),
        pair_j=jj.astype(np.int32),
        z=z,
        P=P,
        Q=Q,
        pi=pi,
    )


def _ensure_both_kinds(keep, z, rng):
    """Swap pairs into the subsample so both z values stay represented."""
    for value in (0, 1):
        if not (z[keep] == value).any():
            pool = np.nonzero(z == value)[0]
            slot = rng.integers(keep.size)
            keep = keep.copy()
            keep[slot] = pool[rng.integers(pool.size)]
    return keep
