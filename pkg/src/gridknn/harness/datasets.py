"""Synthetic datasets for verification and benchmarks."""

from __future__ import annotations

import numpy as np

from ..core import PointCloud, RowSplits
from ..errors import BadShapeError
from ..ocgraph import Associations

__all__ = ["even_row_splits", "generate_dataset", "generate_associations"]

_CLUSTERS_PER_SPLIT = 10
_CLUSTER_SIGMA = 0.02


def even_row_splits(n: int, splits: int) -> RowSplits:
    """Partition n vertices into rows as evenly as possible.

    The first n % splits rows get the extra vertex, so n=10, splits=2
    gives offsets [0, 5, 10].
    """
    if splits < 1 or n < splits:
        raise BadShapeError(f"need n >= splits >= 1, got n={n}, splits={splits}")
    base, rem = divmod(n, splits)
    sizes = np.full(splits, base, dtype=np.int64)
    sizes[:rem] += 1
    offsets = np.zeros(splits + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    return RowSplits(offsets)


def generate_dataset(n: int, dim: int, splits: int = 1, seed: int = 0,
                     distribution: str = "uniform") -> PointCloud:
    """Reproducible random cloud: uniform on [0,1)^dim, or Gaussian clusters.

    The clusters mode draws 10 cluster centres per row split and scatters
    points around them (sigma 0.02), stressing grids with crowded cells.
    """
    rs = even_row_splits(n, splits)
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        coords = rng.random((n, dim))
    elif distribution == "clusters":
        coords = np.empty((n, dim), dtype=np.float64)
        for s in range(rs.n_splits):
            lo, hi = rs.bounds(s)
            m = hi - lo
            centers = rng.random((_CLUSTERS_PER_SPLIT, dim))
            which = rng.integers(0, _CLUSTERS_PER_SPLIT, size=m)
            coords[lo:hi] = centers[which] + rng.normal(
                0.0, _CLUSTER_SIGMA, size=(m, dim))
    else:
        raise BadShapeError(
            f"unknown distribution {distribution!r}; expected uniform or clusters"
        )
    return PointCloud(coords, rs)


def generate_associations(n: int, splits: int = 1, n_objects: int = 5,
                          seed: int = 0, background_frac: float = 0.2) -> Associations:
    """Random association ids: per split, up to n_objects representative
    vertices are drawn and every other vertex joins one of them or stays
    background (-1)."""
    rs = even_row_splits(n, splits)
    rng = np.random.default_rng(seed)
    asso = np.full(n, -1, dtype=np.int64)
    for s in range(rs.n_splits):
        lo, hi = rs.bounds(s)
        m = hi - lo
        if m == 0:
            continue
        n_obj = min(n_objects, m)
        reps = lo + rng.choice(m, size=n_obj, replace=False)
        members = rng.random(m) >= background_frac
        asso[lo:hi] = np.where(members, reps[rng.integers(0, n_obj, size=m)], -1)
        asso[reps] = reps  # a representative always belongs to its own object
    return Associations(asso, rs)
