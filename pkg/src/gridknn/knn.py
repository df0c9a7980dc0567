"""Exact k-nearest-neighbour search over binned point clouds.

Two routes produce the same neighbour sets: the binned expanding-ring search
and a brute-force full scan.  Both respect row splits, the optional
direction mask and the optional squared-radius cutoff.  The brute route is
deliberately independent of the bin index so it can serve as an oracle.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .binning import BinIndex
from .core import DirectionMask, NeighborMatrix, PointCloud
from .errors import (
    BadKError,
    IndexMismatchError,
    ShapeMismatchError,
)

__all__ = [
    "KnnOptions",
    "binned_select_knn",
    "brute_force_knn",
    "knn_backward",
    "knn_with_grad",
]


@dataclass(frozen=True)
class KnnOptions:
    """Search options shared by both routes.

    k counts the vertex itself: each output row is the vertex plus its k-1
    nearest others.  max_radius2 drops candidates with squared distance
    strictly greater than the cutoff; rows that cannot fill are padded.
    """

    k: int
    mask: DirectionMask | None = None
    max_radius2: float | None = None


def _check_options(cloud: PointCloud, opts: KnnOptions):
    if not isinstance(opts.k, (int, np.integer)) or isinstance(opts.k, bool) or opts.k < 1:
        raise BadKError(f"k must be a positive integer, got {opts.k!r}")
    if cloud.n_vertices >= 2 ** 31:
        raise ShapeMismatchError("vertex count exceeds int32 neighbour indices")
    if opts.mask is not None and opts.mask.dir.size != cloud.n_vertices:
        raise ShapeMismatchError(
            f"mask covers {opts.mask.dir.size} vertices, cloud has {cloud.n_vertices}"
        )
    if opts.max_radius2 is not None and not (opts.max_radius2 >= 0.0):
        raise BadKError(f"max_radius2 must be >= 0, got {opts.max_radius2!r}")


def _mask_args(cloud: PointCloud, opts: KnnOptions):
    if opts.mask is not None and opts.mask.enabled:
        return opts.mask.dir, True
    return np.zeros(1, dtype=np.int8), False


def _radius_args(opts: KnnOptions):
    if opts.max_radius2 is None:
        return 0.0, False
    return float(opts.max_radius2), True


def resolve_threads(threads: int) -> int:
    """0 means all available cores."""
    if threads < 0:
        raise BadKError(f"threads must be >= 0, got {threads}")
    if threads == 0:
        return os.cpu_count() or 1
    return int(threads)


def binned_select_knn(cloud: PointCloud, index: BinIndex, opts: KnnOptions, *,
                      threads: int = 0, backend: str | None = None,
                      exhaustive_rings: bool = False) -> NeighborMatrix:
    """Exact kNN via expanding rings over the bin index.

    Rings of grid cells around each query's cell are scanned outward; the
    search stops once a full ring guarantees that everything unvisited is
    farther than the current k-th best.  With ``exhaustive_rings`` the early
    stop is disabled and every in-bounds cell is visited (diagnostics only;
    results are identical).
    """
    _check_options(cloud, opts)
    if index.n_vertices != cloud.n_vertices:
        raise IndexMismatchError(
            f"index built for {index.n_vertices} vertices, cloud has {cloud.n_vertices}"
        )
    if index.row_splits != cloud.row_splits:
        raise IndexMismatchError("index row splits differ from the cloud's")
    if index.d_bin > cloud.n_coords:
        raise IndexMismatchError(
            f"index bins {index.d_bin} dims, cloud has {cloud.n_coords}"
        )
    kb = _kernels.get_backend(backend)
    k = int(opts.k)
    n_v = cloud.n_vertices
    dir_arr, use_dir = _mask_args(cloud, opts)
    max_r2, use_max_r2 = _radius_args(opts)
    out_idx = np.empty((n_v, k), dtype=np.int32)
    out_d2 = np.empty((n_v, k), dtype=np.float64)
    kb.binned_knn(cloud.coords, index.bin_idx, index.sort_order, index.bin_bounds,
                  index.bin_counts, index.min_widths(), dir_arr, use_dir,
                  max_r2, use_max_r2, bool(exhaustive_rings), k,
                  out_idx, out_d2, resolve_threads(threads))
    return NeighborMatrix(out_idx, out_d2)


def brute_force_knn(cloud: PointCloud, opts: KnnOptions, *,
                    threads: int = 0, backend: str | None = None) -> NeighborMatrix:
    """Exact kNN by scanning every vertex of the split.  The oracle route."""
    _check_options(cloud, opts)
    kb = _kernels.get_backend(backend)
    k = int(opts.k)
    n_v = cloud.n_vertices
    dir_arr, use_dir = _mask_args(cloud, opts)
    max_r2, use_max_r2 = _radius_args(opts)
    out_idx = np.empty((n_v, k), dtype=np.int32)
    out_d2 = np.empty((n_v, k), dtype=np.float64)
    kb.brute_knn(cloud.coords, cloud.row_splits.offsets, dir_arr, use_dir,
                 max_r2, use_max_r2, k, out_idx, out_d2,
                 resolve_threads(threads))
    return NeighborMatrix(out_idx, out_d2)


def knn_backward(cloud: PointCloud, neighbors: NeighborMatrix,
                 upstream: np.ndarray) -> np.ndarray:
    """Gradient of the squared neighbour distances w.r.t. the coordinates.

    For each valid pair (v, n) with upstream weight g, d(v,n)^2 contributes
    2 g (x_v - x_n) to vertex v and the negation to vertex n.  Accumulation
    order is fixed, so repeated calls are bitwise identical.
    """
    up = np.ascontiguousarray(upstream, dtype=np.float64)
    if up.shape != neighbors.dist2.shape:
        raise ShapeMismatchError(
            f"upstream shape {up.shape} != neighbour shape {neighbors.dist2.shape}"
        )
    if neighbors.n_vertices != cloud.n_vertices:
        raise ShapeMismatchError(
            f"neighbours cover {neighbors.n_vertices} vertices, "
            f"cloud has {cloud.n_vertices}"
        )
    grad = np.zeros((cloud.n_vertices, cloud.n_coords), dtype=np.float64)
    idx = neighbors.indices
    # slot 0 is the vertex itself: x_v - x_v = 0, no contribution, skip it
    valid = idx[:, 1:] >= 0
    if not np.any(valid):
        return grad
    rows = np.broadcast_to(
        np.arange(cloud.n_vertices, dtype=np.int64)[:, None], valid.shape
    )[valid]
    cols = idx[:, 1:][valid].astype(np.int64)
    g = up[:, 1:][valid]
    diff = cloud.coords[rows] - cloud.coords[cols]
    contrib = (2.0 * g)[:, None] * diff
    np.add.at(grad, rows, contrib)
    np.add.at(grad, cols, -contrib)
    return grad


def knn_with_grad(cloud: PointCloud, index: BinIndex, opts: KnnOptions, *,
                  threads: int = 0, backend: str | None = None):
    """Binned search plus a closure mapping upstream weights to coord grads."""
    neighbors = binned_select_knn(cloud, index, opts, threads=threads,
                                  backend=backend)

    def grad_fn(upstream: np.ndarray) -> np.ndarray:
        return knn_backward(cloud, neighbors, upstream)

    return neighbors, grad_fn
