"""Uniform grid binning over the leading coordinate dimensions.

Each row split gets its own bounding box over the first ``d_bin`` coordinate
dimensions, divided into the same number of bins per dimension.  Vertices are
assigned a flat cell id (offset by split), then reordered split-major /
cell-major with a stable counting sort so every cell is one contiguous range
of ``sort_order``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import PointCloud
from .errors import BadKError, BadShapeError, TooFewDimsError

__all__ = [
    "BinningConfig",
    "BinIndex",
    "compute_n_bins",
    "default_bin_dims",
    "build_bin_index",
]

MIN_BINS = 5
MAX_BINS = 30
MAX_BIN_DIMS = 5


def default_bin_dims(n_coords: int) -> int:
    """Number of leading dimensions to bin on: all of them, capped at 5."""
    if n_coords < 2:
        raise TooFewDimsError("binning needs at least 2 coordinate dimensions")
    return min(n_coords, MAX_BIN_DIMS)


def compute_n_bins(n_elems: int, k_target: int, d_bin: int) -> int:
    """Bins per dimension: floor((32 * n_elems / k_target)**(1/d_bin)),
    clamped to [5, 30].

    The root is taken exactly over the integers so exact d-th powers do not
    fall on the wrong side of the floor.
    """
    if k_target < 1:
        raise BadKError(f"k_target must be >= 1, got {k_target}")
    if d_bin < 1:
        raise TooFewDimsError(f"d_bin must be >= 1, got {d_bin}")
    n_elems = int(n_elems)
    if n_elems < 0:
        raise BadShapeError("n_elems must be non-negative")
    num = 32 * n_elems
    if num == 0:
        return MIN_BINS
    root = int((num / k_target) ** (1.0 / d_bin))
    while (root + 1) ** d_bin * k_target <= num:
        root += 1
    while root > 0 and root ** d_bin * k_target > num:
        root -= 1
    return min(MAX_BINS, max(MIN_BINS, root))


@dataclass(frozen=True)
class BinningConfig:
    """How to build a bin index.

    k_target sizes the grid so cells hold ~k_target/32 points on average;
    d_bin picks how many leading dimensions to bin on (default: all, max 5);
    n_bins overrides the computed bins-per-dimension when set.
    """

    k_target: int
    d_bin: int | None = None
    n_bins: int | None = None


class BinIndex:
    """Grid assignment of a point cloud, ready for ring searches.

    bin_idx[v] is the global cell of vertex v (split offset included);
    sort_order lists vertices cell by cell; bin_bounds[c]:bin_bounds[c+1]
    is the sort_order range of global cell c.
    """

    __slots__ = (
        "row_splits", "d_bin", "n_bins", "bin_counts", "dim_mins", "widths",
        "bin_idx", "sort_order", "bin_bounds",
    )

    def __init__(self, row_splits, d_bin, n_bins, bin_counts, dim_mins,
                 widths, bin_idx, sort_order, bin_bounds):
        self.row_splits = row_splits
        self.d_bin = int(d_bin)
        self.n_bins = int(n_bins)
        self.bin_counts = bin_counts
        self.dim_mins = dim_mins
        self.widths = widths
        self.bin_idx = bin_idx
        self.sort_order = sort_order
        self.bin_bounds = bin_bounds
        for arr in (bin_counts, dim_mins, widths, bin_idx, sort_order, bin_bounds):
            arr.flags.writeable = False

    @property
    def n_vertices(self) -> int:
        return self.bin_idx.shape[0]

    @property
    def total_bins(self) -> int:
        """Cells per row split."""
        return self.n_bins ** self.d_bin

    @property
    def n_cells(self) -> int:
        """Cells over all row splits."""
        return self.row_splits.n_splits * self.total_bins

    def min_widths(self) -> np.ndarray:
        """Narrowest bin width of each split; floors the ring-stop bound."""
        return self.widths.min(axis=1)

    @property
    def nbytes(self) -> int:
        """Memory held by the index arrays."""
        return (self.bin_idx.nbytes + self.sort_order.nbytes
                + self.bin_bounds.nbytes + self.dim_mins.nbytes
                + self.widths.nbytes + self.bin_counts.nbytes)

    def __repr__(self) -> str:
        return (f"BinIndex(n_vertices={self.n_vertices}, d_bin={self.d_bin}, "
                f"n_bins={self.n_bins}, n_splits={self.row_splits.n_splits})")


def build_bin_index(cloud: PointCloud, config: BinningConfig, *,
                    backend: str | None = None) -> BinIndex:
    """Bin a point cloud on its leading dimensions.

    Bins per dimension follow the k_target formula unless overridden.  Grid
    extents are per split; a dimension with zero extent gets width 1.0 so
    all its points land in the first cell.  Points at the top edge are
    clamped into the last cell.
    """
    kb = _kernels.get_backend(backend)
    d_bin = config.d_bin if config.d_bin is not None else default_bin_dims(cloud.n_coords)
    if d_bin < 2:
        raise TooFewDimsError(f"d_bin must be >= 2, got {d_bin}")
    if d_bin > MAX_BIN_DIMS:
        raise BadShapeError(f"d_bin must be <= {MAX_BIN_DIMS}, got {d_bin}")
    if d_bin > cloud.n_coords:
        raise TooFewDimsError(
            f"d_bin={d_bin} exceeds the {cloud.n_coords} coordinate dimensions"
        )
    if config.n_bins is not None:
        n_bins = int(config.n_bins)
        if n_bins < 1:
            raise BadShapeError(f"n_bins must be >= 1, got {n_bins}")
    else:
        sizes = cloud.row_splits.sizes()
        largest = int(sizes.max()) if sizes.size else 0
        n_bins = compute_n_bins(largest, config.k_target, d_bin)

    offsets = cloud.row_splits.offsets
    bin_idx, sort_order, bin_bounds, dim_mins, widths = kb.build_index(
        cloud.coords, offsets, d_bin, n_bins
    )
    bin_counts = np.full(d_bin, n_bins, dtype=np.int64)
    return BinIndex(cloud.row_splits, d_bin, n_bins, bin_counts,
                    dim_mins, widths, bin_idx, sort_order, bin_bounds)
