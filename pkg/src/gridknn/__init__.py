"""Exact k-nearest-neighbour search for batched low-dimensional point clouds.

The search bins each row split of a point cloud on up to five leading
coordinate dimensions, then expands rings of grid cells around every query
until the nearest ring that could still hold a closer point is provably too
far.  Results are exact; a brute-force route with independent code serves
as the oracle.  Neighbour aggregation and object-condensation helper
matrices build on the neighbour lists.

Compiled kernels are used when available; ``BACKEND`` names the default.
"""

from ._kernels import DEFAULT_BACKEND as BACKEND, HAVE_COMPILED, backend_names
from .binning import BinIndex, BinningConfig, build_bin_index, compute_n_bins, default_bin_dims
from .core import (
    DirectionMask,
    NeighborMatrix,
    PointCloud,
    RowSplits,
    split_of_vertex,
    validate_row_splits,
)
from .errors import GridKnnError
from .gravnet import (AggregationSpec, gravnet_aggregate,
                      gravnet_aggregate_backward, neighbor_weights)
from .knn import (
    KnnOptions,
    binned_select_knn,
    brute_force_knn,
    knn_backward,
    knn_with_grad,
)
from .ocgraph import Associations, find_unique, max_same_count, oc_helper
from .stepper import BinStepper, ring_cells

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "backend_names",
    "RowSplits",
    "PointCloud",
    "NeighborMatrix",
    "DirectionMask",
    "validate_row_splits",
    "split_of_vertex",
    "BinningConfig",
    "BinIndex",
    "compute_n_bins",
    "default_bin_dims",
    "build_bin_index",
    "BinStepper",
    "ring_cells",
    "KnnOptions",
    "binned_select_knn",
    "brute_force_knn",
    "knn_backward",
    "knn_with_grad",
    "AggregationSpec",
    "gravnet_aggregate",
    "gravnet_aggregate_backward",
    "neighbor_weights",
    "Associations",
    "find_unique",
    "max_same_count",
    "oc_helper",
    "GridKnnError",
    "__version__",
]
