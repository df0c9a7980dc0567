"""Core container types for batched (ragged) point clouds.

A batch holds several independent point clouds concatenated along the vertex
axis.  Row splits mark where each cloud starts and ends; no query may ever
return a neighbour from a different row.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    BadBoundsError,
    BadShapeError,
    NonMonotonicError,
    OutOfRangeError,
    ShapeMismatchError,
)

__all__ = [
    "RowSplits",
    "PointCloud",
    "NeighborMatrix",
    "DirectionMask",
    "validate_row_splits",
    "split_of_vertex",
]

# Mask roles: a vertex can take part in a search as a query, as a candidate
# neighbour, as both, or as neither.
MASK_CANDIDATE_ONLY = 0   # skipped as query, visible as candidate
MASK_QUERY_ONLY = 1       # runs a query, invisible to others
MASK_INACTIVE = 2         # skipped entirely
MASK_ACTIVE = 3           # default: query and candidate


def _as_offsets(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size < 2:
        raise BadShapeError("row splits must be a 1-d sequence with at least 2 offsets")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.floor(arr)):
            arr = arr.astype(np.int64)
        else:
            raise BadShapeError("row splits must be integers")
    return np.ascontiguousarray(arr, dtype=np.int64)


class RowSplits:
    """Cumulative offsets partitioning a vertex range into rows.

    ``offsets[i]:offsets[i+1]`` is the contiguous vertex range of row ``i``.
    Offsets start at 0, never decrease, and end at the total vertex count.
    Empty rows are legal.
    """

    __slots__ = ("offsets",)

    def __init__(self, offsets):
        arr = _as_offsets(offsets)
        if arr[0] != 0:
            raise BadBoundsError("row splits must start at 0")
        if np.any(np.diff(arr) < 0):
            raise NonMonotonicError("row splits must be non-decreasing")
        arr.flags.writeable = False
        self.offsets = arr

    @property
    def n_splits(self) -> int:
        return self.offsets.size - 1

    @property
    def n_vertices(self) -> int:
        return int(self.offsets[-1])

    def sizes(self) -> np.ndarray:
        """Vertex count of every row."""
        return np.diff(self.offsets)

    def bounds(self, split: int) -> tuple[int, int]:
        """Half-open vertex range of one row."""
        if split < 0 or split >= self.n_splits:
            raise OutOfRangeError(f"split {split} out of range [0, {self.n_splits})")
        return int(self.offsets[split]), int(self.offsets[split + 1])

    def __len__(self) -> int:
        return self.n_splits

    def __eq__(self, other) -> bool:
        if not isinstance(other, RowSplits):
            return NotImplemented
        return np.array_equal(self.offsets, other.offsets)

    def __hash__(self):
        return hash(self.offsets.tobytes())

    def __repr__(self) -> str:
        return f"RowSplits({self.offsets.tolist()})"


def validate_row_splits(offsets, n_vertices: int) -> RowSplits:
    """Check offsets against an expected vertex count and freeze them."""
    rs = RowSplits(offsets)
    if rs.n_vertices != n_vertices:
        raise BadBoundsError(
            f"row splits end at {rs.n_vertices}, expected {n_vertices} vertices"
        )
    return rs


def split_of_vertex(row_splits: RowSplits, vertex: int) -> int:
    """Row that a vertex belongs to.

    With empty rows present the vertex belongs to the unique row whose
    half-open range contains it.
    """
    n = row_splits.n_vertices
    if vertex < 0 or vertex >= n:
        raise OutOfRangeError(f"vertex {vertex} out of range [0, {n})")
    return int(np.searchsorted(row_splits.offsets, vertex, side="right") - 1)


class PointCloud:
    """A batch of point clouds: float64 coordinates plus row splits."""

    __slots__ = ("coords", "row_splits")

    def __init__(self, coords, row_splits):
        arr = np.ascontiguousarray(coords, dtype=np.float64)
        if arr.ndim != 2:
            raise BadShapeError("coords must be 2-d (n_vertices, n_coords)")
        if arr.shape[1] < 1:
            raise BadShapeError("coords needs at least one coordinate dimension")
        if not np.all(np.isfinite(arr)):
            raise BadShapeError("coords must be finite")
        if not isinstance(row_splits, RowSplits):
            row_splits = RowSplits(row_splits)
        if row_splits.n_vertices != arr.shape[0]:
            raise ShapeMismatchError(
                f"row splits cover {row_splits.n_vertices} vertices, "
                f"coords have {arr.shape[0]}"
            )
        arr.flags.writeable = False
        self.coords = arr
        self.row_splits = row_splits

    @property
    def n_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def n_coords(self) -> int:
        return self.coords.shape[1]

    def __repr__(self) -> str:
        return (f"PointCloud(n_vertices={self.n_vertices}, "
                f"n_coords={self.n_coords}, n_splits={self.row_splits.n_splits})")


class NeighborMatrix:
    """Fixed-width neighbour lists.

    ``indices[v][0] == v`` for every vertex that ran a query, with squared
    distance 0.  Slots ``1..k-1`` hold the nearest other vertices in no
    particular order; unused slots are padded with index -1 and distance 0.
    """

    __slots__ = ("indices", "dist2")

    def __init__(self, indices, dist2):
        idx = np.ascontiguousarray(indices, dtype=np.int32)
        d2 = np.ascontiguousarray(dist2, dtype=np.float64)
        if idx.ndim != 2 or d2.ndim != 2:
            raise BadShapeError("neighbour arrays must be 2-d")
        if idx.shape != d2.shape:
            raise ShapeMismatchError(
                f"indices shape {idx.shape} != dist2 shape {d2.shape}"
            )
        idx.flags.writeable = False
        d2.flags.writeable = False
        self.indices = idx
        self.dist2 = d2

    @property
    def n_vertices(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def valid_mask(self) -> np.ndarray:
        """Boolean mask of slots holding a real neighbour."""
        return self.indices >= 0

    def __repr__(self) -> str:
        return f"NeighborMatrix(n_vertices={self.n_vertices}, k={self.k})"


class DirectionMask:
    """Per-vertex role mask for asymmetric searches.

    Roles: 0 candidate-only, 1 query-only, 2 inactive, 3 active.  A vertex
    that is skipped as a query still gets an output row: itself in slot 0
    and -1 padding elsewhere.
    """

    __slots__ = ("dir", "enabled")

    def __init__(self, directions, enabled: bool = True):
        arr = np.ascontiguousarray(directions, dtype=np.int8)
        if arr.ndim != 1:
            raise BadShapeError("direction mask must be 1-d")
        if arr.size and (arr.min() < 0 or arr.max() > 3):
            raise BadShapeError("direction values must be in {0, 1, 2, 3}")
        arr.flags.writeable = False
        self.dir = arr
        self.enabled = bool(enabled)

    @classmethod
    def all_active(cls, n_vertices: int) -> "DirectionMask":
        return cls(np.full(n_vertices, MASK_ACTIVE, dtype=np.int8))

    def runs_query(self) -> np.ndarray:
        """Vertices that run a query (roles 1 and 3)."""
        if not self.enabled:
            return np.ones(self.dir.size, dtype=bool)
        return (self.dir == MASK_QUERY_ONLY) | (self.dir == MASK_ACTIVE)

    def is_candidate(self) -> np.ndarray:
        """Vertices visible as candidates (roles 0 and 3)."""
        if not self.enabled:
            return np.ones(self.dir.size, dtype=bool)
        return (self.dir == MASK_CANDIDATE_ONLY) | (self.dir == MASK_ACTIVE)

    def __repr__(self) -> str:
        return f"DirectionMask(n={self.dir.size}, enabled={self.enabled})"
