"""Association matrices for object-condensation style training.

Vertices carry an association id (negative for background).  An object is a
(id, row split) pair: the same id in two splits is two objects.  For every
object this module builds the row M of its member vertices and optionally
the row M-not of the other vertices in its split.  Rows hold vertex ids
ascending, truncated to capacity, with a contiguous -1 suffix as padding.
"""

from __future__ import annotations

import numpy as np

from .core import RowSplits
from .errors import BadCapacityError, BadShapeError, ShapeMismatchError

__all__ = [
    "Associations",
    "UniqueObjects",
    "AssociationMatrices",
    "find_unique",
    "max_same_count",
    "oc_helper",
]


class Associations:
    """Per-vertex association ids over a ragged batch.

    Ids are opaque integer labels (typically the object's representative
    vertex id); any negative value marks background.  Membership is always
    evaluated within a row split.
    """

    __slots__ = ("asso_idx", "row_splits")

    def __init__(self, asso_idx, row_splits):
        arr = np.ascontiguousarray(asso_idx, dtype=np.int64)
        if arr.ndim != 1:
            raise BadShapeError("association ids must be 1-d")
        if not isinstance(row_splits, RowSplits):
            row_splits = RowSplits(row_splits)
        n_v = row_splits.n_vertices
        if arr.size != n_v:
            raise ShapeMismatchError(
                f"{arr.size} association ids for {n_v} vertices"
            )
        arr.flags.writeable = False
        self.asso_idx = arr
        self.row_splits = row_splits

    @property
    def n_vertices(self) -> int:
        return self.asso_idx.size

    def __repr__(self) -> str:
        return (f"Associations(n_vertices={self.n_vertices}, "
                f"n_splits={self.row_splits.n_splits})")


class UniqueObjects:
    """Objects in scan order: distinct ids per split, first occurrence first."""

    __slots__ = ("unique_idx", "unique_rs_asso")

    def __init__(self, unique_idx, unique_rs_asso):
        ids = np.ascontiguousarray(unique_idx, dtype=np.int64)
        rs = np.ascontiguousarray(unique_rs_asso, dtype=np.int64)
        if ids.ndim != 1 or rs.shape != ids.shape:
            raise BadShapeError("unique ids and splits must be 1-d and equally long")
        ids.flags.writeable = False
        rs.flags.writeable = False
        self.unique_idx = ids
        self.unique_rs_asso = rs

    @property
    def n_unique(self) -> int:
        return self.unique_idx.size

    def __repr__(self) -> str:
        return f"UniqueObjects(n_unique={self.n_unique})"


class AssociationMatrices:
    """M / M-not rows per object plus the instrumentation counter.

    visit_count is the number of window entries the builder scanned: one
    visit per vertex of each object's window, whether or not M-not was
    requested (members and non-members come from the same pass).
    """

    __slots__ = ("unique", "m", "m_not", "visit_count")

    def __init__(self, unique, m, m_not, visit_count):
        self.unique = unique
        self.m = m
        self.m_not = m_not
        self.visit_count = int(visit_count)
        m.flags.writeable = False
        if m_not is not None:
            m_not.flags.writeable = False

    def __repr__(self) -> str:
        shape_not = None if self.m_not is None else self.m_not.shape
        return (f"AssociationMatrices(m={self.m.shape}, m_not={shape_not}, "
                f"visits={self.visit_count})")


def find_unique(assoc: Associations) -> UniqueObjects:
    """Distinct non-negative ids per split, in first-occurrence order.

    The same id in two splits yields two objects, one per split.
    """
    ids = []
    splits = []
    asso = assoc.asso_idx
    for s in range(assoc.row_splits.n_splits):
        lo, hi = assoc.row_splits.bounds(s)
        seg = asso[lo:hi]
        seg = seg[seg >= 0]
        if seg.size == 0:
            continue
        vals, first = np.unique(seg, return_index=True)
        order = np.argsort(first, kind="stable")
        ids.extend(int(x) for x in vals[order])
        splits.extend([s] * vals.size)
    return UniqueObjects(np.asarray(ids, dtype=np.int64),
                         np.asarray(splits, dtype=np.int64))


def max_same_count(assoc: Associations, unique: UniqueObjects | None = None):
    """(largest member count, per-object counts in unique order).

    Sizes the M capacity so callers need not guess.
    """
    uniq = unique if unique is not None else find_unique(assoc)
    counts = np.empty(uniq.n_unique, dtype=np.int64)
    for i in range(uniq.n_unique):
        lo, hi = assoc.row_splits.bounds(int(uniq.unique_rs_asso[i]))
        counts[i] = int(np.count_nonzero(
            assoc.asso_idx[lo:hi] == uniq.unique_idx[i]))
    top = int(counts.max()) if counts.size else 0
    return top, counts


def oc_helper(assoc: Associations, unique: UniqueObjects | None = None, *,
              n_maxuq: int | None = None, n_maxrs: int | None = None,
              calc_m_not: bool = True) -> AssociationMatrices:
    """Build M (members per object) and optionally M-not (non-members).

    Each object scans one window: the first n_maxrs vertices of its own row
    split.  Window members go to its M row (ascending, truncated to
    n_maxuq); with calc_m_not the rest of the window goes to its M-not row.
    Rows end in a contiguous -1 suffix.

    Defaults keep every row complete: n_maxuq = largest member count,
    n_maxrs = largest row size (both at least 1).

    Parameters
    ----------
    assoc : Associations
    unique : UniqueObjects, optional
        Reuse a precomputed object list (must match assoc).
    n_maxuq : int, optional
        Capacity (columns) of M; rows truncate to it.
    n_maxrs : int, optional
        Scan-window cap and capacity of M-not.
    calc_m_not : bool
        Skip building M-not when False (same scan, fewer writes).
    """
    uniq = unique if unique is not None else find_unique(assoc)
    if n_maxuq is None:
        top, _ = max_same_count(assoc, uniq)
        n_maxuq = max(1, top)
    if n_maxrs is None:
        sizes = assoc.row_splits.sizes()
        n_maxrs = max(1, int(sizes.max()) if sizes.size else 0)
    n_maxuq = int(n_maxuq)
    n_maxrs = int(n_maxrs)
    if n_maxuq < 1 or n_maxrs < 1:
        raise BadCapacityError(
            f"capacities must be >= 1, got n_maxuq={n_maxuq}, n_maxrs={n_maxrs}"
        )

    n_u = uniq.n_unique
    m = np.full((n_u, n_maxuq), -1, dtype=np.int64)
    m_not = np.full((n_u, n_maxrs), -1, dtype=np.int64) if calc_m_not else None
    asso = assoc.asso_idx
    visits = 0
    for i in range(n_u):
        obj = int(uniq.unique_idx[i])
        start, row_end = assoc.row_splits.bounds(int(uniq.unique_rs_asso[i]))
        end = min(row_end, start + n_maxrs)
        window = asso[start:end]
        visits += end - start
        is_member = window == obj
        members = np.nonzero(is_member)[0][:n_maxuq]
        m[i, :members.size] = members + start
        if calc_m_not:
            others = np.nonzero(~is_member)[0][:n_maxrs]
            m_not[i, :others.size] = others + start
    return AssociationMatrices(uniq, m, m_not, visits)
