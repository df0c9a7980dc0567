"""Binary file formats for point clouds, neighbour lists and associations.

All integers and floats are little-endian.  Layouts:

* Point file, magic ``FGC1``: u32 n_v, u32 n_c, u32 n_splits,
  (n_splits+1) i64 row-split offsets, n_v*n_c f32 coordinates row-major.
* Neighbour file, magic ``FGN1``: u32 n_v, u32 k, n_v*k i32 indices,
  n_v*k f32 squared distances.
* Association file, magic ``FGA1``: u32 n_v, u32 n_splits,
  (n_splits+1) i64 offsets, n_v i32 association ids.
* Association-matrix file, magic ``FGM1``: u32 n_unique, u32 n_maxuq,
  u32 n_maxrs (0 when M-not is absent), u32 flags (bit 0: M-not present),
  u64 visit count, n_unique i64 object ids, n_unique i64 object splits,
  n_unique*n_maxuq i32 M, then optionally n_unique*n_maxrs i32 M-not.

Point files may also be plain CSV (one vertex per line, comma-separated
coordinates) for small hand-made cases; an optional first line
``splits:0,5,10`` carries the row-split offsets.
"""

from __future__ import annotations

import struct

import numpy as np

from ..core import PointCloud, NeighborMatrix, RowSplits
from ..errors import FileFormatError
from ..ocgraph import Associations, AssociationMatrices, UniqueObjects

__all__ = [
    "write_point_cloud", "read_point_cloud",
    "write_neighbors", "read_neighbors",
    "write_associations", "read_associations",
    "write_assoc_matrices", "read_assoc_matrices",
]

_MAGIC_POINTS = b"FGC1"
_MAGIC_NEIGHBORS = b"FGN1"
_MAGIC_ASSOC = b"FGA1"
_MAGIC_MATRICES = b"FGM1"


def _read_exact(f, count, what):
    data = f.read(count)
    if len(data) != count:
        raise FileFormatError(f"truncated file while reading {what}")
    return data


def _read_array(f, dtype, count, what):
    dt = np.dtype(dtype)
    return np.frombuffer(_read_exact(f, dt.itemsize * count, what), dtype=dt).copy()


def _is_csv(path) -> bool:
    return str(path).lower().endswith(".csv")


def write_point_cloud(path, cloud: PointCloud) -> None:
    """Write a point cloud; .csv paths get the text form, others FGC1."""
    if _is_csv(path):
        with open(path, "w", encoding="ascii") as f:
            offsets = ",".join(str(int(o)) for o in cloud.row_splits.offsets)
            f.write(f"splits:{offsets}\n")
            for row in cloud.coords:
                f.write(",".join(repr(float(x)) for x in row) + "\n")
        return
    with open(path, "wb") as f:
        f.write(_MAGIC_POINTS)
        f.write(struct.pack("<III", cloud.n_vertices, cloud.n_coords,
                            cloud.row_splits.n_splits))
        f.write(cloud.row_splits.offsets.astype("<i8").tobytes())
        f.write(cloud.coords.astype("<f4").tobytes())


def _read_point_csv(path) -> PointCloud:
    offsets = None
    rows = []
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("splits:"):
                offsets = [int(tok) for tok in line[len("splits:"):].split(",")]
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise FileFormatError(f"no coordinate rows in {path}")
    coords = np.asarray(rows, dtype=np.float64)
    if offsets is None:
        offsets = [0, coords.shape[0]]
    return PointCloud(coords, RowSplits(offsets))


def read_point_cloud(path) -> PointCloud:
    """Read FGC1 (or CSV by extension).  f32 coords widen to f64."""
    if _is_csv(path):
        return _read_point_csv(path)
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != _MAGIC_POINTS:
            raise FileFormatError(f"bad magic {magic!r}, expected {_MAGIC_POINTS!r}")
        n_v, n_c, n_splits = struct.unpack("<III", _read_exact(f, 12, "header"))
        offsets = _read_array(f, "<i8", n_splits + 1, "row splits")
        coords = _read_array(f, "<f4", n_v * n_c, "coordinates")
    coords = coords.astype(np.float64).reshape(n_v, n_c) if n_v else \
        np.zeros((0, max(n_c, 1)), dtype=np.float64)
    return PointCloud(coords, RowSplits(offsets))


def write_neighbors(path, neighbors: NeighborMatrix) -> None:
    with open(path, "wb") as f:
        f.write(_MAGIC_NEIGHBORS)
        f.write(struct.pack("<II", neighbors.n_vertices, neighbors.k))
        f.write(neighbors.indices.astype("<i4").tobytes())
        f.write(neighbors.dist2.astype("<f4").tobytes())


def read_neighbors(path) -> NeighborMatrix:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != _MAGIC_NEIGHBORS:
            raise FileFormatError(f"bad magic {magic!r}, expected {_MAGIC_NEIGHBORS!r}")
        n_v, k = struct.unpack("<II", _read_exact(f, 8, "header"))
        idx = _read_array(f, "<i4", n_v * k, "indices")
        d2 = _read_array(f, "<f4", n_v * k, "distances")
    return NeighborMatrix(idx.reshape(n_v, k), d2.astype(np.float64).reshape(n_v, k))


def write_associations(path, assoc: Associations) -> None:
    ids = assoc.asso_idx
    if ids.size and (ids.min() < -(2 ** 31) or ids.max() >= 2 ** 31):
        raise FileFormatError("association ids exceed the file format's i32 range")
    with open(path, "wb") as f:
        f.write(_MAGIC_ASSOC)
        f.write(struct.pack("<II", assoc.n_vertices, assoc.row_splits.n_splits))
        f.write(assoc.row_splits.offsets.astype("<i8").tobytes())
        f.write(ids.astype("<i4").tobytes())


def read_associations(path) -> Associations:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != _MAGIC_ASSOC:
            raise FileFormatError(f"bad magic {magic!r}, expected {_MAGIC_ASSOC!r}")
        n_v, n_splits = struct.unpack("<II", _read_exact(f, 8, "header"))
        offsets = _read_array(f, "<i8", n_splits + 1, "row splits")
        asso = _read_array(f, "<i4", n_v, "association ids")
    return Associations(asso.astype(np.int64), RowSplits(offsets))


def write_assoc_matrices(path, matrices: AssociationMatrices) -> None:
    uniq = matrices.unique
    has_not = matrices.m_not is not None
    n_maxrs = matrices.m_not.shape[1] if has_not else 0
    with open(path, "wb") as f:
        f.write(_MAGIC_MATRICES)
        f.write(struct.pack("<IIII", uniq.n_unique, matrices.m.shape[1],
                            n_maxrs, 1 if has_not else 0))
        f.write(struct.pack("<Q", matrices.visit_count))
        f.write(uniq.unique_idx.astype("<i8").tobytes())
        f.write(uniq.unique_rs_asso.astype("<i8").tobytes())
        f.write(matrices.m.astype("<i4").tobytes())
        if has_not:
            f.write(matrices.m_not.astype("<i4").tobytes())


def read_assoc_matrices(path) -> AssociationMatrices:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != _MAGIC_MATRICES:
            raise FileFormatError(f"bad magic {magic!r}, expected {_MAGIC_MATRICES!r}")
        n_unique, n_maxuq, n_maxrs, flags = struct.unpack(
            "<IIII", _read_exact(f, 16, "header"))
        visits = struct.unpack("<Q", _read_exact(f, 8, "visit count"))[0]
        unique_idx = _read_array(f, "<i8", n_unique, "object ids")
        unique_rs = _read_array(f, "<i8", n_unique, "object splits")
        m = _read_array(f, "<i4", n_unique * n_maxuq, "M").astype(np.int64)
        m_not = None
        if flags & 1:
            m_not = _read_array(f, "<i4", n_unique * n_maxrs, "M-not").astype(np.int64)
            m_not = m_not.reshape(n_unique, n_maxrs)
    uniq = UniqueObjects(unique_idx, unique_rs)
    return AssociationMatrices(uniq, m.reshape(n_unique, n_maxuq), m_not, int(visits))
