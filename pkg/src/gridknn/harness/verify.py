"""Oracle verification: binned search against the brute-force route.

The comparison contract: per-vertex squared-distance lists must match as
multisets within a relative tolerance; neighbour index sets must match
exactly whenever the k-th/(k+1)-th distances do not tie (detected with one
extra brute-force slot).  Slot order is never compared.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..binning import BinningConfig, build_bin_index
from ..core import NeighborMatrix, PointCloud
from ..errors import VerificationFailedError
from ..knn import KnnOptions, binned_select_knn, brute_force_knn
from .datasets import generate_dataset

__all__ = [
    "sort_neighbor_rows",
    "sorted_valid_rows",
    "distance_checksum",
    "compare_knn_results",
    "VerifyCell",
    "default_sweep",
    "run_verification_sweep",
    "format_report",
]


def sorted_valid_rows(neighbors: NeighborMatrix):
    """Per row: (indices, dist2) of valid slots, sorted by (dist2, index)."""
    out = []
    for v in range(neighbors.n_vertices):
        idx = neighbors.indices[v]
        d2 = neighbors.dist2[v]
        keep = idx >= 0
        idx, d2 = idx[keep], d2[keep]
        order = np.lexsort((idx, d2))
        out.append((idx[order], d2[order]))
    return out


def sort_neighbor_rows(neighbors: NeighborMatrix) -> NeighborMatrix:
    """Same neighbours with slots 1..k-1 ordered by (dist2, index), -1 last."""
    k = neighbors.k
    idx = np.full_like(neighbors.indices, -1)
    d2 = np.zeros_like(neighbors.dist2)
    for v, (ri, rd) in enumerate(sorted_valid_rows(neighbors)):
        idx[v, :ri.size] = ri
        d2[v, :ri.size] = rd
    return NeighborMatrix(idx, d2)


def distance_checksum(neighbors: NeighborMatrix) -> str:
    """Order-invariant digest of the squared distances.

    Rows are sorted ascending (padding keeps distance 0), so any two exact
    results of the same query checksum identically regardless of slot order.
    """
    h = hashlib.sha256()
    h.update(np.int64(neighbors.n_vertices).tobytes())
    h.update(np.int64(neighbors.k).tobytes())
    h.update(np.ascontiguousarray(np.sort(neighbors.dist2, axis=1)).tobytes())
    return h.hexdigest()


def compare_knn_results(binned: NeighborMatrix, brute_plus1: NeighborMatrix,
                        k: int, rtol: float = 1e-5):
    """Check a binned result against a brute result run with k+1 slots.

    Returns (ok, n_bad_rows, first_bad_vertex).  The extra brute slot
    reveals whether the k-th neighbour is tied with the (k+1)-th; index
    sets are only required to match when it is not.
    """
    n_bad = 0
    first_bad = -1
    rows_binned = sorted_valid_rows(binned)
    rows_brute = sorted_valid_rows(brute_plus1)
    for v in range(binned.n_vertices):
        bi, bd = rows_binned[v]
        oi, od = rows_brute[v]
        ti, td = oi[:k], od[:k]
        row_ok = bi.size == ti.size and np.allclose(bd, td, rtol=rtol, atol=0.0)
        if row_ok:
            boundary_tied = od.size > k and od[k] <= td[-1] * (1.0 + rtol)
            if not boundary_tied and set(bi.tolist()) != set(ti.tolist()):
                row_ok = False
        if not row_ok:
            n_bad += 1
            if first_bad < 0:
                first_bad = v
    return n_bad == 0, n_bad, first_bad


@dataclass(frozen=True)
class VerifyCell:
    """One verified instance and its outcome."""

    d: int
    n: int
    k: int
    splits: int
    checksum_binned: str
    checksum_brute: str
    ok: bool


def default_sweep():
    """The standing sweep: d 2..10, n {1e2,1e3,1e4}, K {1,10,40}, splits {1,4}."""
    return (list(range(2, 11)), [100, 1000, 10000], [1, 10, 40], [1, 4])


def run_verification_sweep(dims=None, sizes=None, ks=None, splits_list=None, *,
                           seed: int = 0, threads: int = 0,
                           backend: str | None = None, rtol: float = 1e-5,
                           distribution: str = "uniform", progress=None):
    """Run binned-vs-brute over a grid of instances.

    Returns (cells, all_ok).  Each instance uses a seed derived from its
    cell position, so the sweep is reproducible and thread-count
    independent.
    """
    d_dims, d_sizes, d_ks, d_splits = default_sweep()
    dims = list(dims) if dims is not None else d_dims
    sizes = list(sizes) if sizes is not None else d_sizes
    ks = list(ks) if ks is not None else d_ks
    splits_list = list(splits_list) if splits_list is not None else d_splits

    cells = []
    all_ok = True
    case = 0
    for n in sizes:
        for d in dims:
            for k in ks:
                for splits in splits_list:
                    if n < splits:
                        continue
                    case += 1
                    cloud = generate_dataset(n, d, splits=splits,
                                             seed=seed + case,
                                             distribution=distribution)
                    index = build_bin_index(cloud, BinningConfig(k_target=k),
                                            backend=backend)
                    opts = KnnOptions(k=k)
                    res_b = binned_select_knn(cloud, index, opts,
                                              threads=threads, backend=backend)
                    res_o = brute_force_knn(cloud, KnnOptions(k=k + 1),
                                            threads=threads, backend=backend)
                    ok, _, _ = compare_knn_results(res_b, res_o, k, rtol=rtol)
                    trunc = _truncate_to_k(res_o, k)
                    cell = VerifyCell(d, n, k, splits,
                                      distance_checksum(res_b),
                                      distance_checksum(trunc), ok)
                    cells.append(cell)
                    all_ok = all_ok and ok
                    if progress is not None:
                        progress(cell)
    return cells, all_ok


def _truncate_to_k(neighbors: NeighborMatrix, k: int) -> NeighborMatrix:
    """Keep each row's k best (by distance, then index); used for checksums."""
    idx = np.full((neighbors.n_vertices, k), -1, dtype=np.int32)
    d2 = np.zeros((neighbors.n_vertices, k), dtype=np.float64)
    for v, (ri, rd) in enumerate(sorted_valid_rows(neighbors)):
        take = min(k, ri.size)
        idx[v, :take] = ri[:take]
        d2[v, :take] = rd[:take]
    return NeighborMatrix(idx, d2)


def format_report(cells) -> str:
    """Deterministic text report (no timings), one line per cell."""
    lines = ["d,n,k,splits,checksum_binned,checksum_brute,match"]
    for c in cells:
        lines.append(f"{c.d},{c.n},{c.k},{c.splits},"
                     f"{c.checksum_binned},{c.checksum_brute},"
                     f"{1 if c.ok else 0}")
    return "\n".join(lines) + "\n"


def raise_on_failure(cells, all_ok):
    if not all_ok:
        bad = [c for c in cells if not c.ok]
        first = bad[0]
        raise VerificationFailedError(
            f"{len(bad)} of {len(cells)} instances failed oracle comparison; "
            f"first failure at d={first.d}, n={first.n}, k={first.k}, "
            f"splits={first.splits}"
        )
