"""Pure numpy kernels: reference semantics for the compiled extension.

Same observable behaviour as ``_binned_cy``: identical cell assignment and
sort order (bitwise), identical candidate pools and ring-stop decisions, and
identical squared distances (per-dimension sequential accumulation in every
code path).  Only the slot order of the k-1 non-self neighbours may differ;
it is not part of the contract.  The ``threads`` argument is ignored.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

_BRUTE_CHUNK_FLOATS = 4_000_000  # ~32 MB scratch cap for the distance block


def build_index(coords, offsets, d_bin, n_bins):
    """Assign grid cells and sort vertices cell-major within each split."""
    n_v = coords.shape[0]
    n_splits = offsets.shape[0] - 1
    n_bins = int(n_bins)
    total = n_bins ** d_bin
    bin_idx = np.empty(n_v, dtype=np.int64)
    dim_mins = np.zeros((n_splits, d_bin), dtype=np.float64)
    widths = np.ones((n_splits, d_bin), dtype=np.float64)
    mult = n_bins ** np.arange(d_bin - 1, -1, -1, dtype=np.int64)
    for s in range(n_splits):
        lo, hi = int(offsets[s]), int(offsets[s + 1])
        if hi <= lo:
            continue  # empty split keeps min 0.0 / width 1.0 defaults
        pts = coords[lo:hi, :d_bin]
        mins = pts.min(axis=0)
        ext = pts.max(axis=0) - mins
        w = np.where(ext > 0.0, ext / n_bins, 1.0)
        cells = np.floor((pts - mins) / w).astype(np.int64)
        np.clip(cells, 0, n_bins - 1, out=cells)
        bin_idx[lo:hi] = s * total + cells @ mult
        dim_mins[s] = mins
        widths[s] = w
    sort_order = np.argsort(bin_idx, kind="stable").astype(np.int64)
    n_cells = n_splits * total
    counts = np.bincount(bin_idx, minlength=n_cells) if n_v else np.zeros(n_cells, dtype=np.int64)
    bin_bounds = np.zeros(n_cells + 1, dtype=np.int64)
    np.cumsum(counts, out=bin_bounds[1:])
    return bin_idx, sort_order, bin_bounds, dim_mins, widths


_EMPTY_I64 = np.empty(0, dtype=np.int64)


def _row_major_mult(counts):
    n = counts.shape[0]
    mult = np.empty(n, dtype=np.int64)
    acc = 1
    for i in range(n - 1, -1, -1):
        mult[i] = acc
        acc *= int(counts[i])
    return mult


def _ring_surface(counts, center, radius, mult):
    """Flat ids of the in-bounds cells at one Chebyshev radius, in row-major
    order over the cube, matching the order a BinStepper yields them in."""
    lo = np.maximum(center - radius, 0)
    hi = np.minimum(center + radius, counts - 1)
    if np.any(lo > hi):
        return _EMPTY_I64
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo.tolist(), hi.tolist())]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, counts.shape[0])
    on_surface = (np.abs(grid - center) == radius).any(axis=1)
    if not on_surface.all():
        grid = grid[on_surface]
    if grid.shape[0] == 0:
        return _EMPTY_I64
    return grid @ mult


def ring_cells(bin_counts, center, radius):
    """In-bounds surface cells at one Chebyshev radius, in step order."""
    from ..errors import OutOfRangeError

    counts = np.asarray(bin_counts, dtype=np.int64)
    cent = np.asarray(center, dtype=np.int64)
    if np.any(cent < 0) or np.any(cent >= counts):
        raise OutOfRangeError(
            f"center {cent.tolist()} outside grid {counts.tolist()}"
        )
    return _ring_surface(counts, cent, int(radius), _row_major_mult(counts))


def _unflatten(flat, counts):
    out = [0] * len(counts)
    rem = int(flat)
    for i in range(len(counts) - 1, -1, -1):
        out[i] = rem % counts[i]
        rem //= counts[i]
    return out


def _pair_dist2(pts, q):
    # sequential per-dimension accumulation, bitwise-stable across backends
    d2 = None
    for i in range(q.shape[0]):
        t = pts[:, i] - q[i]
        t = t * t
        d2 = t if d2 is None else d2 + t
    return d2


def binned_knn(coords, bin_idx, sort_order, bin_bounds, bin_counts, min_widths,
               dir_mask, use_dir, max_r2, use_max_r2, exhaustive, k,
               out_idx, out_d2, threads):
    """Expanding-ring exact kNN over a bin index; fills caller arrays."""
    n_v = coords.shape[0]
    counts = np.asarray(bin_counts, dtype=np.int64)
    counts_list = [int(c) for c in counts]
    mult = _row_major_mult(counts)
    total = 1
    for c in counts_list:
        total *= c
    out_idx[:] = -1
    out_d2[:] = 0.0
    out_idx[:, 0] = np.arange(n_v, dtype=np.int32)
    cand_ok = None
    if use_dir:
        cand_ok = (dir_mask != 1) & (dir_mask != 2)
    for v in range(n_v):
        if use_dir and (dir_mask[v] == 0 or dir_mask[v] == 2):
            continue
        gcell = int(bin_idx[v])
        split = gcell // total
        goff = split * total
        center = np.asarray(_unflatten(gcell - goff, counts_list), dtype=np.int64)
        q = coords[v]
        wmin = float(min_widths[split])
        pool_i = []
        pool_d = []
        pool_n = 0
        radius = 0
        while True:
            cells = _ring_surface(counts, center, radius, mult)
            if cells.size == 0:
                break
            gcells = cells + goff
            los = bin_bounds[gcells]
            his = bin_bounds[gcells + 1]
            occupied = np.nonzero(his > los)[0]
            if occupied.size:
                parts = [sort_order[los[j]:his[j]] for j in occupied.tolist()]
                cand = parts[0] if len(parts) == 1 else np.concatenate(parts)
                cand = cand[cand != v]
                if use_dir and cand.size:
                    cand = cand[cand_ok[cand]]
                if cand.size:
                    d2 = _pair_dist2(coords[cand], q)
                    if use_max_r2:
                        keep = d2 <= max_r2
                        cand, d2 = cand[keep], d2[keep]
                    if cand.size:
                        pool_i.append(cand)
                        pool_d.append(d2)
                        pool_n += cand.size
            if not exhaustive:
                if pool_n >= k - 1:
                    if k == 1:
                        kth = 0.0
                    else:
                        alld = pool_d[0] if len(pool_d) == 1 else np.concatenate(pool_d)
                        kth = np.partition(alld, k - 2)[k - 2]
                    t = wmin * radius
                    if t * t > kth:
                        break
                elif use_max_r2:
                    t = wmin * radius
                    if t * t > max_r2:
                        break
            radius += 1
        if pool_n:
            alli = pool_i[0] if len(pool_i) == 1 else np.concatenate(pool_i)
            alld = pool_d[0] if len(pool_d) == 1 else np.concatenate(pool_d)
            take = min(k - 1, pool_n)
            if take:
                order = np.argsort(alld, kind="stable")[:take]
                out_idx[v, 1:1 + take] = alli[order]
                out_d2[v, 1:1 + take] = alld[order]


def brute_knn(coords, offsets, dir_mask, use_dir, max_r2, use_max_r2, k,
              out_idx, out_d2, threads):
    """Full-scan exact kNN per split; the oracle the binned path is checked against."""
    n_v, n_c = coords.shape
    out_idx[:] = -1
    out_d2[:] = 0.0
    out_idx[:, 0] = np.arange(n_v, dtype=np.int32)
    for s in range(offsets.shape[0] - 1):
        lo, hi = int(offsets[s]), int(offsets[s + 1])
        m = hi - lo
        if m == 0:
            continue
        pts = coords[lo:hi]
        cand_bad = None
        if use_dir:
            dm = dir_mask[lo:hi]
            cand_bad = (dm == 1) | (dm == 2)
        chunk = max(1, _BRUTE_CHUNK_FLOATS // m)
        for c0 in range(lo, hi, chunk):
            c1 = min(c0 + chunk, hi)
            d2 = None
            for i in range(n_c):
                t = pts[None, :, i] - coords[c0:c1, None, i]
                t = t * t
                d2 = t if d2 is None else d2 + t
            rows = np.arange(c1 - c0)
            d2[rows, np.arange(c0 - lo, c1 - lo)] = np.inf
            if cand_bad is not None:
                d2[:, cand_bad] = np.inf
            if use_max_r2:
                d2[d2 > max_r2] = np.inf
            take = min(k - 1, m)
            if take:
                if take < m:
                    part = np.argpartition(d2, take - 1, axis=1)[:, :take]
                    pd = np.take_along_axis(d2, part, axis=1)
                    inner = np.argsort(pd, axis=1, kind="stable")
                    order = np.take_along_axis(part, inner, axis=1)
                else:
                    order = np.argsort(d2, axis=1, kind="stable")[:, :take]
                dd = np.take_along_axis(d2, order, axis=1)
                valid = np.isfinite(dd)
                out_idx[c0:c1, 1:1 + take] = np.where(valid, order + lo, -1).astype(np.int32)
                out_d2[c0:c1, 1:1 + take] = np.where(valid, dd, 0.0)
        if use_dir:
            dm = dir_mask[lo:hi]
            skip = (dm == 0) | (dm == 2)
            if np.any(skip):
                rows = np.nonzero(skip)[0] + lo
                out_idx[rows, 1:] = -1
                out_d2[rows, 1:] = 0.0
