# cython: boundscheck=False, wraparound=False, initializedcheck=False
# cython: cdivision=True, language_level=3
"""Compiled kernels: bin-index build, expanding-ring kNN, brute-force kNN.

Observable behaviour matches ``_binned_py`` exactly; see that module.
Squared distances accumulate dimension by dimension in every path so the
binned and brute routes produce bitwise-identical values.  The query loop
parallelises over vertices; each query writes only its own output row, so
results do not depend on the thread count.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport floor

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.int8_t i8

cdef enum:
    MAX_BIN_DIMS = 5
    COORD_CACHE = 16

NAME = "compiled"


cdef inline f64 _dist2(const f64* a, const f64* b, int n_c) nogil:
    cdef f64 acc, d
    cdef int i
    if n_c == 3:
        acc = (a[0] - b[0]) * (a[0] - b[0])
        acc = acc + (a[1] - b[1]) * (a[1] - b[1])
        acc = acc + (a[2] - b[2]) * (a[2] - b[2])
        return acc
    if n_c == 2:
        acc = (a[0] - b[0]) * (a[0] - b[0])
        acc = acc + (a[1] - b[1]) * (a[1] - b[1])
        return acc
    acc = 0.0
    for i in range(n_c):
        d = a[i] - b[i]
        acc = acc + d * d
    return acc


cdef inline Py_ssize_t _find_split(const i64[::1] offsets, Py_ssize_t v) nogil:
    # bisect-right then step back: the unique split whose range holds v
    cdef Py_ssize_t lo = 0, hi = offsets.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if offsets[mid] <= <i64>v:
            lo = mid + 1
        else:
            hi = mid
    return lo - 1


# ---------------------------------------------------------------------------
# bin-index build

def build_index(const f64[:, ::1] coords, const i64[::1] offsets,
                int d_bin, i64 n_bins):
    """Cell assignment plus stable counting sort; returns the index arrays."""
    cdef Py_ssize_t n_v = coords.shape[0]
    cdef Py_ssize_t n_splits = offsets.shape[0] - 1
    cdef i64 total = 1
    cdef int i
    for i in range(d_bin):
        total *= n_bins
    cdef i64 n_cells = n_splits * total

    bin_idx_arr = np.empty(n_v, dtype=np.int64)
    sort_order_arr = np.empty(n_v, dtype=np.int64)
    bounds_arr = np.zeros(n_cells + 1, dtype=np.int64)
    mins_arr = np.zeros((n_splits, d_bin), dtype=np.float64)
    widths_arr = np.ones((n_splits, d_bin), dtype=np.float64)
    cursor_arr = np.empty(n_cells, dtype=np.int64)

    cdef i64[::1] bin_idx = bin_idx_arr
    cdef i64[::1] sort_order = sort_order_arr
    cdef i64[::1] bounds = bounds_arr
    cdef f64[:, ::1] mins = mins_arr
    cdef f64[:, ::1] widths = widths_arr
    cdef i64[::1] cursor = cursor_arr

    cdef Py_ssize_t s, v
    cdef int d
    cdef i64 lo, hi, cell, flat, c
    cdef f64 x, ext, w
    cdef f64 mn[MAX_BIN_DIMS]
    cdef f64 mx[MAX_BIN_DIMS]

    with nogil:
        for s in range(n_splits):
            lo = offsets[s]
            hi = offsets[s + 1]
            if hi <= lo:
                continue  # empty split keeps min 0.0 / width 1.0 defaults
            for d in range(d_bin):
                mn[d] = coords[lo, d]
                mx[d] = coords[lo, d]
            for v in range(lo, hi):
                for d in range(d_bin):
                    x = coords[v, d]
                    if x < mn[d]:
                        mn[d] = x
                    if x > mx[d]:
                        mx[d] = x
            for d in range(d_bin):
                ext = mx[d] - mn[d]
                w = ext / n_bins if ext > 0.0 else 1.0
                mins[s, d] = mn[d]
                widths[s, d] = w
            for v in range(lo, hi):
                flat = 0
                for d in range(d_bin):
                    cell = <i64>floor((coords[v, d] - mins[s, d]) / widths[s, d])
                    if cell < 0:
                        cell = 0
                    if cell >= n_bins:
                        cell = n_bins - 1
                    flat = flat * n_bins + cell
                bin_idx[v] = s * total + flat
        for v in range(n_v):
            bounds[bin_idx[v] + 1] += 1
        for c in range(n_cells):
            bounds[c + 1] += bounds[c]
            cursor[c] = bounds[c]
        for v in range(n_v):
            c = bin_idx[v]
            sort_order[cursor[c]] = v
            cursor[c] += 1

    return bin_idx_arr, sort_order_arr, bounds_arr, mins_arr, widths_arr


# ---------------------------------------------------------------------------
# ring enumeration (shared by the search loop and the public stepper check)

def ring_cells(const i64[::1] bin_counts, const i64[::1] center, i64 radius):
    """In-bounds surface cells at one Chebyshev radius, in step order."""
    cdef int n = bin_counts.shape[0]
    cdef i64 side = 2 * radius + 1
    cdef i64 cube = 1, inner = 1
    cdef int i
    for i in range(n):
        cube *= side
        inner *= side - 2
    if radius == 0:
        inner = 0
    out_arr = np.empty(cube - inner, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef i64 stepno, rem, mul, local, flat, g
    cdef i64 count = 0
    cdef bint on_surface, in_bounds
    with nogil:
        for stepno in range(cube):
            rem = stepno
            mul = cube
            on_surface = False
            in_bounds = True
            flat = 0
            for i in range(n):
                mul //= side
                local = rem // mul
                rem -= local * mul
                if local == 0 or local == 2 * radius:
                    on_surface = True
                g = local - radius + center[i]
                if g < 0 or g >= bin_counts[i]:
                    in_bounds = False
                    break
                flat = flat * bin_counts[i] + g
            if on_surface and in_bounds:
                out[count] = flat
                count += 1
    return out_arr[:count].copy()


# ---------------------------------------------------------------------------
# expanding-ring kNN

cdef void _search_one(Py_ssize_t v, const f64[:, ::1] coords,
                      const i64[::1] bin_idx, const i64[::1] sort_order,
                      const i64[::1] bin_bounds, const i64* bc, int nb,
                      i64 total_bins, const f64[::1] min_widths,
                      const i8[::1] dir_mask, bint use_dir,
                      f64 max_r2, bint use_max_r2, bint exhaustive, int k,
                      i32[:, ::1] out_idx, f64[:, ::1] out_d2) nogil:
    cdef int n_c = <int>coords.shape[1]
    cdef f64 qbuf[COORD_CACHE]
    cdef const f64* q
    cdef i64 center[MAX_BIN_DIMS]
    cdef int i, filled, max_slot
    cdef i64 radius, side, cube, stepno, rem, mul, local, flat, gcell, lo, hi, p, u
    cdef i64 split, goff, lf
    cdef f64 maxd2, d2, t, wmin
    cdef bint on_surface, in_bounds, any_in_grid

    out_idx[v, 0] = <i32>v
    out_d2[v, 0] = 0.0
    for i in range(1, k):
        out_idx[v, i] = -1
        out_d2[v, i] = 0.0
    if use_dir and (dir_mask[v] == 0 or dir_mask[v] == 2):
        return

    if n_c <= COORD_CACHE:
        for i in range(n_c):
            qbuf[i] = coords[v, i]
        q = qbuf
    else:
        q = &coords[v, 0]

    lf = bin_idx[v]
    split = lf // total_bins
    goff = split * total_bins
    lf -= goff
    for i in range(nb - 1, -1, -1):
        center[i] = lf % bc[i]
        lf //= bc[i]
    wmin = min_widths[split]

    filled = 1
    max_slot = 0
    maxd2 = 0.0
    radius = 0
    while True:
        any_in_grid = False
        side = 2 * radius + 1
        cube = 1
        for i in range(nb):
            cube *= side
        for stepno in range(cube):
            rem = stepno
            mul = cube
            on_surface = False
            in_bounds = True
            flat = 0
            for i in range(nb):
                mul //= side
                local = rem // mul
                rem -= local * mul
                if local == 0 or local == 2 * radius:
                    on_surface = True
                gcell = local - radius + center[i]
                if gcell < 0 or gcell >= bc[i]:
                    in_bounds = False
                    break
                flat = flat * bc[i] + gcell
            if not (on_surface and in_bounds):
                continue
            any_in_grid = True
            lo = bin_bounds[goff + flat]
            hi = bin_bounds[goff + flat + 1]
            for p in range(lo, hi):
                u = sort_order[p]
                if u == <i64>v:
                    continue
                if use_dir and (dir_mask[u] == 1 or dir_mask[u] == 2):
                    continue
                d2 = _dist2(q, &coords[u, 0], n_c)
                if use_max_r2 and d2 > max_r2:
                    continue
                if filled < k:
                    out_idx[v, filled] = <i32>u
                    out_d2[v, filled] = d2
                    if d2 > maxd2:
                        maxd2 = d2
                        max_slot = filled
                    filled += 1
                elif d2 < maxd2:
                    out_idx[v, max_slot] = <i32>u
                    out_d2[v, max_slot] = d2
                    maxd2 = out_d2[v, 0]
                    max_slot = 0
                    for i in range(1, k):
                        if out_d2[v, i] > maxd2:
                            maxd2 = out_d2[v, i]
                            max_slot = i
        if not any_in_grid:
            break
        if not exhaustive:
            if filled == k:
                t = wmin * <f64>radius
                if t * t > maxd2:
                    break
            elif use_max_r2:
                t = wmin * <f64>radius
                if t * t > max_r2:
                    break
        radius += 1
    for i in range(filled, k):
        out_idx[v, i] = -1
        out_d2[v, i] = 0.0


def binned_knn(const f64[:, ::1] coords, const i64[::1] bin_idx,
               const i64[::1] sort_order, const i64[::1] bin_bounds,
               const i64[::1] bin_counts, const f64[::1] min_widths,
               const i8[::1] dir_mask, bint use_dir,
               f64 max_r2, bint use_max_r2, bint exhaustive, int k,
               i32[:, ::1] out_idx, f64[:, ::1] out_d2, int threads):
    """Expanding-ring exact kNN over a bin index; fills caller arrays."""
    cdef Py_ssize_t n_v = coords.shape[0]
    cdef int nb = bin_counts.shape[0]
    cdef i64 bc[MAX_BIN_DIMS]
    cdef i64 total = 1
    cdef int i
    for i in range(nb):
        bc[i] = bin_counts[i]
        total *= bc[i]
    cdef Py_ssize_t v
    if threads <= 1:
        with nogil:
            for v in range(n_v):
                _search_one(v, coords, bin_idx, sort_order, bin_bounds, bc, nb,
                            total, min_widths, dir_mask, use_dir, max_r2,
                            use_max_r2, exhaustive, k, out_idx, out_d2)
    else:
        for v in prange(n_v, nogil=True, schedule="guided", num_threads=threads):
            _search_one(v, coords, bin_idx, sort_order, bin_bounds, bc, nb,
                        total, min_widths, dir_mask, use_dir, max_r2,
                        use_max_r2, exhaustive, k, out_idx, out_d2)


# ---------------------------------------------------------------------------
# brute force

cdef void _brute_one(Py_ssize_t v, const f64[:, ::1] coords,
                     const i64[::1] offsets, const i8[::1] dir_mask,
                     bint use_dir, f64 max_r2, bint use_max_r2, int k,
                     i32[:, ::1] out_idx, f64[:, ::1] out_d2) nogil:
    cdef int n_c = <int>coords.shape[1]
    cdef f64 qbuf[COORD_CACHE]
    cdef const f64* q
    cdef Py_ssize_t split
    cdef i64 lo, hi, u
    cdef int i, filled, max_slot
    cdef f64 maxd2, d2

    out_idx[v, 0] = <i32>v
    out_d2[v, 0] = 0.0
    for i in range(1, k):
        out_idx[v, i] = -1
        out_d2[v, i] = 0.0
    if use_dir and (dir_mask[v] == 0 or dir_mask[v] == 2):
        return

    if n_c <= COORD_CACHE:
        for i in range(n_c):
            qbuf[i] = coords[v, i]
        q = qbuf
    else:
        q = &coords[v, 0]

    split = _find_split(offsets, v)
    lo = offsets[split]
    hi = offsets[split + 1]
    filled = 1
    max_slot = 0
    maxd2 = 0.0
    for u in range(lo, hi):
        if u == <i64>v:
            continue
        if use_dir and (dir_mask[u] == 1 or dir_mask[u] == 2):
            continue
        d2 = _dist2(q, &coords[u, 0], n_c)
        if use_max_r2 and d2 > max_r2:
            continue
        if filled < k:
            out_idx[v, filled] = <i32>u
            out_d2[v, filled] = d2
            if d2 > maxd2:
                maxd2 = d2
                max_slot = filled
            filled += 1
        elif d2 < maxd2:
            out_idx[v, max_slot] = <i32>u
            out_d2[v, max_slot] = d2
            maxd2 = out_d2[v, 0]
            max_slot = 0
            for i in range(1, k):
                if out_d2[v, i] > maxd2:
                    maxd2 = out_d2[v, i]
                    max_slot = i


def brute_knn(const f64[:, ::1] coords, const i64[::1] offsets,
              const i8[::1] dir_mask, bint use_dir,
              f64 max_r2, bint use_max_r2, int k,
              i32[:, ::1] out_idx, f64[:, ::1] out_d2, int threads):
    """Full-scan exact kNN per split; fills caller arrays."""
    cdef Py_ssize_t n_v = coords.shape[0]
    cdef Py_ssize_t v
    if threads <= 1:
        with nogil:
            for v in range(n_v):
                _brute_one(v, coords, offsets, dir_mask, use_dir, max_r2,
                           use_max_r2, k, out_idx, out_d2)
    else:
        for v in prange(n_v, nogil=True, schedule="static", num_threads=threads):
            _brute_one(v, coords, offsets, dir_mask, use_dir, max_r2,
                       use_max_r2, k, out_idx, out_d2)
