"""Walk the surface cells of an N-d hypercube of grid cells.

The ring search visits grid cells by Chebyshev radius around a centre cell:
radius 0 is the centre itself, radius d is the surface of the cube of side
2d+1.  The stepper enumerates exactly the in-bounds cells of one such
surface, in a fixed row-major order, without materialising the cube.
"""

from __future__ import annotations

import numpy as np

from .errors import BadShapeError, OutOfRangeError

__all__ = ["BinStepper", "ring_cells", "flatten_cell", "unflatten_cell"]

MAX_DIMS = 5


def flatten_cell(cells, bin_counts) -> int:
    """Row-major flat id of a cell; the last dimension varies fastest."""
    cells = np.asarray(cells, dtype=np.int64)
    counts = np.asarray(bin_counts, dtype=np.int64)
    if cells.shape != counts.shape or cells.ndim != 1:
        raise BadShapeError("cells and bin_counts must be 1-d and equally long")
    if np.any(cells < 0) or np.any(cells >= counts):
        raise OutOfRangeError(f"cell {cells.tolist()} outside grid {counts.tolist()}")
    flat = 0
    for c, n in zip(cells.tolist(), counts.tolist()):
        flat = flat * n + c
    return flat


def unflatten_cell(flat: int, bin_counts) -> np.ndarray:
    """Inverse of :func:`flatten_cell`."""
    counts = np.asarray(bin_counts, dtype=np.int64)
    total = int(np.prod(counts))
    if flat < 0 or flat >= total:
        raise OutOfRangeError(f"flat id {flat} outside grid of {total} cells")
    out = np.empty(counts.size, dtype=np.int64)
    rem = int(flat)
    for i in range(counts.size - 1, -1, -1):
        out[i] = rem % counts[i]
        rem //= int(counts[i])
    return out


class BinStepper:
    """Stateful enumerator of in-bounds surface cells at one Chebyshev radius.

    Counts the step index through the full (2d+1)^N cube in row-major order
    and yields only cells that lie on the surface and inside the grid.  A
    cell with any coordinate out of bounds is rejected as a whole.
    """

    __slots__ = ("bin_counts", "center", "_n", "_radius", "_side", "_cube", "_step")

    def __init__(self, bin_counts, center):
        counts = np.asarray(bin_counts, dtype=np.int64)
        cent = np.asarray(center, dtype=np.int64)
        if counts.ndim != 1 or cent.shape != counts.shape:
            raise BadShapeError("bin_counts and center must be 1-d and equally long")
        if counts.size < 1 or counts.size > MAX_DIMS:
            raise BadShapeError(f"stepper supports 1..{MAX_DIMS} dims, got {counts.size}")
        if np.any(counts < 1):
            raise BadShapeError("bin counts must be positive")
        if np.any(cent < 0) or np.any(cent >= counts):
            raise OutOfRangeError(
                f"center {cent.tolist()} outside grid {counts.tolist()}"
            )
        self.bin_counts = counts
        self.center = cent
        self._n = counts.size
        self.set_radius(0)

    @property
    def total_cells(self) -> int:
        return int(np.prod(self.bin_counts))

    def set_radius(self, radius: int) -> None:
        """Select the surface to enumerate and rewind the stepper."""
        if radius < 0:
            raise OutOfRangeError("radius must be >= 0")
        self._radius = int(radius)
        self._side = 2 * self._radius + 1
        self._cube = self._side ** self._n
        self._step = 0

    def step(self):
        """Next in-bounds surface cell as a flat id, or None when exhausted."""
        counts = self.bin_counts
        center = self.center
        d = self._radius
        side = self._side
        n = self._n
        while self._step < self._cube:
            rem = self._step
            self._step += 1
            mul = self._cube
            on_surface = False
            in_bounds = True
            flat = 0
            for i in range(n):
                mul //= side
                local = rem // mul
                rem -= local * mul
                if local == 0 or local == 2 * d:
                    on_surface = True
                g = local - d + int(center[i])
                if g < 0 or g >= counts[i]:
                    in_bounds = False
                    break
                flat = flat * int(counts[i]) + g
            if on_surface and in_bounds:
                return flat
        return None


def ring_cells(bin_counts, center, radius: int, backend=None) -> np.ndarray:
    """All in-bounds cells of one ring, in step order, as flat ids.

    Dispatches to the selected kernel backend; semantics are identical to
    driving :class:`BinStepper` by hand.
    """
    from . import _kernels

    kb = _kernels.get_backend(backend)
    counts = np.ascontiguousarray(bin_counts, dtype=np.int64)
    cent = np.ascontiguousarray(center, dtype=np.int64)
    if counts.ndim != 1 or cent.shape != counts.shape:
        raise BadShapeError("bin_counts and center must be 1-d and equally long")
    if radius < 0:
        raise OutOfRangeError("radius must be >= 0")
    if np.any(cent < 0) or np.any(cent >= counts):
        raise OutOfRangeError(f"center {cent.tolist()} outside grid {counts.tolist()}")
    return kb.ring_cells(counts, cent, int(radius))
