"""Hypercube surface stepper and ring enumeration."""

import itertools

import numpy as np
import pytest

from gridknn.errors import BadShapeError, OutOfRangeError
from gridknn.stepper import BinStepper, flatten_cell, ring_cells, unflatten_cell


def drive(counts, center, radius):
    st = BinStepper(counts, center)
    st.set_radius(radius)
    out = []
    while (c := st.step()) is not None:
        out.append(c)
    return out


class TestFlatten:
    def test_frozen(self):
        assert flatten_cell((1, 2, 3), (4, 5, 6)) == 45
        assert flatten_cell((0, 0), (5, 5)) == 0
        assert flatten_cell((4, 4), (5, 5)) == 24
        assert flatten_cell((2, 3), (5, 5)) == 13

    def test_roundtrip(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            counts = rng.integers(1, 8, size=n)
            cell = np.array([rng.integers(0, c) for c in counts])
            flat = flatten_cell(cell, counts)
            assert unflatten_cell(flat, counts).tolist() == cell.tolist()

    def test_last_dim_fastest(self):
        assert flatten_cell((0, 1), (3, 4)) == 1
        assert flatten_cell((1, 0), (3, 4)) == 4

    def test_errors(self):
        with pytest.raises(OutOfRangeError):
            flatten_cell((5, 0), (5, 5))
        with pytest.raises(OutOfRangeError):
            flatten_cell((-1, 0), (5, 5))
        with pytest.raises(BadShapeError):
            flatten_cell((1, 2, 3), (5, 5))
        with pytest.raises(OutOfRangeError):
            unflatten_cell(25, (5, 5))
        with pytest.raises(OutOfRangeError):
            unflatten_cell(-1, (5, 5))


class TestBinStepper:
    def test_radius_zero_is_center(self):
        assert drive((5, 5), (2, 2), 0) == [flatten_cell((2, 2), (5, 5))]

    def test_frozen_ring_interior(self):
        assert drive((5, 5), (2, 2), 1) == [6, 7, 8, 11, 13, 16, 17, 18]

    def test_frozen_ring_corner(self):
        assert drive((5, 5), (0, 0), 1) == [1, 5, 6]

    def test_ring_beyond_grid_is_empty(self):
        assert drive((3, 3), (1, 1), 5) == []

    def test_yields_in_ascending_flat_order(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            counts = rng.integers(1, 7, size=n)
            center = [int(rng.integers(0, c)) for c in counts]
            cells = drive(counts, center, int(rng.integers(0, 5)))
            assert cells == sorted(cells)
            assert len(cells) == len(set(cells))

    def test_surface_only_and_in_bounds(self):
        counts = (4, 5, 3)
        for center in itertools.product(range(4), range(5), range(3)):
            for radius in range(4):
                for flat in drive(counts, center, radius):
                    cell = unflatten_cell(flat, counts)
                    cheb = np.max(np.abs(cell - np.array(center)))
                    assert cheb == radius

    def test_set_radius_rewinds(self):
        st = BinStepper((5, 5), (2, 2))
        st.set_radius(1)
        first = st.step()
        st.set_radius(1)
        assert st.step() == first

    def test_errors(self):
        with pytest.raises(BadShapeError):
            BinStepper((5, 5, 5, 5, 5, 5), (0, 0, 0, 0, 0, 0))
        with pytest.raises(BadShapeError):
            BinStepper((5, 0), (0, 0))
        with pytest.raises(BadShapeError):
            BinStepper((5, 5), (0, 0, 0))
        with pytest.raises(OutOfRangeError):
            BinStepper((5, 5), (5, 0))
        st = BinStepper((5, 5), (0, 0))
        with pytest.raises(OutOfRangeError):
            st.set_radius(-1)

    def test_total_cells(self):
        assert BinStepper((4, 5, 3), (0, 0, 0)).total_cells == 60


def chebyshev_ball(counts, center, radius):
    """Oracle: all grid cells within Chebyshev distance radius, via numpy."""
    grids = np.indices(counts).reshape(len(counts), -1).T
    cheb = np.abs(grids - np.asarray(center)).max(axis=1)
    mult = np.array([int(np.prod(counts[i + 1:])) for i in range(len(counts))])
    return set((grids[cheb <= radius] @ mult).tolist())


def test_union_of_rings_is_chebyshev_ball():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(2, 4))
        counts = tuple(int(c) for c in rng.integers(1, 7, size=n))
        center = tuple(int(rng.integers(0, c)) for c in counts)
        radius = int(rng.integers(0, 4))
        seen = []
        for r in range(radius + 1):
            seen.extend(drive(counts, center, r))
        assert len(seen) == len(set(seen))
        assert set(seen) == chebyshev_ball(counts, center, radius)


class TestRingCells:
    def test_matches_stepper(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            n = int(rng.integers(1, 6))
            counts = rng.integers(1, 7, size=n)
            center = np.array([rng.integers(0, c) for c in counts])
            radius = int(rng.integers(0, 6))
            ref = drive(counts, center, radius)
            for backend in (None, "python"):
                got = ring_cells(counts, center, radius, backend=backend)
                assert got.tolist() == ref

    def test_validation(self):
        with pytest.raises(BadShapeError):
            ring_cells((5, 5), (0, 0, 0), 1)
        with pytest.raises(OutOfRangeError):
            ring_cells((5, 5), (0, 0), -1)
        with pytest.raises(OutOfRangeError):
            ring_cells((5, 5), (7, 0), 1)

    def test_empty_result_dtype(self):
        got = ring_cells((3, 3), (1, 1), 9)
        assert got.dtype == np.int64
        assert got.size == 0
