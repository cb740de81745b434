import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdcscatter.grid import Entity, PolarGrid, UnknownLayout, build_grid

K = 2 * math.pi


@pytest.mark.parametrize(
    "R,ppw,N,m",
    [(3.0, 20, 41, 126), (3.0, 60, 121, 377), (2.0, 20, 21, 126), (2.0, 10, 11, 63)],
)
def test_grid_sizes(R, ppw, N, m):
    g = build_grid(1.0, R, K, ppw)
    assert (g.N, g.m) == (N, m)
    assert g.r[0] == 1.0 and g.r[-1] == pytest.approx(R)
    assert g.theta.shape == (m,)
    assert g.h == pytest.approx(2 * math.pi / m)


def test_shape_label_counts_intervals():
    assert build_grid(1.0, 3.0, K, 20).shape_label == "40x126"


def test_layout_size_and_indices():
    g = build_grid(1.0, 3.0, K, 20)
    lay = UnknownLayout.for_grid(g, 9)
    assert lay.size == 7308 == (41 - 1 + 18) * 126
    assert lay.flat_index(Entity("F", 0, 0)) == 40 * 126
    assert lay.flat_index(Entity("G", 0, 5)) == 41 * 126 + 5
    assert lay.u(0, 126) == 0  # periodic wrap


@given(flat=st.integers(0, 7307))
def test_layout_round_trip(flat):
    g = build_grid(1.0, 3.0, K, 20)
    lay = UnknownLayout.for_grid(g, 9)
    assert lay.flat_index(lay.entity(flat)) == flat


def test_split_join():
    g = build_grid(1.0, 2.0, K, 10)
    lay = UnknownLayout.for_grid(g, 3)
    x = np.arange(lay.size, dtype=complex)
    assert np.array_equal(lay.join(*lay.split(x)), x)


def test_invalid_grids():
    with pytest.raises(ValueError):
        build_grid(1.0, 0.5, K, 20)
    with pytest.raises(ValueError):
        build_grid(1.0, 1.05, K, 20)  # too few radial points
    with pytest.raises(ValueError):
        PolarGrid(1.0, 2.0, 10, 4, K, 1.0)
    with pytest.raises(ValueError):
        build_grid(1.0, 2.0, -1.0, 20)
