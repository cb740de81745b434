"""The finite-L Karp problem has an error floor that no grid refinement removes."""

import math

import pytest

from kdcscatter import build_grid, dc_ladder
from kdcscatter.oracle import ExactConfig, exact_ffp
from kdcscatter.postprocess import l2_rel_error, numerical_ffp
from test_acceptance import FLOOR_R2
from truncated_kfe import ffp_floor

K = 2 * math.pi


@pytest.mark.parametrize("L", [4, 8])
def test_tabulated_floor(L):
    assert ffp_floor(K, 1.0, 2.0, L) == pytest.approx(FLOOR_R2[L], rel=0.01)


def test_floor_shrinks_with_more_terms():
    f = [ffp_floor(K, 1.0, 2.0, L) for L in (4, 6, 8, 10)]
    assert all(a > 10 * b for a, b in zip(f, f[1:]))


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_kdc6_approaches_floor(bc):
    # at L=4 the sixth-order grid error is far below the floor, so the
    # computed pattern error equals the floor to a few digits
    g = build_grid(1.0, 2.0, K, 30)
    sol = dc_ladder(g, 4, bc).top
    err = l2_rel_error(numerical_ffp(sol.F[0], sol.G[0], K), exact_ffp(ExactConfig(K, 1.0, bc), g.theta))
    assert err == pytest.approx(ffp_floor(K, 1.0, 2.0, 4, bc), rel=0.02)
