import math

import numpy as np
import pytest

from kdcscatter import assemble_second_order, build_grid
from kdcscatter.dc import (
    CorrectionSpec,
    build_correction_vector,
    correction_interior,
    correction_recursion,
    rhs_for_order,
)
from kdcscatter.solver import OrderSolution, dc_ladder

K = 2 * math.pi


def _solution(grid, bc, L, fn, Ffn=None):
    """Grid function from fn(r, theta) on rings -1..N, plus Karp terms."""
    r = grid.r0 + grid.dr * np.arange(-1, grid.N + 1)
    ext = fn(r[:, None], grid.theta[None, :]).astype(complex)
    F = np.zeros((L, grid.m), complex) if Ffn is None else Ffn(grid.theta)
    G = np.zeros_like(F) if Ffn is None else 0.5 * Ffn(grid.theta)
    inner = ext[0] if bc == "neumann" else None
    return OrderSolution(0, grid, L, bc, ext[1:-1], F, G, ext[-1], inner)


def test_spec_terms():
    s = CorrectionSpec(6)
    assert s.qs == (4, 6)
    assert [s.accuracy(q) for q in s.qs] == [4, 2]
    assert len(s.terms) == 6
    for bad in (2, 5, 8):
        with pytest.raises(ValueError):
            CorrectionSpec(bad)
    assert CorrectionSpec(8, allow_experimental=True).qs == (4, 6, 8)


def test_interior_correction_on_cubic(small_grid):
    # stencils of degree >= 4 are exact on r^3: only the u_rrr term survives
    g = small_grid
    sol = _solution(g, "dirichlet", 3, lambda r, t: r**3 + 0 * t)
    c = correction_interior(sol, g, 4)
    expected = g.dr**2 / math.factorial(3) * 6 / g.r[1:, None]
    np.testing.assert_allclose(c[1:], np.broadcast_to(expected, c[1:].shape), rtol=1e-9)
    assert not c[0].any()


def test_recursion_correction_on_mode():
    m, n = 64, 3
    th = np.arange(m) * 2 * np.pi / m
    F = np.vstack([np.cos(n * th), np.zeros(m)])
    G = np.vstack([np.sin(n * th), np.zeros(m)])
    rf, rg = correction_recursion(F, G, 2 * np.pi / m, 4)
    dt = 2 * np.pi / m
    # dt^2/12 * d4/dtheta4 of the mode, to O(dt^2)
    np.testing.assert_allclose(rg[0], -(dt**2) / 12 * n**4 * np.cos(n * th), atol=dt**4 * n**6)
    np.testing.assert_allclose(rf[0], dt**2 / 12 * n**4 * np.sin(n * th), atol=dt**4 * n**6)


@pytest.mark.parametrize("p", [4, 6])
def test_linearity(small_grid, bc, p):
    g = small_grid
    s = assemble_second_order(g, 4, bc)
    rng = np.random.default_rng(7)

    def random_solution():
        u = rng.standard_normal((g.N, g.m)) + 1j * rng.standard_normal((g.N, g.m))
        F = rng.standard_normal((4, g.m)) + 0j
        G = rng.standard_normal((4, g.m)) + 0j
        gi = rng.standard_normal(g.m) + 0j if bc == "neumann" else None
        return OrderSolution(p - 2, g, 4, bc, u, F, G, rng.standard_normal(g.m) + 0j, gi)

    a, b = random_solution(), random_solution()
    alpha, beta = 0.3 - 1.2j, 2.5
    combo = OrderSolution(
        p - 2, g, 4, bc,
        alpha * a.u + beta * b.u, alpha * a.F + beta * b.F, alpha * a.G + beta * b.G,
        alpha * a.ghost_outer + beta * b.ghost_outer,
        None if bc == "dirichlet" else alpha * a.ghost_inner + beta * b.ghost_inner,
    )
    va, _ = build_correction_vector(s, a, p)
    vb, _ = build_correction_vector(s, b, p)
    vc, _ = build_correction_vector(s, combo, p)
    ref = alpha * va + beta * vb
    assert np.linalg.norm(vc - ref) / np.linalg.norm(ref) < 1e-13


def test_zero_input_gives_zero_correction(small_grid, bc):
    s = assemble_second_order(small_grid, 4, bc)
    sol = _solution(small_grid, bc, 4, lambda r, t: 0 * r * t)
    vec, data = build_correction_vector(s, sol, 6)
    assert not vec.any()
    assert not data.outer.any()


def test_zero_corrections_reproduce_second_order(small_grid, bc):
    plain = dc_ladder(small_grid, 4, bc, p_target=2)
    zero = dc_ladder(small_grid, 4, bc, p_target=6, zero_corrections=True)
    for p in (4, 6):
        d = np.linalg.norm(zero[p].u - plain[2].u) / np.linalg.norm(plain[2].u)
        assert d < 1e-13


def test_second_order_rhs_is_plain(small_grid):
    s = assemble_second_order(small_grid, 4, "dirichlet")
    b, data = rhs_for_order(s, None, 2)
    np.testing.assert_array_equal(b, s.rhs)
    assert data.inner is None
    with pytest.raises(ValueError):
        rhs_for_order(s, None, 4)


def test_mismatched_solution_rejected(small_grid):
    s = assemble_second_order(small_grid, 4, "dirichlet")
    sol = _solution(small_grid, "neumann", 4, lambda r, t: r + 0 * t)
    with pytest.raises(ValueError):
        build_correction_vector(s, sol, 4)
    sol = _solution(small_grid, "dirichlet", 5, lambda r, t: r + 0 * t)
    with pytest.raises(ValueError):
        build_correction_vector(s, sol, 4)
