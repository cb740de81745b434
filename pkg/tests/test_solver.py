import math
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from kdcscatter import assemble_second_order, build_grid, dc_ladder, factorize, solve, solve_ks4
from kdcscatter.oracle import ExactConfig, exact_ffp
from kdcscatter.postprocess import l2_rel_error, numerical_ffp
from kdcscatter.solver import ResidualWarning, exact_solution, factorization_count

K = 2 * math.pi


def test_one_factorization_per_ladder(small_grid, bc):
    before = factorization_count()
    out = dc_ladder(small_grid, 4, bc, p_target=6)
    assert factorization_count() - before == 1
    assert out.factorizations == 1
    assert sorted(out.orders) == [2, 4, 6]


def test_ks4_single_factorization(small_grid):
    before = factorization_count()
    out = solve_ks4(small_grid, 4, "dirichlet")
    assert factorization_count() - before == 1
    assert list(out.orders) == [4]


def test_solve_round_trip(small_grid):
    s = assemble_second_order(small_grid, 5, "neumann")
    fact = factorize(s)
    hist = []
    x = solve(fact, s.rhs, refine_steps=2, history=hist)
    assert fact.scaled_residual(x, s.rhs) < 1e-12
    assert hist[-1] < 1e-12
    # arbitrary data: the equilibrated matrix has condition ~1e8, so refinement
    # stalls near cond * eps and may trip the residual warning
    rng = np.random.default_rng(1)
    b = rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResidualWarning)
        assert fact.scaled_residual(solve(fact, b, refine_steps=3), b) < 1e-8


def test_solve_small_dense_system():
    A = sp.csr_matrix(np.array([[4.0, 1, 0], [1, 3, 1], [0, 1, 2]]) + 0j)
    b = np.array([1.0, 2, 3]) + 0j
    x = solve(factorize(A), b)
    np.testing.assert_allclose(x, np.linalg.solve(A.toarray(), b), rtol=1e-14)
    assert not solve(factorize(A), np.zeros(3)).any()


def test_solve_validation():
    fact = factorize(sp.identity(3, dtype=complex, format="csr"))
    with pytest.raises(ValueError):
        solve(fact, np.ones(4))
    with pytest.raises(ValueError):
        solve(fact, np.ones(3), refine_steps=4)
    with pytest.raises(np.linalg.LinAlgError):
        factorize(sp.csr_matrix(np.array([[1.0, 0], [0, 0]])))
    with pytest.raises(np.linalg.LinAlgError):
        factorize(sp.csr_matrix(np.array([[1.0, 1], [1, 1]])))


def test_unpack_consistency(small_grid, bc):
    out = dc_ladder(small_grid, 5, bc, p_target=4)
    s = out.system
    for sol in out.orders.values():
        np.testing.assert_allclose(sol.u[-1], s.karp_value(sol.F, sol.G, 0), rtol=1e-13)
        assert sol.residual < 1e-11
        assert sol.extended().shape == (small_grid.N + 2, small_grid.m)
    assert (out[2].ghost_inner is None) == (bc == "dirichlet")


def test_solution_tracks_exact_field(bc):
    g = build_grid(1.0, 2.0, K, 20)
    out = dc_ladder(g, 10, bc, p_target=6)
    ex = exact_solution(out.system)
    errs = [np.linalg.norm(out[p].u - ex.u) / np.linalg.norm(ex.u) for p in (2, 4, 6)]
    assert errs[0] > 10 * errs[1] > 10 * errs[2]


def test_ffp_errors_decrease_with_order():
    g = build_grid(1.0, 3.0, K, 20)
    out = dc_ladder(g, 13, "dirichlet")
    Pe = exact_ffp(ExactConfig(K, 1.0), g.theta)
    e = [l2_rel_error(numerical_ffp(out[p].F[0], out[p].G[0], K), Pe) for p in (2, 4, 6)]
    assert e[0] > e[1] > e[2]
    assert e[0] > 10 * e[2]
    assert e[2] < 1.8e-4


def test_ladder_argument_checks(small_grid):
    with pytest.raises(ValueError):
        dc_ladder(small_grid, 4, "dirichlet", p_target=8)
    with pytest.raises(ValueError):
        dc_ladder(small_grid, 4, "dirichlet", p_target=3)


def test_no_residual_warning_on_default_runs(small_grid):
    with warnings.catch_warnings():
        warnings.simplefilter("error", ResidualWarning)
        dc_ladder(small_grid, 8, "neumann")
