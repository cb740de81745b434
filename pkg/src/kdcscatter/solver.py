"""Direct solves, the deferred-correction ladder and the fourth-order standard scheme."""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .assembly import ScatteringSystem, assemble_second_order
from .dc import BoundaryData, rhs_for_order
from .specialfun import bessel_jy_table
from .grid import PolarGrid
from .oracle import ExactConfig, exact_karp_coefficients, exact_scattered, incident_dr

__all__ = [
    "Factorization",
    "ResidualWarning",
    "OrderSolution",
    "SolutionSet",
    "factorize",
    "solve",
    "unpack",
    "dc_ladder",
    "solve_ks4",
    "exact_solution",
    "factorization_count",
]

log = logging.getLogger(__name__)

RESIDUAL_REFINE = 1e-11
RESIDUAL_MAX = 1e-9

_factorizations = 0


def factorization_count() -> int:
    """Number of sparse factorizations performed in this process."""
    return _factorizations


class ResidualWarning(RuntimeWarning):
    pass


class Factorization:
    """LU factors of one sparse complex matrix, reused for every right-hand side.

    The matrix is equilibrated before factoring: columns by ``col_scale``
    (the Karp terms F_l, G_l grow like (kR)^l) and then rows by their largest
    entry. Solves and residual checks happen in the scaled variables, where
    the entries of the unknown vector are of comparable size.
    """

    def __init__(self, matrix, col_scale: np.ndarray | None = None):
        global _factorizations
        A = sp.csr_matrix(matrix)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"matrix must be square, got {A.shape}")
        n = A.shape[0]
        self.col_scale = np.ones(n) if col_scale is None else np.asarray(col_scale, float)
        As = A @ sp.diags(self.col_scale)
        rmax = abs(As).max(axis=1).toarray().ravel()
        if np.any(rmax == 0):
            raise np.linalg.LinAlgError(f"matrix has {int(np.sum(rmax == 0))} empty rows")
        self.row_scale = 1.0 / rmax
        self.scaled = (sp.diags(self.row_scale) @ As).tocsc()
        try:
            self._lu = sla.splu(self.scaled, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise np.linalg.LinAlgError(f"sparse factorization failed: {exc}") from exc
        self.matrix = A
        self.shape = A.shape
        self.n_solves = 0
        _factorizations += 1

    def backsolve(self, b: np.ndarray) -> np.ndarray:
        """Solve the scaled system for a scaled right-hand side."""
        self.n_solves += 1
        return self._lu.solve(np.asarray(b, dtype=complex))

    def scaled_residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        """Relative residual of the equilibrated system at the unscaled solution ``x``."""
        return _relres(self.scaled, x / self.col_scale, self.row_scale * rhs)


def factorize(system_or_matrix) -> Factorization:
    if isinstance(system_or_matrix, ScatteringSystem):
        return Factorization(system_or_matrix.matrix, system_or_matrix.column_scale)
    return Factorization(system_or_matrix)


def _relres(A, x, b) -> float:
    nb = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    return float(r / nb) if nb > 0 else float(r)


def solve(fact: Factorization, rhs: np.ndarray, refine_steps: int = 1, history: list | None = None) -> np.ndarray:
    """Solve with the stored factors; refine while the scaled residual is above 1e-11."""
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape != (fact.shape[0],):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({fact.shape[0]},)")
    if not 0 <= refine_steps <= 3:
        raise ValueError(f"refine_steps must be in 0..3, got {refine_steps}")
    if not rhs.any():
        return np.zeros_like(rhs)
    bs = fact.row_scale * rhs
    y = fact.backsolve(bs)
    res = _relres(fact.scaled, y, bs)
    if history is not None:
        history.append(res)
    for _ in range(refine_steps):
        if res <= RESIDUAL_REFINE:
            break
        y = y + fact.backsolve(bs - fact.scaled @ y)
        res = _relres(fact.scaled, y, bs)
        if history is not None:
            history.append(res)
    if res > RESIDUAL_MAX:
        warnings.warn(f"relative residual {res:.2e} exceeds {RESIDUAL_MAX:g}", ResidualWarning, stacklevel=2)
    return fact.col_scale * y


@dataclass
class OrderSolution:
    """Grid function of one solve: rings 0..N-1 (ring N-1 is r = R), Karp terms and ghosts."""

    order: int
    grid: PolarGrid
    L: int
    bc: str
    u: np.ndarray  # (N, m)
    F: np.ndarray  # (L, m)
    G: np.ndarray  # (L, m)
    ghost_outer: np.ndarray  # (m,), ring N
    ghost_inner: np.ndarray | None  # (m,), ring -1, Neumann only
    residual: float = float("nan")
    seconds: float = 0.0

    def extended(self) -> np.ndarray:
        """Rings -1..N stacked into (N + 2, m); the inner ghost is NaN for Dirichlet."""
        inner = self.ghost_inner if self.ghost_inner is not None else np.full(self.grid.m, np.nan + 0j)
        return np.vstack([inner, self.u, self.ghost_outer])

    def scaled(self, alpha: complex) -> "OrderSolution":
        return OrderSolution(
            self.order,
            self.grid,
            self.L,
            self.bc,
            alpha * self.u,
            alpha * self.F,
            alpha * self.G,
            alpha * self.ghost_outer,
            None if self.ghost_inner is None else alpha * self.ghost_inner,
        )


def _ghost(stencil, anchor: int, ghost_off: int, u_rings, data):
    """Solve the one-ghost derivative row sum(w_s U_{anchor+s}) = data for the ghost."""
    acc = np.asarray(data, dtype=complex).copy()
    for s, w in zip(stencil.offsets, stencil.float_weights):
        if s != ghost_off:
            acc -= w * u_rings[anchor + s]
    return acc / float(stencil.weights[stencil.offsets.index(ghost_off)])


def unpack(system: ScatteringSystem, x: np.ndarray, data: BoundaryData, order: int) -> OrderSolution:
    """Flat vector -> grid function, with ring B from continuity and ghosts rebuilt."""
    grid = system.grid
    layout = system.layout
    urings, F, G = layout.split(x)
    uB = system.karp_value(F, G, 0)
    u = np.vstack([urings, uB])
    B = grid.N - 1
    dr = grid.dr
    go = _ghost(system.plan.outer_d1, B, 1, u, dr * (system.karp_value(F, G, 1) + data.outer))
    gi = None
    if system.bc == "neumann":
        cin = data.inner if data.inner is not None else 0.0
        gi = _ghost(system.plan.inner_d1, 0, -1, u, dr * (-incident_dr(grid.r0, grid.theta, grid.k) + cin))
    return OrderSolution(order, grid, system.L, system.bc, u, F.copy(), G.copy(), go, gi)


@dataclass
class SolutionSet:
    """Ladder of solutions U^2, U^4, ... from one factorization."""

    system: ScatteringSystem
    orders: dict[int, OrderSolution] = field(default_factory=dict)
    factorizations: int = 0
    assembly_seconds: float = 0.0
    factor_seconds: float = 0.0

    def __getitem__(self, p: int) -> OrderSolution:
        return self.orders[p]

    @property
    def top(self) -> OrderSolution:
        return self.orders[max(self.orders)]

    @property
    def seconds(self) -> float:
        return self.assembly_seconds + self.factor_seconds + sum(s.seconds for s in self.orders.values())


def dc_ladder(
    grid: PolarGrid,
    L: int,
    bc: str,
    k: float | None = None,
    p_target: int = 6,
    refine_steps: int = 1,
    allow_experimental: bool = False,
    zero_corrections: bool = False,
) -> SolutionSet:
    """Solve A2 U^2 = b, then A2 U^p = b + b_DC^p(U^{p-2}) for p = 4, ..., p_target."""
    if p_target < 2 or p_target % 2 or (p_target > 6 and not allow_experimental):
        raise ValueError(f"p_target must be 2, 4 or 6, got {p_target}")
    t0 = time.perf_counter()
    system = assemble_second_order(grid, L, bc, k)
    t1 = time.perf_counter()
    fact = factorize(system)
    t2 = time.perf_counter()
    out = SolutionSet(system, factorizations=1, assembly_seconds=t1 - t0, factor_seconds=t2 - t1)
    prev = None
    for p in range(2, p_target + 1, 2):
        ts = time.perf_counter()
        if zero_corrections:
            b, data = rhs_for_order(system, None, 2)
        else:
            b, data = rhs_for_order(system, prev, p, allow_experimental)
        x = solve(fact, b, refine_steps)
        sol = unpack(system, x, data, p)
        sol.residual = fact.scaled_residual(x, b)
        sol.seconds = time.perf_counter() - ts
        log.debug("order %d: residual %.2e in %.3fs", p, sol.residual, sol.seconds)
        out.orders[p] = sol
        prev = sol
    return out


def solve_ks4(grid: PolarGrid, L: int, bc: str, k: float | None = None, refine_steps: int = 1) -> SolutionSet:
    """Standard fourth-order scheme, one solve."""
    from .ks4 import assemble_ks4

    t0 = time.perf_counter()
    system = assemble_ks4(grid, L, bc, k)
    t1 = time.perf_counter()
    fact = factorize(system)
    t2 = time.perf_counter()
    x = solve(fact, system.rhs, refine_steps)
    zero = BoundaryData(np.zeros(grid.m, complex), None if bc == "dirichlet" else np.zeros(grid.m, complex))
    sol = unpack(system, x, zero, 4)
    sol.residual = fact.scaled_residual(x, system.rhs)
    sol.seconds = time.perf_counter() - t2
    return SolutionSet(system, {4: sol}, factorizations=1, assembly_seconds=t1 - t0, factor_seconds=t2 - t1)


def exact_solution(system: ScatteringSystem, cfg: ExactConfig | None = None, order: int = 0) -> OrderSolution:
    """Exact scattered field restricted to the grid, with exact Karp terms and ghost values."""
    grid = system.grid
    if cfg is None:
        cfg = ExactConfig(grid.k, grid.r0, system.bc, nterms=max(60, int(np.ceil(grid.k * grid.R)) + 40))
    th = grid.theta
    u = exact_scattered(cfg, grid.r[:, None], th[None, :])
    F, G = exact_karp_coefficients(cfg, th, system.L)
    go = exact_scattered(cfg, grid.R + grid.dr, th)
    gi = None
    if system.bc == "neumann":
        # the series H_n(kr) continues analytically inside r0
        gi = _exact_inside(cfg, grid.r0 - grid.dr, th)
    return OrderSolution(order, grid, system.L, system.bc, u, F, G, go, gi)


def _exact_inside(cfg: ExactConfig, r: float, theta: np.ndarray) -> np.ndarray:
    J, Y = bessel_jy_table(cfg.nterms, cfg.k * r)
    H = (J + 1j * Y)[: cfg.nterms]
    n = np.arange(cfg.nterms)
    return np.cos(np.outer(theta, n)) @ (cfg.coefficients * H)
