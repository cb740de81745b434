"""Sparse linear systems for the disk scattering problem with a Karp boundary.

Row blocks, in unknown order (see :class:`~kdcscatter.grid.UnknownLayout`):

* rings 0..N-2: obstacle condition on ring 0 (Dirichlet identity, or the
  Helmholtz row with the Neumann ghost eliminated), Helmholtz elsewhere;
* F_0 slot: Helmholtz at r = R, the ghost ring eliminated through the
  first-derivative matching condition and U(R) replaced by the Karp sum;
* G_0 slot: second-derivative matching at r = R, same eliminations;
* F_l, G_l slots (l >= 1): the two angular recursions.

Ghost values are never unknowns. Each ghost is replaced by the linear
expression obtained from its first-derivative condition; that expression
has a data part (incident-wave derivative, deferred corrections) which is
tracked in two sparse maps so right-hand sides can be rebuilt for any
correction without touching the matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import fdstencil as fd
from .grid import PolarGrid, UnknownLayout
from .oracle import BC_KINDS, incident, incident_dr
from .specialfun import bessel_jy_table

__all__ = [
    "KarpBoundaryCoeffs",
    "karp_radial_coeffs",
    "StencilPlan",
    "ScatteringSystem",
    "assemble_second_order",
    "assemble",
    "residual",
    "write_coo",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KarpBoundaryCoeffs:
    """d-th radial derivative at r = R of H_0(kr)/(kr)^l (``f``) and H_1(kr)/(kr)^l (``g``)."""

    k: float
    R: float
    d: int
    f: np.ndarray
    g: np.ndarray


def karp_radial_coeffs(k: float, R: float, L: int, d: int) -> KarpBoundaryCoeffs:
    if L < 1:
        raise ValueError(f"need L >= 1, got {L}")
    if d not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {d}")
    z = k * R
    J, Y = bessel_jy_table(1, z)
    h0, h1 = J[0] + 1j * Y[0], J[1] + 1j * Y[1]
    # derivatives in z of H_0 and H_1
    dh0, dh1 = -h1, h0 - h1 / z
    ddh0 = -dh1
    ddh1 = -h1 - h0 / z + 2.0 * h1 / z**2
    l = np.arange(L)
    zl = z ** (-l.astype(float))
    if d == 0:
        f, g = h0 * zl, h1 * zl
    elif d == 1:
        f = (dh0 - l / z * h0) * zl
        g = (dh1 - l / z * h1) * zl
    else:
        c1, c2 = 2.0 * l / z, l * (l + 1) / z**2
        f = (ddh0 - c1 * dh0 + c2 * h0) * zl
        g = (ddh1 - c1 * dh1 + c2 * h1) * zl
    return KarpBoundaryCoeffs(k, R, d, f * k**d, g * k**d)


@dataclass(frozen=True)
class StencilPlan:
    """Which stencils a scheme uses where. Offsets are relative to the evaluation ring."""

    name: str
    order: int
    radial: Callable[[int, int, str], tuple[fd.Stencil, fd.Stencil]]  # (ring, B, bc) -> (d2, d1)
    angular: fd.Stencil
    outer_d1: fd.Stencil  # first-derivative matching at r = R, one ghost node
    outer_d2: fd.Stencil  # second-derivative matching at r = R, one ghost node
    inner_d1: fd.Stencil  # Neumann condition at r = r0, one ghost node
    recursion: fd.Stencil


def _ks2_radial(ring: int, B: int, bc: str) -> tuple[fd.Stencil, fd.Stencil]:
    return fd.centered(2, 2), fd.centered(1, 2)


KS2_PLAN = StencilPlan(
    name="ks2",
    order=2,
    radial=_ks2_radial,
    angular=fd.centered(2, 2),
    outer_d1=fd.centered(1, 2),
    outer_d2=fd.centered(2, 2),
    inner_d1=fd.centered(1, 2),
    recursion=fd.centered(2, 2),
)


@dataclass
class ScatteringSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    layout: UnknownLayout
    grid: PolarGrid
    L: int
    bc: str
    k: float
    plan: StencilPlan
    karp: tuple[KarpBoundaryCoeffs, KarpBoundaryCoeffs, KarpBoundaryCoeffs]
    # row <- coefficient * (data part of the ghost expression at column j)
    outer_ghost_map: sp.csr_matrix
    inner_ghost_map: sp.csr_matrix | None
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.layout.size

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def ring_rows(self, ring: int) -> slice:
        m = self.grid.m
        return slice(ring * m, (ring + 1) * m)

    @property
    def boundary_helmholtz_rows(self) -> slice:
        return self.ring_rows(self.layout.n_rings)

    @property
    def second_derivative_rows(self) -> slice:
        return self.ring_rows(self.layout.n_rings + 1)

    @property
    def recursion_rows(self) -> slice:
        return slice((self.layout.n_rings + 2) * self.grid.m, self.size)

    @property
    def column_scale(self) -> np.ndarray:
        """(kR)^l on the F_l, G_l columns, 1 on the field columns; used to equilibrate."""
        lay = self.layout
        c = np.ones(lay.size)
        z = self.k * self.grid.R
        for l in range(self.L):
            c[lay.u_size + 2 * l * lay.m : lay.u_size + (2 * l + 2) * lay.m] = z**l
        return c

    def karp_value(self, F: np.ndarray, G: np.ndarray, d: int = 0) -> np.ndarray:
        """d-th radial derivative of the truncated Karp sum at r = R, per angle."""
        c = self.karp[d]
        return c.f @ F + c.g @ G


class _RowBuilder:
    """Collects COO triplets; expands references to ring B and to ghost rings."""

    def __init__(self, grid: PolarGrid, layout: UnknownLayout, plan: StencilPlan, karp, bc: str):
        self.grid, self.layout, self.plan, self.coeffs, self.bc = grid, layout, plan, karp, bc
        self.B = grid.N - 1
        self.m = grid.m
        self.jj = np.arange(self.m)
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []
        self.gout: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self.gin: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []

    def add(self, rows, cols, vals):
        rows = np.asarray(rows)
        self.rows.append(rows)
        self.cols.append(np.broadcast_to(np.asarray(cols), rows.shape).copy())
        self.vals.append(np.broadcast_to(np.asarray(vals, dtype=complex), rows.shape).copy())

    def karp(self, rows, d: int, shift: int, coef):
        cols = (self.jj + shift) % self.m
        c = self.coeffs[d]
        for l in range(self.layout.L):
            self.add(rows, self.layout.f(l, cols), coef * c.f[l])
            self.add(rows, self.layout.g(l, cols), coef * c.g[l])

    def u(self, rows, ring: int, shift: int, coef):
        B, dr = self.B, self.grid.dr
        if 0 <= ring < B:
            self.add(rows, self.layout.u(ring, self.jj + shift), coef)
        elif ring == B:
            self.karp(rows, 0, shift, coef)
        elif ring == B + 1:
            if shift:
                raise AssertionError("ghost ring referenced off its own column")
            st = self.plan.outer_d1
            wg = float(st.weights[st.offsets.index(1)])
            for s, w in zip(st.offsets, st.float_weights):
                if s != 1 and w != 0.0:
                    self.u(rows, B + s, 0, -coef * w / wg)
            self.karp(rows, 1, 0, coef * dr / wg)
            self.gout.append((np.asarray(rows), self.jj, np.broadcast_to(coef / wg, self.jj.shape)))
        elif ring == -1:
            if self.bc != "neumann" or shift:
                raise AssertionError("inner ghost ring is only defined for the Neumann condition")
            st = self.plan.inner_d1
            wg = float(st.weights[st.offsets.index(-1)])
            for s, w in zip(st.offsets, st.float_weights):
                if s != -1 and w != 0.0:
                    self.u(rows, s, 0, -coef * w / wg)
            self.gin.append((np.asarray(rows), self.jj, np.broadcast_to(coef / wg, self.jj.shape)))
        else:
            raise IndexError(f"ring {ring} is outside the grid and its ghost layer")

    def _ghost_map(self, parts, n):
        if not parts:
            return sp.csr_matrix((n, self.m), dtype=complex)
        r = np.concatenate([p[0] for p in parts])
        c = np.concatenate([p[1] for p in parts])
        v = np.concatenate([np.asarray(p[2], dtype=complex) for p in parts])
        return sp.csr_matrix((v, (r, c)), shape=(n, self.m))

    def finish(self, n: int):
        r = np.concatenate(self.rows)
        c = np.concatenate(self.cols)
        v = np.concatenate(self.vals)
        A = sp.csr_matrix((v, (r, c)), shape=(n, n))
        A.sum_duplicates()
        A.eliminate_zeros()
        return A, self._ghost_map(self.gout, n), self._ghost_map(self.gin, n)


def _helmholtz_ring(b: _RowBuilder, rows, ring: int):
    grid, plan = b.grid, b.plan
    dr, dth, k = grid.dr, grid.dtheta, grid.k
    r = grid.r[ring]
    d2, d1 = plan.radial(ring, b.B, b.bc)
    radial: dict[int, float] = {}
    for s, w in zip(d2.offsets, d2.float_weights):
        radial[s] = radial.get(s, 0.0) + w / dr**2
    for s, w in zip(d1.offsets, d1.float_weights):
        radial[s] = radial.get(s, 0.0) + w / (r * dr)
    radial[0] = radial.get(0, 0.0) + k**2
    for s, c in radial.items():
        if s != 0:
            b.u(rows, ring + s, 0, c)
    center = radial[0]
    for s, w in zip(plan.angular.offsets, plan.angular.float_weights):
        c = w / (r * r * dth**2)
        if s == 0:
            center += c
        else:
            b.u(rows, ring, s, c)
    b.u(rows, ring, 0, center)


def assemble(grid: PolarGrid, L: int, bc: str, k: float | None = None, plan: StencilPlan = KS2_PLAN) -> ScatteringSystem:
    """Assemble the matrix and data vector for one stencil plan."""
    if bc not in BC_KINDS:
        raise ValueError(f"bc must be one of {BC_KINDS}, got {bc!r}")
    if k is not None and not np.isclose(k, grid.k):
        raise ValueError(f"wavenumber {k} disagrees with the grid's {grid.k}")
    k = grid.k
    layout = UnknownLayout.for_grid(grid, L)
    karp = tuple(karp_radial_coeffs(k, grid.R, L, d) for d in range(3))
    b = _RowBuilder(grid, layout, plan, karp, bc)
    m, B, n = grid.m, grid.N - 1, layout.size
    jj = np.arange(m)
    rhs = np.zeros(n, dtype=complex)
    theta = grid.theta

    # obstacle
    rows0 = layout.u(0, jj)
    if bc == "dirichlet":
        b.add(rows0, rows0, 1.0)
        rhs[rows0] = -incident(grid.r0, theta, k)
    else:
        _helmholtz_ring(b, rows0, 0)

    for ring in range(1, B):
        _helmholtz_ring(b, layout.u(ring, jj), ring)

    rows_h = layout.f(0, jj)
    _helmholtz_ring(b, rows_h, B)

    rows_d2 = layout.g(0, jj)
    st = plan.outer_d2
    for s, w in zip(st.offsets, st.float_weights):
        if w != 0.0:
            b.u(rows_d2, B + s, 0, w / grid.dr**2)
    b.karp(rows_d2, 2, 0, -1.0)

    dth2 = grid.dtheta**2
    rec = plan.recursion
    for l in range(1, L):
        rg = layout.g(l, jj)
        b.add(rg, rg, 2.0 * l)
        b.add(rg, layout.f(l - 1, jj), -float((l - 1) ** 2))
        for s, w in zip(rec.offsets, rec.float_weights):
            b.add(rg, layout.f(l - 1, jj + s), -w / dth2)
        rf = layout.f(l, jj)
        b.add(rf, rf, 2.0 * l)
        b.add(rf, layout.g(l - 1, jj), float(l * l))
        for s, w in zip(rec.offsets, rec.float_weights):
            b.add(rf, layout.g(l - 1, jj + s), w / dth2)

    A, gout, gin = b.finish(n)
    if A.shape[0] != layout.size:
        raise RuntimeError("row count does not match the unknown layout")
    if bc == "neumann":
        # ghost = (dr * (-du_inc/dr + correction) - ...)/w ; data moves to the right
        rhs -= gin @ (grid.dr * -incident_dr(grid.r0, theta, k))
    else:
        gin = None
    return ScatteringSystem(
        matrix=A,
        rhs=rhs,
        layout=layout,
        grid=grid,
        L=L,
        bc=bc,
        k=k,
        plan=plan,
        karp=karp,
        outer_ghost_map=gout,
        inner_ghost_map=gin,
    )


def assemble_second_order(grid: PolarGrid, L: int, bc: str, k: float | None = None) -> ScatteringSystem:
    """Five-point Helmholtz scheme with second-order Karp boundary rows (matrix A2)."""
    return assemble(grid, L, bc, k, KS2_PLAN)


def residual(system: ScatteringSystem, x: np.ndarray, rhs: np.ndarray | None = None) -> float:
    """Relative residual ||A x - b|| / ||b||."""
    b = system.rhs if rhs is None else rhs
    nb = np.linalg.norm(b)
    r = np.linalg.norm(system.matrix @ x - b)
    return float(r / nb) if nb > 0 else float(r)


def write_coo(system: ScatteringSystem, path) -> None:
    """Write the matrix as 'row col re im' lines, 0-based, sorted by row then column."""
    A = system.matrix.tocoo()
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as fh:
        fh.write(f"# {A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for i in order:
            v = A.data[i]
            fh.write(f"{A.row[i]} {A.col[i]} {v.real:.17g} {v.imag:.17g}\n")
