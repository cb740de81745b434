"""Deferred-correction forcing terms.

The order-p solve reuses the second-order matrix and only changes the data:

    A2 U^p = b + b_DC^p(U^{p-2}).

Every correction is a truncated Taylor remainder of a centered second-order
difference, q = 4, 6, ..., p, with derivative q (and q - 1 for the radial
first-derivative term) estimated from U^{p-2} at accuracy p + 2 - q. Radial
stencils are centered where they fit and shifted one-sided near the obstacle
and the artificial boundary; they may use one ghost ring past r = R and,
for the Neumann condition, one ghost ring inside r = r0. Angular stencils are
always centered and periodic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from . import fdstencil as fd
from .grid import PolarGrid, UnknownLayout

if TYPE_CHECKING:
    from .assembly import ScatteringSystem
    from .solver import OrderSolution

__all__ = [
    "CorrectionSpec",
    "SUPPORTED_ORDERS",
    "correction_interior",
    "correction_boundary",
    "correction_recursion",
    "correction_neumann",
    "build_correction_vector",
    "rhs_for_order",
]

SUPPORTED_ORDERS = (4, 6)


@dataclass(frozen=True)
class CorrectionTerm:
    """One Taylor block: derivative ``q`` at stencil accuracy ``accuracy``, scaled by ``scale``."""

    target: str  # "radial_even", "radial_odd", "angular"
    q: int
    accuracy: int
    scale: float  # multiplies h^{q-2}; the 1/r, 1/r^2 factors are applied per ring


@dataclass(frozen=True)
class CorrectionSpec:
    p: int
    allow_experimental: bool = False

    def __post_init__(self):
        if self.p < 4 or self.p % 2:
            raise ValueError(f"correction order must be even and >= 4, got {self.p}")
        if self.p not in SUPPORTED_ORDERS and not self.allow_experimental:
            raise ValueError(f"order {self.p} is not supported; pass allow_experimental=True to try it")

    @property
    def qs(self) -> tuple[int, ...]:
        return tuple(range(4, self.p + 1, 2))

    def accuracy(self, q: int) -> int:
        return self.p + 2 - q

    @cached_property
    def terms(self) -> tuple[CorrectionTerm, ...]:
        out = []
        for q in self.qs:
            a = self.accuracy(q)
            out.append(CorrectionTerm("radial_even", q, a, 2.0 / math.factorial(q)))
            out.append(CorrectionTerm("radial_odd", q - 1, a, 1.0 / math.factorial(q - 1)))
            out.append(CorrectionTerm("angular", q, a, 2.0 / math.factorial(q)))
        return tuple(out)


def _lowest_ring(bc: str) -> int:
    return -1 if bc == "neumann" else 0


def _radial_derivative(ext: np.ndarray, ring: int, q: int, acc: int, grid: PolarGrid, lo_ring: int) -> np.ndarray:
    """q-th radial derivative at ``ring`` from the extended array (ghost rows at both ends)."""
    B = grid.N - 1
    st = fd.fitted(q, acc, lo_ring - ring, B + 1 - ring)
    out = np.zeros(ext.shape[1], dtype=complex)
    for s, w in zip(st.offsets, st.float_weights):
        out += w * ext[ring + s + 1]
    return out / grid.dr**q


def correction_interior(U_prev: "OrderSolution", grid: PolarGrid, p: int, allow_experimental: bool = False) -> np.ndarray:
    """Interior Helmholtz corrections on rings 0..N-1, shaped (N, m).

    Ring 0 is zero for the Dirichlet condition (identity rows, no truncation).
    """
    spec = CorrectionSpec(p, allow_experimental)
    ext = U_prev.extended()
    lo = _lowest_ring(U_prev.bc)
    r = grid.r
    out = np.zeros((grid.N, grid.m), dtype=complex)
    first = 0 if U_prev.bc == "neumann" else 1
    for ring in range(first, grid.N):
        acc = np.zeros(grid.m, dtype=complex)
        for q in spec.qs:
            a = spec.accuracy(q)
            hr = grid.dr ** (q - 2)
            ht = grid.dtheta ** (q - 2)
            acc += 2.0 * hr / math.factorial(q) * _radial_derivative(ext, ring, q, a, grid, lo)
            acc += hr / (math.factorial(q - 1) * r[ring]) * _radial_derivative(ext, ring, q - 1, a, grid, lo)
            acc += 2.0 * ht / (math.factorial(q) * r[ring] ** 2) * fd.apply_periodic(
                fd.centered(q, a), ext[ring + 1], grid.dtheta
            )
        out[ring] = acc
    return out


def correction_boundary(U_prev: "OrderSolution", grid: PolarGrid, p: int, allow_experimental: bool = False):
    """Corrections (c1, c2) of the first- and second-derivative matching rows at r = R."""
    spec = CorrectionSpec(p, allow_experimental)
    ext = U_prev.extended()
    lo = _lowest_ring(U_prev.bc)
    B = grid.N - 1
    c1 = np.zeros(grid.m, dtype=complex)
    c2 = np.zeros(grid.m, dtype=complex)
    for q in spec.qs:
        a = spec.accuracy(q)
        h = grid.dr ** (q - 2)
        c1 += h / math.factorial(q - 1) * _radial_derivative(ext, B, q - 1, a, grid, lo)
        c2 += 2.0 * h / math.factorial(q) * _radial_derivative(ext, B, q, a, grid, lo)
    return c1, c2


def correction_recursion(F_prev: np.ndarray, G_prev: np.ndarray, dtheta: float, p: int, allow_experimental: bool = False):
    """Right-hand sides of the recursion rows for l = 1..L-1: (F-row, G-row), each (L-1, m)."""
    spec = CorrectionSpec(p, allow_experimental)
    F_prev = np.asarray(F_prev)
    G_prev = np.asarray(G_prev)
    m = F_prev.shape[1]
    if m < max(fd.centered(q, spec.accuracy(q)).width for q in spec.qs):
        raise ValueError(f"m={m} is too small for the angular correction stencils")
    rf = np.zeros((F_prev.shape[0] - 1, m), dtype=complex)
    rg = np.zeros_like(rf)
    for q in spec.qs:
        st = fd.centered(q, spec.accuracy(q))
        c = 2.0 * dtheta ** (q - 2) / math.factorial(q)
        rg -= c * fd.apply_periodic(st, F_prev[:-1], dtheta, axis=-1)
        rf += c * fd.apply_periodic(st, G_prev[:-1], dtheta, axis=-1)
    return rf, rg


def correction_neumann(U_prev: "OrderSolution", grid: PolarGrid, p: int, allow_experimental: bool = False) -> np.ndarray:
    """Correction of the Neumann first-derivative condition at r = r0."""
    if U_prev.bc != "neumann":
        raise ValueError("the obstacle correction only exists for the Neumann condition")
    spec = CorrectionSpec(p, allow_experimental)
    ext = U_prev.extended()
    c = np.zeros(grid.m, dtype=complex)
    for q in spec.qs:
        h = grid.dr ** (q - 2)
        c += h / math.factorial(q - 1) * _radial_derivative(ext, 0, q - 1, spec.accuracy(q), grid, -1)
    return c


@dataclass(frozen=True)
class BoundaryData:
    """Correction data entering the ghost-ring expressions of one solve."""

    outer: np.ndarray  # c1 at r = R
    inner: np.ndarray | None  # Neumann correction at r = r0


def build_correction_vector(system: "ScatteringSystem", U_prev: "OrderSolution", p: int, allow_experimental: bool = False):
    """b_DC^p(U^{p-2}) in layout order, plus the boundary data needed to rebuild ghosts.

    Returns ``(vector, BoundaryData)``. The vector already contains the ghost
    fold-in, so the order-p solve is ``A2 x = system.rhs + vector``.
    """
    grid, layout = system.grid, system.layout
    if layout != UnknownLayout.for_grid(grid, system.L) or U_prev.F.shape != (system.L, grid.m):
        raise ValueError("solution does not match the system layout")
    if U_prev.bc != system.bc:
        raise ValueError(f"solution bc {U_prev.bc!r} differs from system bc {system.bc!r}")
    m, B = grid.m, grid.N - 1
    vec = np.zeros(layout.size, dtype=complex)
    inter = correction_interior(U_prev, grid, p, allow_experimental)
    vec[: B * m] = inter[:B].ravel()
    c1, c2 = correction_boundary(U_prev, grid, p, allow_experimental)
    vec[system.boundary_helmholtz_rows] = inter[B]
    vec[system.second_derivative_rows] = c2
    rf, rg = correction_recursion(U_prev.F, U_prev.G, grid.dtheta, p, allow_experimental)
    jj = np.arange(m)
    for l in range(1, system.L):
        vec[layout.f(l, jj)] = rf[l - 1]
        vec[layout.g(l, jj)] = rg[l - 1]
    vec -= system.outer_ghost_map @ (grid.dr * c1)
    cin = None
    if system.bc == "neumann":
        cin = correction_neumann(U_prev, grid, p, allow_experimental)
        vec -= system.inner_ghost_map @ (grid.dr * cin)
    return vec, BoundaryData(c1, cin)


def rhs_for_order(system: "ScatteringSystem", U_prev: "OrderSolution | None", p: int, allow_experimental: bool = False):
    """Full right-hand side and boundary data for the order-p solve (p = 2 needs no source)."""
    if p == 2:
        return system.rhs.copy(), BoundaryData(np.zeros(system.grid.m, complex), None if system.bc == "dirichlet" else np.zeros(system.grid.m, complex))
    if U_prev is None:
        raise ValueError(f"order {p} needs the order {p - 2} solution")
    vec, data = build_correction_vector(system, U_prev, p, allow_experimental)
    return system.rhs + vec, data
