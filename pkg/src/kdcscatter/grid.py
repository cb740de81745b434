"""Annular polar grid and the global ordering of unknowns.

Rings are indexed from 0 (the obstacle, r = r0) to ``N - 1`` (the artificial
boundary, r = R). Angular columns are indexed 0..m-1 and wrap periodically.

The ring at r = R carries no unknowns of its own: its values follow from the
truncated Karp expansion (continuity), so the field unknowns are rings
0..N-2, followed by the angular coefficients F_0, G_0, ..., F_{L-1}, G_{L-1}.
The system size is therefore (N - 1 + 2L) * m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = ["PolarGrid", "UnknownLayout", "Entity", "build_grid", "MIN_RADIAL", "MIN_ANGULAR"]

MIN_RADIAL = 6
MIN_ANGULAR = 7


@dataclass(frozen=True)
class PolarGrid:
    r0: float
    R: float
    N: int
    m: int
    k: float
    ppw: float

    def __post_init__(self):
        if not (0 < self.r0 < self.R):
            raise ValueError(f"need 0 < r0 < R, got r0={self.r0}, R={self.R}")
        if self.N < MIN_RADIAL:
            raise ValueError(f"need N >= {MIN_RADIAL} radial points, got {self.N}")
        if self.m < MIN_ANGULAR:
            raise ValueError(f"need m >= {MIN_ANGULAR} angular points, got {self.m}")
        if self.k <= 0:
            raise ValueError(f"wavenumber must be positive, got {self.k}")

    @property
    def dr(self) -> float:
        return (self.R - self.r0) / (self.N - 1)

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.m

    @property
    def h(self) -> float:
        """Grid size as reported in convergence tables, r0 * dtheta."""
        return self.r0 * self.dtheta

    @property
    def h_max(self) -> float:
        return max(self.dr, self.r0 * self.dtheta)

    @property
    def r(self) -> np.ndarray:
        r = self.r0 + self.dr * np.arange(self.N)
        r[-1] = self.R
        return r

    @property
    def theta(self) -> np.ndarray:
        return self.dtheta * np.arange(self.m)

    @property
    def shape_label(self) -> str:
        return f"{self.N - 1}x{self.m}"


def build_grid(r0: float, R: float, k: float, ppw: float) -> PolarGrid:
    """Grid with m fixed by the obstacle circumference and dr close to r0*dtheta."""
    if r0 <= 0 or R <= r0:
        raise ValueError(f"need 0 < r0 < R, got r0={r0}, R={R}")
    if k <= 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    if ppw < 10:
        raise ValueError(f"points per wavelength must be >= 10, got {ppw}")
    wavelength = 2.0 * math.pi / k
    # round before ceil so 2*pi*20 = 125.66.. stays exact in the last ulp
    m = math.ceil(round(2.0 * math.pi * r0 * ppw / wavelength, 9))
    dtheta = 2.0 * math.pi / m
    N = round((R - r0) / (r0 * dtheta)) + 1
    return PolarGrid(r0=r0, R=R, N=N, m=m, k=k, ppw=ppw)


class Entity(NamedTuple):
    """One unknown: ``kind`` is 'U', 'F' or 'G'; ``index`` is a ring or a term number."""

    kind: str
    index: int
    j: int


@dataclass(frozen=True)
class UnknownLayout:
    n_rings: int  # rings carrying unknowns, N - 1
    m: int
    L: int

    @classmethod
    def for_grid(cls, grid: PolarGrid, L: int) -> "UnknownLayout":
        if L < 1:
            raise ValueError(f"need at least one Karp term, got L={L}")
        return cls(grid.N - 1, grid.m, L)

    @property
    def size(self) -> int:
        return (self.n_rings + 2 * self.L) * self.m

    @property
    def u_size(self) -> int:
        return self.n_rings * self.m

    def u(self, ring, j):
        return np.asarray(ring) * self.m + np.mod(j, self.m)

    def f(self, l, j):
        return (self.n_rings + 2 * np.asarray(l)) * self.m + np.mod(j, self.m)

    def g(self, l, j):
        return (self.n_rings + 2 * np.asarray(l) + 1) * self.m + np.mod(j, self.m)

    def flat_index(self, entity: Entity) -> int:
        kind, idx, j = entity
        if not 0 <= j < self.m:
            raise IndexError(f"angular index {j} out of range [0, {self.m})")
        if kind == "U":
            if not 0 <= idx < self.n_rings:
                raise IndexError(f"ring {idx} carries no unknown (valid 0..{self.n_rings - 1})")
            return int(self.u(idx, j))
        if kind in ("F", "G"):
            if not 0 <= idx < self.L:
                raise IndexError(f"Karp term {idx} out of range [0, {self.L})")
            return int(self.f(idx, j) if kind == "F" else self.g(idx, j))
        raise ValueError(f"unknown entity kind {kind!r}")

    def entity(self, flat: int) -> Entity:
        if not 0 <= flat < self.size:
            raise IndexError(f"flat index {flat} out of range [0, {self.size})")
        block, j = divmod(int(flat), self.m)
        if block < self.n_rings:
            return Entity("U", block, j)
        l, which = divmod(block - self.n_rings, 2)
        return Entity("G" if which else "F", l, j)

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Field rings (n_rings, m), F (L, m) and G (L, m) views of a flat vector."""
        u = x[: self.u_size].reshape(self.n_rings, self.m)
        fg = x[self.u_size :].reshape(self.L, 2, self.m)
        return u, fg[:, 0, :], fg[:, 1, :]

    def join(self, u: np.ndarray, F: np.ndarray, G: np.ndarray) -> np.ndarray:
        fg = np.stack([F, G], axis=1)
        return np.concatenate([np.asarray(u).ravel(), fg.ravel()])
