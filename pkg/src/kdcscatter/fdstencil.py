"""Finite-difference weights on arbitrary nodes (Fornberg's recursion).

Weights are generated in exact rational arithmetic and only converted to
floating point when a stencil is applied, so wide one-sided stencils do not
suffer from Vandermonde ill-conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "Stencil",
    "fd_weights",
    "centered",
    "one_sided_left",
    "one_sided_right",
    "fitted",
    "apply",
    "apply_periodic",
]


def fd_weights(eval_point, nodes: Sequence, q: int) -> list[Fraction]:
    """Weights approximating the q-th derivative at ``eval_point``.

    Fornberg (1988) recursion. ``nodes`` may be ints, Fractions or floats;
    floats are converted exactly to Fractions, so the result is exact for the
    given binary values.

    Returns a list with one weight per node, for unit spacing. Divide the
    weighted sum by ``h**q`` for spacing ``h``.
    """
    if q < 0:
        raise ValueError("derivative order must be non-negative")
    xs = [Fraction(x) for x in nodes]
    if len(set(xs)) != len(xs):
        raise ValueError(f"duplicate nodes in {list(nodes)!r}")
    if q >= len(xs):
        raise ValueError(f"need more than {q} nodes for derivative order {q}, got {len(xs)}")
    z = Fraction(eval_point)
    n = len(xs)
    # c[k][v]: weight of node v for derivative k using the first i+1 nodes
    c = [[Fraction(0)] * n for _ in range(q + 1)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = xs[0] - z
    for i in range(1, n):
        mn = min(i, q)
        c2 = Fraction(1)
        c5 = c4
        c4 = xs[i] - z
        for v in range(i):
            c3 = xs[i] - xs[v]
            c2 *= c3
            if v == i - 1:
                for k in range(mn, 0, -1):
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2
            for k in range(mn, 0, -1):
                c[k][v] = (c4 * c[k][v] - k * c[k - 1][v]) / c3
            c[0][v] = c4 * c[0][v] / c3
        c1 = c2
    return c[q]


@dataclass(frozen=True)
class Stencil:
    """Weights for the q-th derivative on integer offsets (unit spacing)."""

    deriv_order: int
    accuracy: int
    offsets: tuple[int, ...]
    weights: tuple[Fraction, ...]

    @cached_property
    def float_weights(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    @property
    def width(self) -> int:
        return len(self.offsets)

    @property
    def is_centered(self) -> bool:
        return self.offsets[0] == -self.offsets[-1]

    def exact_on_monomials(self, degree: int | None = None) -> bool:
        """Check sum(w * s**d) == d-th derivative of x**d at 0 for every d <= degree."""
        if degree is None:
            degree = self.width - 1
        q = self.deriv_order
        for d in range(degree + 1):
            lhs = sum(w * Fraction(s) ** d for w, s in zip(self.weights, self.offsets))
            rhs = Fraction(_falling(d, q)) if d == q else Fraction(0)
            if lhs != rhs:
                return False
        return True

    def __str__(self) -> str:
        terms = ", ".join(f"{s:+d}: {w}" for s, w in zip(self.offsets, self.weights))
        return f"D{self.deriv_order} O(h^{self.accuracy}) [{terms}]"


def _falling(d: int, q: int) -> int:
    out = 1
    for t in range(q):
        out *= d - t
    return out


def _check(q: int, p: int) -> None:
    if q < 1:
        raise ValueError(f"derivative order must be >= 1, got {q}")
    if p < 2 or p % 2:
        raise ValueError(f"accuracy must be an even integer >= 2, got {p}")


@lru_cache(maxsize=None)
def _make(q: int, p: int, offsets: tuple[int, ...]) -> Stencil:
    return Stencil(q, p, offsets, tuple(fd_weights(0, offsets, q)))


def centered(q: int, p: int) -> Stencil:
    """Centered stencil of order p for the q-th derivative."""
    _check(q, p)
    half = (q + p - 1) // 2
    return _make(q, p, tuple(range(-half, half + 1)))


def one_sided_left(q: int, p: int, rightmost_offset: int = 1) -> Stencil:
    """Left-biased stencil whose last node sits at ``rightmost_offset``.

    ``rightmost_offset=+1`` allows exactly one ghost node past a right boundary.
    """
    _check(q, p)
    w = q + p
    return _make(q, p, tuple(range(rightmost_offset - w + 1, rightmost_offset + 1)))


def one_sided_right(q: int, p: int, leftmost_offset: int = -1) -> Stencil:
    """Right-biased stencil whose first node sits at ``leftmost_offset``."""
    _check(q, p)
    w = q + p
    return _make(q, p, tuple(range(leftmost_offset, leftmost_offset + w)))


def fitted(q: int, p: int, lo: int, hi: int) -> Stencil:
    """Most centered order-p stencil for the q-th derivative that stays in [lo, hi].

    ``lo`` and ``hi`` are offsets (relative to the evaluation point) of the
    first and last available nodes. The centered stencil is used whenever it
    fits; otherwise a window of q + p nodes is shifted just far enough to fit.
    """
    _check(q, p)
    c = centered(q, p)
    if c.offsets[0] >= lo and c.offsets[-1] <= hi:
        return c
    w = q + p
    if hi - lo + 1 < w:
        raise ValueError(
            f"no order-{p} stencil for derivative {q} fits in offsets [{lo}, {hi}]"
        )
    start = -(w // 2)
    start = max(start, lo)
    start = min(start, hi - w + 1)
    return _make(q, p, tuple(range(start, start + w)))


def apply(stencil: Stencil, values: np.ndarray, index: int, h: float, axis: int = 0):
    """Apply a stencil at ``index`` of a bounded array along ``axis``."""
    values = np.asarray(values)
    lo = index + stencil.offsets[0]
    hi = index + stencil.offsets[-1]
    if lo < 0 or hi >= values.shape[axis]:
        raise IndexError(
            f"stencil {stencil.offsets} at index {index} leaves [0, {values.shape[axis] - 1}]"
        )
    taken = np.take(values, [index + s for s in stencil.offsets], axis=axis)
    taken = np.moveaxis(taken, axis, -1)
    return taken @ stencil.float_weights / h**stencil.deriv_order


def apply_periodic(stencil: Stencil, values: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Apply a stencil at every point of a periodic array along ``axis``."""
    values = np.asarray(values)
    out = np.zeros_like(values, dtype=np.result_type(values, float))
    for s, w in zip(stencil.offsets, stencil.float_weights):
        if w != 0.0:
            out += w * np.roll(values, -s, axis=axis)
    return out / h**stencil.deriv_order
