"""Farfield pattern, error norms, observed orders and CSV output."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .grid import PolarGrid
from .oracle import incident

__all__ = [
    "FFP_CONSTANT",
    "numerical_ffp",
    "l2_rel_error",
    "ConvergenceRecord",
    "observed_orders",
    "total_field_snapshot",
    "write_ffp_csv",
    "write_convergence_csv",
    "write_field_csv",
]

# e^{-i pi/4} sqrt(2/pi): H_0(z) F + H_1(z) G ~ sqrt(2/(pi z)) e^{i(z - pi/4)} (F - iG)
FFP_CONSTANT = math.sqrt(2.0 / math.pi) * complex(math.cos(math.pi / 4), -math.sin(math.pi / 4))


def numerical_ffp(F0, G0, k: float) -> np.ndarray:
    """Farfield pattern P with u ~ e^{ikr} r^{-1/2} P(theta), from the leading Karp pair.

    Multiply by sqrt(k) for the pattern f_0 of u ~ e^{ikr} (kr)^{-1/2} f_0.
    """
    F0 = np.asarray(F0, dtype=complex)
    G0 = np.asarray(G0, dtype=complex)
    if F0.shape != G0.shape:
        raise ValueError(f"F0 and G0 shapes differ: {F0.shape} vs {G0.shape}")
    return FFP_CONSTANT / math.sqrt(k) * (F0 - 1j * G0)


def l2_rel_error(numerical, exact) -> float:
    """Discrete relative L2 error with uniform weights."""
    numerical = np.asarray(numerical)
    exact = np.asarray(exact)
    if numerical.shape != exact.shape:
        raise ValueError(f"shapes differ: {numerical.shape} vs {exact.shape}")
    ne = np.linalg.norm(exact)
    if ne == 0:
        raise ValueError("exact values are all zero")
    return float(np.linalg.norm(numerical - exact) / ne)


def observed_orders(errors: Sequence[float], h: Sequence[float]) -> list[float]:
    """Pairwise log(err[i-1]/err[i]) / log(h[i-1]/h[i])."""
    e = np.asarray(errors, float)
    hh = np.asarray(h, float)
    if e.size != hh.size or e.size < 2:
        raise ValueError("need at least two (h, error) pairs of equal length")
    if np.any(e <= 0):
        raise ValueError("errors must be positive")
    if np.any(np.diff(hh) >= 0):
        raise ValueError("h must be strictly decreasing")
    return list(np.log(e[:-1] / e[1:]) / np.log(hh[:-1] / hh[1:]))


@dataclass
class ConvergenceRecord:
    scheme: str
    ppw: list[float] = field(default_factory=list)
    h: list[float] = field(default_factory=list)
    errors: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    grids: list[str] = field(default_factory=list)

    def add(self, ppw: float, h: float, error: float, seconds: float, grid: str = ""):
        self.ppw.append(ppw)
        self.h.append(h)
        self.errors.append(error)
        self.seconds.append(seconds)
        self.grids.append(grid)

    @property
    def orders(self) -> list[float]:
        if len(self.errors) < 2:
            return []
        return observed_orders(self.errors, self.h)


def total_field_snapshot(u: np.ndarray, grid: PolarGrid, k: float | None = None) -> np.ndarray:
    """|u_inc + u| on the grid, shaped (m, N) with the angle first."""
    k = grid.k if k is None else k
    u = np.asarray(u)
    if u.shape != (grid.N, grid.m):
        raise ValueError(f"field has shape {u.shape}, expected {(grid.N, grid.m)}")
    total = incident(grid.r[:, None], grid.theta[None, :], k) + u
    return np.abs(total).T


def write_ffp_csv(path, theta, numerical, exact) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "num_re", "num_im", "num_abs", "exact_re", "exact_im", "exact_abs"])
        for t, a, b in zip(theta, numerical, exact):
            w.writerow([f"{t:.17g}", f"{a.real:.17g}", f"{a.imag:.17g}", f"{abs(a):.17g}",
                        f"{b.real:.17g}", f"{b.imag:.17g}", f"{abs(b):.17g}"])


def write_convergence_csv(path, record: ConvergenceRecord, include_seconds: bool = True) -> None:
    orders = [float("nan")] + record.orders
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ppw", "grid", "h", "error", "order", "seconds"])
        for i in range(len(record.errors)):
            sec = f"{record.seconds[i]:.6f}" if include_seconds else ""
            o = "" if math.isnan(orders[i]) else f"{orders[i]:.4f}"
            w.writerow([f"{record.ppw[i]:g}", record.grids[i], f"{record.h[i]:.17g}", f"{record.errors[i]:.17g}", o, sec])


def write_field_csv(path, u: np.ndarray, grid: PolarGrid, k: float | None = None) -> None:
    """Total field u_inc + u on every grid node: r, theta, re, im, abs."""
    k = grid.k if k is None else k
    total = incident(grid.r[:, None], grid.theta[None, :], k) + np.asarray(u)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "theta", "re", "im", "abs"])
        for i, r in enumerate(grid.r):
            for j, t in enumerate(grid.theta):
                v = total[i, j]
                w.writerow([f"{r:.17g}", f"{t:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{abs(v):.17g}"])
