"""Exact scattering of a plane wave e^{ikx} by a sound-soft or sound-hard disk.

The scattered field is the Hankel series

    u(r, theta) = sum_n a_n H_n(k r) cos(n theta),
    a_n = -eps_n i^n J_n(k r0) / H_n(k r0)        (Dirichlet)
    a_n = -eps_n i^n J'_n(k r0) / H'_n(k r0)      (Neumann)

with eps_0 = 1 and eps_n = 2 otherwise. The far-field pattern is returned in
the convention u ~ e^{ikr} r^{-1/2} P(theta).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .specialfun import bessel_jy_table

__all__ = [
    "BC_KINDS",
    "ExactConfig",
    "incident",
    "incident_dr",
    "exact_scattered",
    "exact_scattered_dr",
    "exact_ffp",
    "exact_karp_coefficients",
]

BC_KINDS = ("dirichlet", "neumann")


def incident(r, theta, k: float):
    """Spatial factor of the incident plane wave, e^{i k r cos theta}."""
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    if np.any(r < 0):
        raise ValueError("radius must be >= 0")
    return np.exp(1j * k * r * np.cos(theta))


def incident_dr(r, theta, k: float):
    """Radial derivative of the incident plane wave."""
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    c = np.cos(theta)
    return 1j * k * c * np.exp(1j * k * r * c)


@dataclass(frozen=True)
class ExactConfig:
    k: float
    r0: float
    bc: str = "dirichlet"
    nterms: int = 60

    def __post_init__(self):
        if self.bc not in BC_KINDS:
            raise ValueError(f"bc must be one of {BC_KINDS}, got {self.bc!r}")
        if self.k <= 0 or self.r0 <= 0:
            raise ValueError("k and r0 must be positive")
        need = math.ceil(self.k * self.r0) + 20
        if self.nterms < need:
            raise ValueError(f"nterms={self.nterms} too small; need >= {need} for k*r0={self.k * self.r0:g}")

    @cached_property
    def ratios(self) -> np.ndarray:
        """J_n(k r0)/H_n(k r0), or the ratio of derivatives for Neumann."""
        n = self.nterms
        z = self.k * self.r0
        J, Y = bessel_jy_table(n, z)
        H = J + 1j * Y
        if self.bc == "dirichlet":
            return J[:n] / H[:n]
        orders = np.arange(n)
        dJ = np.empty(n)
        dH = np.empty(n, dtype=complex)
        dJ[0], dH[0] = -J[1], -H[1]
        dJ[1:] = J[: n - 1] - orders[1:] / z * J[1:n]
        dH[1:] = H[: n - 1] - orders[1:] / z * H[1:n]
        return dJ / dH

    @cached_property
    def eps(self) -> np.ndarray:
        e = np.full(self.nterms, 2.0)
        e[0] = 1.0
        return e

    @cached_property
    def coefficients(self) -> np.ndarray:
        """a_n multiplying H_n(k r) cos(n theta) in the scattered field."""
        n = np.arange(self.nterms)
        return -self.eps * (1j**n) * self.ratios


def _modes(cfg: ExactConfig, theta) -> np.ndarray:
    theta = np.asarray(theta, float)
    n = np.arange(cfg.nterms).reshape((-1,) + (1,) * theta.ndim)
    return np.cos(n * theta)


def _radial_table(cfg: ExactConfig, r, deriv: int) -> np.ndarray:
    r = np.asarray(r, float)
    if np.any(r < cfg.r0 * (1 - 1e-12)):
        raise ValueError(f"radius must be >= r0={cfg.r0}")
    n = cfg.nterms
    J, Y = bessel_jy_table(n, cfg.k * r)
    H = J + 1j * Y
    if deriv == 0:
        return H[:n]
    z = cfg.k * r
    orders = np.arange(1, n).reshape((-1,) + (1,) * r.ndim)
    dH = np.empty((n,) + r.shape, dtype=complex)
    dH[0] = -H[1]
    dH[1:] = H[: n - 1] - orders / z * H[1:n]
    return cfg.k * dH


def exact_scattered(cfg: ExactConfig, r, theta):
    """Scattered field at (r, theta) for r >= r0 (broadcasting)."""
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    H = _radial_table(cfg, r, 0)
    a = cfg.coefficients.reshape((-1,) + (1,) * r.ndim)
    return np.sum(a * H * _modes(cfg, theta), axis=0)


def exact_scattered_dr(cfg: ExactConfig, r, theta):
    """Radial derivative of the scattered field, summed term by term."""
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    dH = _radial_table(cfg, r, 1)
    a = cfg.coefficients.reshape((-1,) + (1,) * r.ndim)
    return np.sum(a * dH * _modes(cfg, theta), axis=0)


def exact_ffp(cfg: ExactConfig, theta):
    """Far-field pattern P with u ~ e^{ikr} r^{-1/2} P(theta) as r -> infinity."""
    theta = np.asarray(theta, float)
    s = np.sum((cfg.eps * cfg.ratios).reshape((-1,) + (1,) * theta.ndim) * _modes(cfg, theta), axis=0)
    return -math.sqrt(2.0 / (cfg.k * math.pi)) * cmath.exp(-0.25j * math.pi) * s


def _karp_mode_table(nterms: int, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Karp coefficients of H_n(z) cos(n theta): H_n = H_0 sum f_l z^-l + H_1 sum g_l z^-l.

    Returns f, g of shape (L, nterms). The leading pair follows from the
    large-argument asymptotics (f_0 - i g_0 = (-i)^n); the rest from the
    recursions with d^2/dtheta^2 cos(n theta) = -n^2 cos(n theta).
    """
    n = np.arange(nterms, dtype=float)
    f = np.zeros((L, nterms))
    g = np.zeros((L, nterms))
    lead = (-1j) ** np.arange(nterms)
    f[0] = lead.real
    g[0] = -lead.imag
    for l in range(1, L):
        g[l] = ((l - 1) ** 2 - n**2) * f[l - 1] / (2 * l)
        f[l] = -(l**2 - n**2) * g[l - 1] / (2 * l)
    return f, g


def exact_karp_coefficients(cfg: ExactConfig, theta, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact angular functions F_l(theta), G_l(theta), l < L, shaped (L,) + theta.shape."""
    theta = np.asarray(theta, float)
    f, g = _karp_mode_table(cfg.nterms, L)
    modes = _modes(cfg, theta)  # (nterms,) + theta.shape
    a = cfg.coefficients
    F = np.tensordot(f * a, modes, axes=([1], [0]))
    G = np.tensordot(g * a, modes, axes=([1], [0]))
    return F, G
