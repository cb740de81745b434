"""Integer-order Bessel and Hankel functions of real argument.

J_n is computed for all orders at once by Miller's downward recurrence,
normalized with J_0 + 2 sum J_2k = 1. Y_0 and Y_1 come from their Neumann
series in the same J_n sequence, and Y_n follows by upward recurrence,
which is stable for the second kind. Every function broadcasts over ``x``.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "MAX_ORDER",
    "bessel_jy_table",
    "bessel_j",
    "bessel_y",
    "hankel1",
    "bessel_j_deriv",
    "bessel_y_deriv",
    "hankel1_deriv",
]

MAX_ORDER = 128

_EULER_GAMMA = 0.57721566490153286061
_BIG = 1e250


def _check_order(n: int, max_order: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"order must be a non-negative integer, got {n!r}")
    if n > max_order:
        raise ValueError(f"order {n} exceeds the configured maximum {max_order}")
    return int(n)


def _check_arg(x, allow_zero: bool) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise ValueError("argument must be finite")
    if allow_zero:
        if np.any(x < 0):
            raise ValueError("argument must be >= 0")
    elif np.any(x <= 0):
        raise ValueError("argument must be > 0")
    return x


def _miller_start(nmax: int, xmax: float) -> int:
    n = max(nmax, int(math.ceil(xmax)))
    start = n + 20 + int(math.sqrt(160.0 * (n + 1)))
    return start + (start % 2)  # even, so the normalization sum pairs up


def _j_sequence(nmax: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_M (M >= nmax) for positive 1-D ``x`` by Miller's algorithm."""
    start = _miller_start(nmax, float(x.max()))
    out = np.zeros((start + 1, x.size))
    jp = np.zeros_like(x)  # J_{k+1}
    jk = np.full_like(x, 1e-300)  # J_k, arbitrary seed
    out[start] = jk
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        jm = (2.0 * k / x) * jk - jp
        jp, jk = jk, jm
        out[k - 1] = jm
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * jm
        big = np.abs(jm) > _BIG
        if big.any():
            out[k - 1 :, big] /= _BIG
            jp[big] /= _BIG
            jk[big] /= _BIG
            norm[big] /= _BIG
    norm += out[0]
    return out / norm


def bessel_jy_table(nmax: int, x, max_order: int = MAX_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """J_n(x) and Y_n(x) for n = 0..nmax, each shaped ``(nmax + 1,) + x.shape``."""
    nmax = _check_order(nmax, max_order)
    x = _check_arg(x, allow_zero=False)
    flat = x.ravel()
    jseq = _j_sequence(max(nmax, 1) + 1, flat)
    m = jseq.shape[0] - 1
    logt = np.log(flat / 2.0) + _EULER_GAMMA
    k = np.arange(1, m // 2 + 1)
    sgn = ((-1.0) ** k)[:, None]
    even = jseq[2 * k]
    y0 = (2.0 / np.pi) * logt * jseq[0] - (4.0 / np.pi) * np.sum(sgn * even / k[:, None], axis=0)
    kk = np.arange(1, (m - 1) // 2 + 1)
    odd_diff = jseq[2 * kk - 1] - jseq[2 * kk + 1]
    y1 = (2.0 / np.pi) * (logt * jseq[1] - jseq[0] / flat) + (2.0 / np.pi) * np.sum(
        ((-1.0) ** kk)[:, None] * odd_diff / kk[:, None], axis=0
    )
    y = np.empty((nmax + 1, flat.size))
    y[0] = y0
    if nmax >= 1:
        y[1] = y1
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nmax):
            y[n + 1] = (2.0 * n / flat) * y[n] - y[n - 1]
    shape = (nmax + 1,) + x.shape
    return jseq[: nmax + 1].reshape(shape), y.reshape(shape)


def bessel_j(n: int, x, max_order: int = MAX_ORDER):
    """J_n(x) for x >= 0."""
    n = _check_order(n, max_order)
    x = _check_arg(x, allow_zero=True)
    out = np.empty(x.shape)
    zero = x == 0
    out[zero] = 1.0 if n == 0 else 0.0
    if (~zero).any():
        out[~zero] = _j_sequence(n, x[~zero])[n]
    return out[()] if out.ndim == 0 else out


def bessel_y(n: int, x, max_order: int = MAX_ORDER):
    """Y_n(x) for x > 0."""
    n = _check_order(n, max_order)
    _, y = bessel_jy_table(n, x, max_order)
    out = y[n]
    return out[()] if out.ndim == 0 else out


def hankel1(n: int, x, max_order: int = MAX_ORDER):
    """H_n^(1)(x) = J_n(x) + i Y_n(x) for x > 0."""
    n = _check_order(n, max_order)
    j, y = bessel_jy_table(n, x, max_order)
    out = j[n] + 1j * y[n]
    return out[()] if out.ndim == 0 else out


def _deriv(table_fn, n: int, x, max_order: int):
    # F'_n = F_{n-1} - (n/x) F_n, with F'_0 = -F_1
    n = _check_order(n, max_order)
    x = _check_arg(x, allow_zero=False)
    f = table_fn(n + 1, x, max_order)
    if n == 0:
        out = -f[1]
    else:
        out = f[n - 1] - (n / x) * f[n]
    return out[()] if np.ndim(out) == 0 else out


def bessel_j_deriv(n: int, x, max_order: int = MAX_ORDER):
    return _deriv(lambda nm, xx, mo: bessel_jy_table(nm, xx, mo)[0], n, x, max_order)


def bessel_y_deriv(n: int, x, max_order: int = MAX_ORDER):
    return _deriv(lambda nm, xx, mo: bessel_jy_table(nm, xx, mo)[1], n, x, max_order)


def hankel1_deriv(n: int, x, max_order: int = MAX_ORDER):
    def table(nm, xx, mo):
        j, y = bessel_jy_table(nm, xx, mo)
        return j + 1j * y

    return _deriv(table, n, x, max_order)
