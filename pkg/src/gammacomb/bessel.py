"""First-kind Bessel function of order one.

Power series up to |y| = 12, Hankel's asymptotic expansion beyond.
"""

from __future__ import annotations

import math

import numpy as np

SERIES_LIMIT = 12.0
_SERIES_TERMS = 60
_HANKEL_TERMS = 30


def j1_over_half_arg(y):
    """J1(y) / (y/2) from its power series; equals 1 at y = 0."""
    y = np.asarray(y, dtype=float)
    h2 = (y / 2) ** 2
    term = np.ones_like(y)
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * (-h2) / (k * (k + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _hankel(y: np.ndarray) -> np.ndarray:
    mu = 4.0
    z = 8.0 * y
    p = np.ones_like(y)
    q = np.zeros_like(y)
    term = np.ones_like(y)
    last = np.full_like(y, np.inf)
    for k in range(1, _HANKEL_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (k * z)
        # the series is asymptotic: stop once the terms start to grow
        grow = np.abs(term) > last
        term = np.where(grow, 0.0, term)
        last = np.where(grow, 0.0, np.abs(term))
        if k % 2 == 1:
            q = q + (-1) ** ((k - 1) // 2) * term
        else:
            p = p + (-1) ** (k // 2) * term
    chi = y - 0.75 * math.pi
    return np.sqrt(2.0 / (math.pi * y)) * (p * np.cos(chi) - q * np.sin(chi))


def j1(y):
    """J1 for real arguments (odd in y)."""
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    out = np.empty_like(a)
    small = a <= SERIES_LIMIT
    out[small] = (a[small] / 2) * j1_over_half_arg(a[small])
    if np.any(~small):
        out[~small] = _hankel(a[~small])
    out = np.sign(y) * out
    return float(out) if out.ndim == 0 else out
