"""Error-free transformations and compensated polynomial evaluation.

High-degree monomial sums on t in [0, 171] cancel catastrophically in plain
float64 Horner (6+ digits lost near the top of the domain for the bundled
degree-24 fits). Compensated Horner tracks the rounding residue with
TwoSum/TwoProd and folds it back once, giving results faithful to a
double-double evaluation at ordinary float64 cost.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

# Dekker splitting constant for binary64: 2**27 + 1.
_SPLIT = 134217729.0


def two_sum(a, b):
    """Return (s, e) with s = fl(a + b) and a + b = s + e exactly."""
    s = a + b
    bv = s - a
    e = (a - (s - bv)) + (b - bv)
    return s, e


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Return (p, e) with p = fl(a * b) and a * b = p + e exactly."""
    p = a * b
    a_hi, a_lo = _split(a)
    b_hi, b_lo = _split(b)
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


def _comp_horner_scalar(coeffs: Sequence[float], x: float) -> float:
    s = coeffs[-1]
    r = 0.0
    for c in reversed(coeffs[:-1]):
        p, pi = two_prod(s, x)
        s, sigma = two_sum(p, c)
        r = r * x + (pi + sigma)
    return s + r


def comp_horner(coeffs: Sequence[float], x):
    """Evaluate sum(coeffs[j] * x**j) by compensated Horner.

    coeffs are ascending (constant term first). x may be a float or a numpy
    array; the array path runs the same error-free transformations
    elementwise.
    """
    if len(coeffs) == 0:
        return np.zeros_like(x, dtype=float) if isinstance(x, np.ndarray) else 0.0
    if len(coeffs) == 1:
        c0 = float(coeffs[0])
        return np.full_like(x, c0, dtype=float) if isinstance(x, np.ndarray) else c0
    if isinstance(x, np.ndarray):
        xv = x.astype(float, copy=False)
        s = np.full_like(xv, float(coeffs[-1]))
        r = np.zeros_like(xv)
        for c in reversed(coeffs[:-1]):
            p, pi = two_prod(s, xv)
            s, sigma = two_sum(p, float(c))
            r = r * xv + (pi + sigma)
        return s + r
    return _comp_horner_scalar([float(c) for c in coeffs], float(x))
