"""Least-squares polynomial and 2-piecewise fitting with antiderivatives.

Fitting a degree-24 monomial basis directly on t in [0, 171] is numerically
hopeless (Vandermonde condition ~1e40), but downstream closed-form fractional
calculus needs raw monomial coefficients. The compromise: fit in a Chebyshev
basis on the shifted/scaled interval [-1, 1], then expand back to raw
monomials in exact rational arithmetic so the only rounding is the final
float64 conversion per coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import FitError, ValidationError
from .numerics import comp_horner

__all__ = [
    "Polynomial",
    "PiecewisePolynomial",
    "FitStats",
    "fit_polynomial",
    "fit_piecewise",
    "goodness_of_fit",
    "estimate_breakpoint",
    "integrate_polynomial",
    "integrate_piecewise",
]

MAX_FIT_DEGREE = 30


@dataclass(frozen=True)
class Polynomial:
    """Monomial-basis polynomial; coeffs[j] multiplies t**j."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            coeffs = (0.0,)
        if not all(math.isfinite(c) for c in coeffs):
            raise ValidationError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t):
        return comp_horner(self.coeffs, t)

    def derivative(self) -> "Polynomial":
        if len(self.coeffs) == 1:
            return Polynomial((0.0,))
        return Polynomial(tuple(j * c for j, c in enumerate(self.coeffs) if j >= 1))


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Two independent pieces split at the breakpoint: left on [0, T], right on (T, t_end]."""

    left: Polynomial
    right: Polynomial
    breakpoint: float
    t_end: float

    def __post_init__(self):
        if not (0.0 < self.breakpoint < self.t_end):
            raise ValidationError(
                f"need 0 < breakpoint < t_end, got breakpoint={self.breakpoint}, t_end={self.t_end}"
            )

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            return np.where(t <= self.breakpoint, self.left(t), self.right(t))
        return self.left(t) if t <= self.breakpoint else self.right(t)


@dataclass(frozen=True)
class FitStats:
    """Least-squares decomposition: sse + ssr = sst, r_squared = ssr / sst."""

    sse: float
    ssr: float
    sst: float
    r_squared: float

    @classmethod
    def from_decomposition(cls, sse: float, ssr: float) -> "FitStats":
        """Build the statistics from an already-known SSE/SSR pair."""
        if sse < 0.0 or ssr < 0.0:
            raise ValidationError("sum-of-squares terms must be >= 0")
        sst = sse + ssr
        return cls(sse=sse, ssr=ssr, sst=sst, r_squared=(ssr / sst) if sst > 0.0 else 1.0)


def goodness_of_fit(y, y_hat) -> FitStats:
    """SSE about the fit, SSR about the mean of the fitted values, SST = SSE + SSR."""
    yv = [float(v) for v in y]
    fv = [float(v) for v in y_hat]
    if len(yv) != len(fv):
        raise ValidationError(f"length mismatch: {len(yv)} observed vs {len(fv)} fitted")
    if len(yv) < 2:
        raise ValidationError("need at least 2 samples")
    sse = math.fsum((a - b) ** 2 for a, b in zip(yv, fv))
    mean_fit = math.fsum(fv) / len(fv)
    ssr = math.fsum((b - mean_fit) ** 2 for b in fv)
    return FitStats.from_decomposition(sse, ssr)


def _chebyshev_monomial_rows(degree: int) -> list[list[int]]:
    # rows[k][j]: integer coefficient of x^j in the Chebyshev polynomial T_k.
    rows = [[1], [0, 1]]
    for _ in range(2, degree + 1):
        prev, last = rows[-2], rows[-1]
        nxt = [0] + [2 * c for c in last]
        for j, c in enumerate(prev):
            nxt[j] -= c
        rows.append(nxt)
    return rows[: degree + 1]


def _expand_to_raw_monomial(cheb_coeffs: np.ndarray, mid: float, half: float) -> tuple[float, ...]:
    # p(t) = sum_k cheb_k T_k(u), u = (t - mid)/half. Exact rational expansion;
    # one rounding per output coefficient.
    degree = len(cheb_coeffs) - 1
    rows = _chebyshev_monomial_rows(degree)
    in_u = [Fraction(0)] * (degree + 1)
    for k, ck in enumerate(cheb_coeffs):
        fk = Fraction(float(ck))
        for j, c in enumerate(rows[k]):
            if c:
                in_u[j] += fk * c
    fm = Fraction(float(mid))
    fh = Fraction(float(half))
    out = [Fraction(0)] * (degree + 1)
    for k, dk in enumerate(in_u):
        if dk == 0:
            continue
        scale = dk / fh**k
        for j in range(k + 1):
            out[j] += scale * math.comb(k, j) * (-fm) ** (k - j)
    return tuple(float(c) for c in out)


def _as_sample_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("samples must be (t, y) pairs")
    return arr[:, 0], arr[:, 1]


def fit_polynomial(samples, degree: int) -> tuple[Polynomial, FitStats]:
    """Least-squares monomial fit of the given degree on the raw t domain."""
    if not 0 <= degree <= MAX_FIT_DEGREE:
        raise FitError(f"degree must lie in [0, {MAX_FIT_DEGREE}], got {degree}")
    ts, ys = _as_sample_arrays(samples)
    if np.unique(ts).size != ts.size:
        raise FitError("duplicate t values make the system rank-deficient")
    if ts.size < degree + 1:
        raise FitError(f"need at least {degree + 1} samples for degree {degree}, got {ts.size}")
    t_lo, t_hi = float(ts.min()), float(ts.max())
    mid = 0.5 * (t_lo + t_hi)
    half = 0.5 * (t_hi - t_lo)
    u = (ts - mid) / half
    cheb = np.polynomial.chebyshev.chebfit(u, ys, degree)
    fitted = np.polynomial.chebyshev.chebval(u, cheb)
    poly = Polynomial(_expand_to_raw_monomial(cheb, mid, half))
    return poly, goodness_of_fit(ys, fitted)


def fit_piecewise(samples, degree: int, breakpoint: float) -> tuple[PiecewisePolynomial, tuple[FitStats, FitStats]]:
    """Independent left/right fits split at the breakpoint (no continuity constraint).

    The sample at exactly t = breakpoint belongs to the left piece.
    """
    ts, ys = _as_sample_arrays(samples)
    if not (ts.min() < breakpoint < ts.max()):
        raise FitError(f"breakpoint {breakpoint} outside the sampled range [{ts.min()}, {ts.max()}]")
    mask = ts <= breakpoint
    left_samples = np.column_stack([ts[mask], ys[mask]])
    right_samples = np.column_stack([ts[~mask], ys[~mask]])
    for name, part in (("left", left_samples), ("right", right_samples)):
        if part.shape[0] < degree + 1:
            raise FitError(f"{name} piece has {part.shape[0]} samples; degree {degree} needs {degree + 1}")
    left_poly, left_stats = fit_polynomial(left_samples, degree)
    right_poly, right_stats = fit_polynomial(right_samples, degree)
    pieces = PiecewisePolynomial(left_poly, right_poly, float(breakpoint), float(ts.max()))
    return pieces, (left_stats, right_stats)


def _single_breakpoint(records) -> float:
    vs = np.array([r.v for r in records], dtype=float)
    ts = np.array([r.t for r in records], dtype=float)
    k_max = int(np.argmax(vs))
    k_min = int(np.argmin(vs))
    # one interior extremum of v marks the sweep vertex; prefer the maximum
    # (rising-then-falling sweep), fall back to the minimum for inverted sweeps
    if 0 < k_max < vs.size - 1:
        return float(ts[k_max])
    if 0 < k_min < vs.size - 1:
        return float(ts[k_min])
    raise ValidationError("voltage has no interior extremum; not a cyclic sweep")


def estimate_breakpoint(series) -> float:
    """Vertex time of a triangular sweep; mean over runs when given several."""
    if hasattr(series, "records"):
        return _single_breakpoint(series.records)
    runs = list(series)
    if not runs:
        raise ValidationError("need at least one run")
    return math.fsum(_single_breakpoint(run.records) for run in runs) / len(runs)


def integrate_polynomial(p: Polynomial) -> Polynomial:
    """Antiderivative with zero constant term: c_j becomes c_j/(j+1) at power j+1."""
    return Polynomial((0.0,) + tuple(c / (j + 1) for j, c in enumerate(p.coeffs)))


def integrate_piecewise(pp: PiecewisePolynomial) -> PiecewisePolynomial:
    """Piecewise antiderivative, each piece integrated from 0 with zero constant.

    The two pieces generally disagree at the breakpoint; the memory-branch
    closed form downstream is built exactly on that convention.
    """
    return PiecewisePolynomial(
        integrate_polynomial(pp.left),
        integrate_polynomial(pp.right),
        pp.breakpoint,
        pp.t_end,
    )
