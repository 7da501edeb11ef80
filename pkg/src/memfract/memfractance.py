"""Memfractance evaluation, zero matching, range minimization, classification.

The memfractance F(t) is the ratio of the Riemann-Liouville derivative of the
flux antiderivative (order alpha1) to that of the charge antiderivative
(order alpha2). Both sums factor as t^(1-alpha) * H(t) with H an ordinary
polynomial, so zeros of either side reduce to sign scans of H, and the whole
(alpha1, alpha2) plane can be searched from per-axis caches: numerator data
depends on alpha1 alone, denominator data on alpha2 alone.

For 2-piecewise fits the memory branch (t above the vertex T) adds the closed
form built on antiderivatives taken piecewise from zero. That construction has
a jump at T, so the branch carries a (t-T)^(-alpha) term and a declared
exclusion window around T.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    ExcludedPointError,
    InfeasibleSearchError,
    SingularityError,
    ValidationError,
)
from .fractional_calculus import FracOrderPair, gamma_ratio, gl_derivative_numeric, recip_gamma
from .numerics import comp_horner
from .polyfit import PiecewisePolynomial, Polynomial

__all__ = [
    "MemfractanceCurve",
    "ZeroLocus",
    "DeviceClass",
    "SearchConfig",
    "SearchResult",
    "eval_global",
    "eval_piecewise",
    "find_zeros",
    "zero_loci",
    "matched_zero_couples",
    "range_objective",
    "search_optimal",
    "build_memfractance_curve",
    "reconstruct_current",
    "verify_reconstruction",
    "classify_device",
]

BISECT_WIDTH = 1e-9


class _FracPoly:
    """D^alpha of a polynomial, factored as c0-part + t^(1-alpha) * H(t)."""

    def __init__(self, coeffs, alpha: float):
        coeffs = tuple(float(c) for c in coeffs)
        self.alpha = float(alpha)
        self.c0_coeff = coeffs[0] * recip_gamma(1.0 - self.alpha) if coeffs[0] != 0.0 else 0.0
        self.h = tuple(c * gamma_ratio(p, self.alpha) for p, c in enumerate(coeffs) if p >= 1)

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            val = np.power(t, 1.0 - self.alpha) * comp_horner(self.h, t) if self.h else np.zeros_like(t)
            if self.c0_coeff != 0.0:
                val = val + self.c0_coeff * np.power(t, -self.alpha)
            return val
        val = math.pow(t, 1.0 - self.alpha) * comp_horner(self.h, t) if self.h else 0.0
        if self.c0_coeff != 0.0:
            val += self.c0_coeff * math.pow(t, -self.alpha)
        return val


class _PiecewiseFracPoly:
    """D^alpha of a piecewise antiderivative taken literally from zero.

    Above the breakpoint the antiderivative switches to the right-piece
    coefficients wholesale, so the derivative gains Sum_k w_k (t-T)^(k-alpha)
    with w_k = Gamma(k+1)/Gamma(k+1-alpha) * Sum_p (R_p - L_p) C(p,k) T^(p-k).
    The k = 0 term carries the jump and diverges as t -> T+ for fractional
    alpha; it vanishes identically at integer alpha (recip_gamma pole).
    """

    def __init__(self, pieces: PiecewisePolynomial, alpha: float):
        self.alpha = float(alpha)
        self.T = float(pieces.breakpoint)
        self.upper = _FracPoly(pieces.left.coeffs, alpha)
        left = pieces.left.coeffs
        right = pieces.right.coeffs
        n = max(len(left), len(right))
        delta = [
            (right[p] if p < len(right) else 0.0) - (left[p] if p < len(left) else 0.0)
            for p in range(n)
        ]
        w = []
        for k in range(n):
            s_k = math.fsum(
                delta[p] * math.comb(p, k) * self.T ** (p - k) for p in range(k, n) if delta[p] != 0.0
            )
            w.append(gamma_ratio(k, self.alpha) * s_k)
        self.w = tuple(w)

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            out = self.upper(t)
            above = t > self.T
            if np.any(above):
                u = t[above] - self.T
                with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                    extra = np.power(u, -self.alpha) * comp_horner(self.w, u)
                out = out.copy()
                out[above] = out[above] + extra
            return out
        val = self.upper(t)
        if t > self.T:
            u = t - self.T
            val += math.pow(u, -self.alpha) * comp_horner(self.w, u)
        return val


def _make_evaluator(poly, alpha: float):
    if isinstance(poly, PiecewisePolynomial):
        return _PiecewiseFracPoly(poly, alpha)
    if isinstance(poly, Polynomial):
        return _FracPoly(poly.coeffs, alpha)
    return _FracPoly(tuple(poly), alpha)


def _is_zero_poly(poly) -> bool:
    if isinstance(poly, PiecewisePolynomial):
        return all(c == 0.0 for c in poly.left.coeffs) and all(c == 0.0 for c in poly.right.coeffs)
    return all(c == 0.0 for c in poly.coeffs)


@dataclass(eq=False)
class MemfractanceCurve:
    """Sampled memfractance curve; NaN values mark excluded grid points."""

    alphas: FracOrderPair
    t_grid: np.ndarray
    values: np.ndarray
    singular_points: tuple[float, ...]

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.t_grid.ndim != 1 or self.t_grid.shape != self.values.shape:
            raise ValidationError("t_grid and values must be 1-D arrays of equal length")
        if self.t_grid.size >= 2 and not np.all(np.diff(self.t_grid) > 0):
            raise ValidationError("t_grid must be strictly increasing")
        self.singular_points = tuple(float(z) for z in self.singular_points)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def n_excluded(self) -> int:
        return int(np.size(self.values) - np.count_nonzero(self.finite_mask))


@dataclass(frozen=True)
class ZeroLocus:
    """Zeros of one side of the memfractance at a fixed fractional order."""

    alpha: float
    zeros: tuple[float, ...]

    def __post_init__(self):
        zeros = tuple(float(z) for z in self.zeros)
        if any(b <= a for a, b in zip(zeros, zeros[1:])):
            raise ValidationError("zeros must be sorted ascending")
        object.__setattr__(self, "zeros", zeros)


@dataclass(frozen=True)
class DeviceClass:
    """Placement of an (alpha1, alpha2) point in the mem-element plane."""

    point: tuple[float, float]
    label: str
    region_descriptor: str


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the two-stage (alpha1, alpha2) search."""

    n_alpha: int = 201
    n_t: int = 2048
    t_end: float = 171.0
    eps_t: float = 0.05
    eps_den: float = 1e-30
    delta: float = 0.33
    pole_gap: float = 1.0
    refine_tol: float = 1e-6
    max_refine_iter: int = 400
    on_infeasible: str = "relax"
    alpha2_fixed: float | None = None
    threads: int | None = None
    canonicalize_ridge: bool = True
    const_f_tol: float = 0.1

    def __post_init__(self):
        if self.n_alpha < 2:
            raise ValidationError(f"n_alpha must be >= 2, got {self.n_alpha}")
        if self.n_t < 16:
            raise ValidationError(f"n_t must be >= 16, got {self.n_t}")
        if self.t_end <= 0:
            raise ValidationError(f"t_end must be > 0, got {self.t_end}")
        if self.on_infeasible not in ("relax", "error"):
            raise ValidationError(f"on_infeasible must be 'relax' or 'error', got {self.on_infeasible!r}")
        if self.alpha2_fixed is not None and not 0.0 <= self.alpha2_fixed <= 2.0:
            raise ValidationError(f"alpha2_fixed must lie in [0, 2], got {self.alpha2_fixed}")
        if self.const_f_tol < 0:
            raise ValidationError(f"const_f_tol must be >= 0, got {self.const_f_tol}")

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(d) - known
        if bad:
            raise ValidationError(f"unknown search config keys: {sorted(bad)}")
        return cls(**d)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of search_optimal."""

    alphas: FracOrderPair
    range_value: float
    curve: MemfractanceCurve
    unmatched_pole_count: int
    num_zeros: tuple[float, ...]
    den_zeros: tuple[float, ...]
    # True when the optimum was shift-degenerate (near-constant memfractance)
    # and the reported pair is the class representative nearest (1, 1).
    ridge_canonicalized: bool = False


def eval_global(flux_poly: Polynomial, charge_poly: Polynomial, alphas: FracOrderPair,
                t: float, eps_den: float = 1e-30) -> float:
    """F(t) for single global antiderivative polynomials; t > 0."""
    t = float(t)
    if t <= 0.0:
        raise ValidationError(f"time must be > 0, got {t}")
    num = _make_evaluator(flux_poly, alphas.alpha1)(t)
    den = _make_evaluator(charge_poly, alphas.alpha2)(t)
    if abs(den) < eps_den:
        raise SingularityError(t, den)
    return num / den


def eval_piecewise(flux_pieces: PiecewisePolynomial, charge_pieces: PiecewisePolynomial,
                   alphas: FracOrderPair, t: float, delta: float = 0.33,
                   eps_den: float = 1e-30) -> float:
    """F(t) for piecewise antiderivatives; the window [T-delta, T+delta] is excluded."""
    t = float(t)
    if t <= 0.0:
        raise ValidationError(f"time must be > 0, got {t}")
    T = flux_pieces.breakpoint
    if abs(charge_pieces.breakpoint - T) > 1e-12:
        raise ValidationError(
            f"flux and charge breakpoints differ: {T} vs {charge_pieces.breakpoint}"
        )
    if abs(t - T) <= delta:
        raise ExcludedPointError(t, f"inside the vertex window [{T - delta:.6g}, {T + delta:.6g}]")
    num = _PiecewiseFracPoly(flux_pieces, alphas.alpha1)(t)
    den = _PiecewiseFracPoly(charge_pieces, alphas.alpha2)(t)
    if abs(den) < eps_den:
        raise SingularityError(t, den)
    return num / den


def _bisect(f, lo: float, hi: float, f_lo: float) -> float:
    while hi - lo > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _zeros_from_samples(f, ts: np.ndarray, vals: np.ndarray) -> list[float]:
    zeros = []
    for k in range(ts.size - 1):
        a, b = vals[k], vals[k + 1]
        if not (math.isfinite(a) and math.isfinite(b)):
            continue
        if a == 0.0:
            zeros.append(float(ts[k]))
        elif a * b < 0.0:
            zeros.append(_bisect(f, float(ts[k]), float(ts[k + 1]), a))
    if ts.size and math.isfinite(vals[-1]) and vals[-1] == 0.0:
        zeros.append(float(ts[-1]))
    out = []
    for z in sorted(zeros):
        if not out or z - out[-1] > BISECT_WIDTH:
            out.append(z)
    return out


def find_zeros(f, t_range: tuple[float, float], grid_n: int, alpha: float = math.nan) -> ZeroLocus:
    """Sign-scan grid_n uniform samples of f, bisect each bracket to 1e-9 width."""
    if grid_n < 16:
        raise ValidationError(f"grid_n must be >= 16, got {grid_n}")
    lo, hi = float(t_range[0]), float(t_range[1])
    if not lo < hi:
        raise ValidationError(f"empty range ({lo}, {hi})")
    ts = np.linspace(lo, hi, int(grid_n))
    try:
        vals = np.asarray(f(ts), dtype=float)
        if vals.shape != ts.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([float(f(float(t))) for t in ts], dtype=float)
    scalar = lambda x: float(f(x))
    return ZeroLocus(alpha=alpha, zeros=tuple(_zeros_from_samples(scalar, ts, vals)))


def _scan_windows(t_grid: np.ndarray, T: float | None, delta: float):
    if T is None:
        return [(float(t_grid[0]), float(t_grid[-1]))]
    windows = []
    lo, hi = float(t_grid[0]), float(t_grid[-1])
    if lo < T - delta:
        windows.append((lo, T - delta))
    if T + delta < hi:
        windows.append((T + delta, hi))
    return windows


class _AxisCache:
    """Per-alpha cache of one side: sampled values and refined zeros."""

    def __init__(self, poly, alphas: np.ndarray, t_grid: np.ndarray, delta: float, threads: int | None):
        self.alphas = np.asarray(alphas, dtype=float)
        self.t_grid = t_grid
        T = poly.breakpoint if isinstance(poly, PiecewisePolynomial) else None
        self.window_mask = (np.abs(t_grid - T) <= delta) if T is not None else None
        windows = _scan_windows(t_grid, T, delta)

        def one(alpha: float):
            fn = _make_evaluator(poly, alpha)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                vals = np.asarray(fn(t_grid), dtype=float)
            if self.window_mask is not None:
                vals = vals.copy()
                vals[self.window_mask] = np.nan
            zeros: list[float] = []
            for lo, hi in windows:
                sel = (t_grid >= lo) & (t_grid <= hi)
                zeros.extend(_zeros_from_samples(lambda x: float(fn(x)), t_grid[sel], vals[sel]))
            return vals, tuple(sorted(zeros))

        if threads is not None and threads > 1 and self.alphas.size > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(one, [float(a) for a in self.alphas]))
        else:
            results = [one(float(a)) for a in self.alphas]
        self.values = [r[0] for r in results]
        self.zeros = [r[1] for r in results]


def zero_loci(poly, alphas, t_end: float | None = None, grid_n: int = 2048,
              delta: float = 0.33) -> list[ZeroLocus]:
    """One ZeroLocus per fractional order: where D^alpha of the antiderivative
    vanishes on (0, t_end] (piecewise scans skip the vertex window)."""
    alphas_arr = np.asarray(alphas, dtype=float).ravel()
    if t_end is None:
        if isinstance(poly, PiecewisePolynomial):
            t_end = poly.t_end
        else:
            raise ValidationError("t_end is required for global polynomials")
    t_grid = np.linspace(t_end / grid_n, t_end, int(grid_n))
    cache = _AxisCache(poly, alphas_arr, t_grid, delta, None)
    return [
        ZeroLocus(alpha=float(a), zeros=cache.zeros[k]) for k, a in enumerate(alphas_arr)
    ]


def _match_stats(num_zeros, den_zeros, eps_t: float) -> tuple[int, float, bool]:
    """(unmatched denominator zeros, worst mismatch distance, any matched pair)."""
    unmatched = 0
    worst = 0.0
    any_match = False
    for z in den_zeros:
        dist = min((abs(z - nz) for nz in num_zeros), default=math.inf)
        if dist <= eps_t:
            any_match = True
        else:
            unmatched += 1
            worst = max(worst, dist if math.isfinite(dist) else 1e18)
    return unmatched, worst, any_match


def matched_zero_couples(flux_poly, charge_poly, alpha_grid, eps_t: float = 0.05,
                         t_end: float | None = None, grid_n: int = 2048,
                         delta: float = 0.33) -> list[tuple[float, float]]:
    """Grid couples (alpha1, alpha2) where a numerator zero and a denominator
    zero coincide within eps_t, making that singularity removable in practice.

    alpha_grid is either an integer n (n x n uniform grid on [0,2]^2) or a
    pair of 1-D arrays (alpha1 values, alpha2 values).
    """
    if eps_t <= 0.0:
        raise ValidationError(f"eps_t must be > 0, got {eps_t}")
    if isinstance(alpha_grid, int):
        a1_vals = np.linspace(0.0, 2.0, alpha_grid)
        a2_vals = np.linspace(0.0, 2.0, alpha_grid)
    else:
        a1_vals = np.asarray(alpha_grid[0], dtype=float).ravel()
        a2_vals = np.asarray(alpha_grid[1], dtype=float).ravel()
    piecewise = isinstance(flux_poly, PiecewisePolynomial)
    if t_end is None:
        if piecewise:
            t_end = flux_poly.t_end
        else:
            raise ValidationError("t_end is required for global polynomials")
    t_grid = np.linspace(t_end / grid_n, t_end, int(grid_n))
    num_cache = _AxisCache(flux_poly, a1_vals, t_grid, delta, None)
    den_cache = _AxisCache(charge_poly, a2_vals, t_grid, delta, None)
    couples = []
    for i, a1 in enumerate(a1_vals):
        nz = num_cache.zeros[i]
        if not nz:
            continue
        for j, a2 in enumerate(a2_vals):
            _, _, any_match = _match_stats(nz, den_cache.zeros[j], eps_t)
            if any_match:
                couples.append((float(a1), float(a2)))
    return couples


def range_objective(curve: MemfractanceCurve) -> float:
    """max - min over the non-excluded grid values."""
    finite = curve.values[curve.finite_mask]
    if finite.size == 0:
        raise ValidationError("all grid points are excluded")
    if finite.size < 2:
        raise ValidationError("fewer than 2 non-excluded grid values")
    return float(finite.max() - finite.min())


def _masked_values(num_vals: np.ndarray, den_vals: np.ndarray, t_grid: np.ndarray,
                   gap_zeros, cfg: SearchConfig) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        values = num_vals / den_vals
        bad = ~np.isfinite(values) | (np.abs(den_vals) < cfg.eps_den)
        for z in gap_zeros:
            bad |= np.abs(t_grid - z) <= cfg.pole_gap
        values = np.where(bad, np.nan, values)
    return values


def _cell_range(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    if finite.size < 2:
        return math.inf
    return float(finite.max() - finite.min())


def build_memfractance_curve(flux_poly, charge_poly, alphas: FracOrderPair,
                             cfg: SearchConfig | None = None,
                             gap_zeros=()) -> MemfractanceCurve:
    """Sample F on the standard grid, masking exclusions, collecting den zeros."""
    cfg = cfg or SearchConfig()
    t_grid = np.linspace(cfg.t_end / cfg.n_t, cfg.t_end, cfg.n_t)
    num_cache = _AxisCache(flux_poly, np.array([alphas.alpha1]), t_grid, cfg.delta, None)
    den_cache = _AxisCache(charge_poly, np.array([alphas.alpha2]), t_grid, cfg.delta, None)
    values = _masked_values(num_cache.values[0], den_cache.values[0], t_grid, gap_zeros, cfg)
    return MemfractanceCurve(
        alphas=alphas,
        t_grid=t_grid,
        values=values,
        singular_points=den_cache.zeros[0],
    )


def search_optimal(flux_poly, charge_poly, cfg: SearchConfig | None = None) -> SearchResult:
    """Two-stage range minimization over (alpha1, alpha2) in [0,2]^2.

    Stage 1 scans an n_alpha x n_alpha grid from per-axis caches. Cells are
    ranked first by the number of unmatched denominator zeros (true
    singularities), then by the range of the curve with exclusion gaps around
    those unmatched poles. Stage 2 refines the best cell by Nelder-Mead until
    the simplex diameter falls below refine_tol.

    With on_infeasible="error" the strict contract applies instead: only
    cells with zero unmatched singularities are admissible, and the search
    raises InfeasibleSearchError (listing the nearest matched-zero couples)
    when the grid has none.
    """
    cfg = cfg or SearchConfig()
    if _is_zero_poly(charge_poly):
        raise InfeasibleSearchError("charge polynomial is identically zero; denominator vanishes everywhere")
    piecewise = isinstance(flux_poly, PiecewisePolynomial)
    if piecewise != isinstance(charge_poly, PiecewisePolynomial):
        raise ValidationError("flux and charge must both be global or both be piecewise")

    a1_vals = np.linspace(0.0, 2.0, cfg.n_alpha)
    if cfg.alpha2_fixed is not None:
        a2_vals = np.array([cfg.alpha2_fixed])
    else:
        a2_vals = np.linspace(0.0, 2.0, cfg.n_alpha)
    t_grid = np.linspace(cfg.t_end / cfg.n_t, cfg.t_end, cfg.n_t)

    num_cache = _AxisCache(flux_poly, a1_vals, t_grid, cfg.delta, cfg.threads)
    den_cache = _AxisCache(charge_poly, a2_vals, t_grid, cfg.delta, cfg.threads)

    n1, n2 = a1_vals.size, a2_vals.size
    unmatched = np.empty((n1, n2), dtype=int)
    mismatch = np.empty((n1, n2), dtype=float)
    for i in range(n1):
        nz = num_cache.zeros[i]
        for j in range(n2):
            cnt, worst, _ = _match_stats(nz, den_cache.zeros[j], cfg.eps_t)
            unmatched[i, j] = cnt
            mismatch[i, j] = worst

    strict = cfg.on_infeasible == "error"
    if strict and not np.any(unmatched == 0):
        order = np.argsort(mismatch, axis=None, kind="stable")
        nearest = []
        for flat in order[:8]:
            i, j = divmod(int(flat), n2)
            nearest.append((float(a1_vals[i]), float(a2_vals[j])))
        raise InfeasibleSearchError(
            "no singularity-free (alpha1, alpha2) candidate on the grid", nearest
        )

    target_level = 0 if strict else int(unmatched.min())
    best = None  # (range, i, j)
    for i in range(n1):
        for j in range(n2):
            if unmatched[i, j] != target_level:
                continue
            values = _masked_values(num_cache.values[i], den_cache.values[j],
                                    t_grid, den_cache.zeros[j], cfg)
            r = _cell_range(values)
            if math.isfinite(r) and (best is None or r < best[0]):
                best = (r, i, j)
    if best is None:
        raise InfeasibleSearchError(
            "no candidate cell has an evaluable curve (denominator vanishes "
            "or is excluded on the whole grid)"
        )
    _, bi, bj = best

    ridge = False
    if cfg.canonicalize_ridge and cfg.alpha2_fixed is None:
        ridge, bi, bj = _canonical_shift_cell(
            best[0], bi, bj, num_cache, den_cache, t_grid, unmatched, target_level, cfg
        )

    def objective(x: np.ndarray) -> float:
        a1, a2 = float(x[0]), float(x[1])
        pen = 0.0
        if not 0.0 <= a1 <= 2.0:
            pen += 1e30 * (1.0 + min(abs(a1), abs(a1 - 2.0)))
        if not 0.0 <= a2 <= 2.0:
            pen += 1e30 * (1.0 + min(abs(a2), abs(a2 - 2.0)))
        if cfg.alpha2_fixed is not None:
            a2 = cfg.alpha2_fixed
        if pen > 0.0:
            return pen
        nc = _AxisCache(flux_poly, np.array([a1]), t_grid, cfg.delta, None)
        dc = _AxisCache(charge_poly, np.array([a2]), t_grid, cfg.delta, None)
        cnt, _, _ = _match_stats(nc.zeros[0], dc.zeros[0], cfg.eps_t)
        if cnt > target_level:
            return 1e28 * (1 + cnt - target_level)
        values = _masked_values(nc.values[0], dc.values[0], t_grid, dc.zeros[0], cfg)
        r = _cell_range(values)
        return r if math.isfinite(r) else 1e29

    h1 = float(a1_vals[1] - a1_vals[0]) if n1 > 1 else 0.05
    x0 = np.array([float(a1_vals[bi]), float(a2_vals[bj])])
    if ridge:
        # Refinement along a flat shift line is noise chasing; keep the
        # canonical grid point.
        a1_opt, a2_opt = float(a1_vals[bi]), float(a2_vals[bj])
    elif cfg.alpha2_fixed is not None:
        xb, _ = _nelder_mead(lambda x: objective(np.array([x[0], cfg.alpha2_fixed])),
                             x0[:1], np.array([h1]), cfg.refine_tol, cfg.max_refine_iter)
        a1_opt, a2_opt = float(xb[0]), float(cfg.alpha2_fixed)
    else:
        h2 = float(a2_vals[1] - a2_vals[0]) if n2 > 1 else 0.05
        xb, _ = _nelder_mead(objective, x0, np.array([h1, h2]), cfg.refine_tol, cfg.max_refine_iter)
        a1_opt, a2_opt = float(xb[0]), float(xb[1])
    a1_opt = min(max(a1_opt, 0.0), 2.0)
    a2_opt = min(max(a2_opt, 0.0), 2.0)

    nc = _AxisCache(flux_poly, np.array([a1_opt]), t_grid, cfg.delta, None)
    dc = _AxisCache(charge_poly, np.array([a2_opt]), t_grid, cfg.delta, None)
    values = _masked_values(nc.values[0], dc.values[0], t_grid, dc.zeros[0], cfg)
    final_range = _cell_range(values)
    if not math.isfinite(final_range):
        # refinement degenerated; fall back to the stage-1 cell
        a1_opt, a2_opt = float(a1_vals[bi]), float(a2_vals[bj])
        nc = _AxisCache(flux_poly, np.array([a1_opt]), t_grid, cfg.delta, None)
        dc = _AxisCache(charge_poly, np.array([a2_opt]), t_grid, cfg.delta, None)
        values = _masked_values(nc.values[0], dc.values[0], t_grid, dc.zeros[0], cfg)
        final_range = _cell_range(values)
    alphas = FracOrderPair(a1_opt, a2_opt)
    curve = MemfractanceCurve(
        alphas=alphas, t_grid=t_grid, values=values, singular_points=dc.zeros[0]
    )
    cnt, _, _ = _match_stats(nc.zeros[0], dc.zeros[0], cfg.eps_t)
    return SearchResult(
        alphas=alphas,
        range_value=float(final_range),
        curve=curve,
        unmatched_pole_count=cnt,
        num_zeros=nc.zeros[0],
        den_zeros=dc.zeros[0],
        ridge_canonicalized=ridge,
    )


def _canonical_shift_cell(best_range, bi, bj, num_cache, den_cache, t_grid,
                          unmatched, target_level, cfg):
    """Canonical representative for a shift-degenerate optimum.

    When the memfractance at the optimum is constant to within
    ``const_f_tol`` (relative to its own magnitude), applying a derivative
    of any order d to both sides of the defining relation maps the pair
    (alpha1, alpha2) to (alpha1 + d, alpha2 + d) without changing the data.
    The orders are then identifiable only up to that common shift, so the
    reported pair would be an arbitrary point on a flat line.  This picks
    the grid cell on the shift line through the best cell, restricted to
    cells that are equally feasible and equally constant, that is closest
    to the memristor point (1, 1).  For any device whose memfractance
    actually varies over the sweep the relative-range test fails and the
    stage-1 cell is returned untouched.
    """
    a1_vals, a2_vals = num_cache.alphas, den_cache.alphas
    values = _masked_values(num_cache.values[bi], den_cache.values[bj], t_grid,
                            den_cache.zeros[bj], cfg)
    with np.errstate(invalid="ignore"):
        scale = float(np.nanmedian(np.abs(values)))
    if not math.isfinite(scale) or scale <= 0.0 or best_range > cfg.const_f_tol * scale:
        return False, bi, bj
    best_key = None
    ci, cj = bi, bj
    for m in range(-min(bi, bj), a1_vals.size - max(bi, bj)):
        i, j = bi + m, bj + m
        if unmatched[i, j] != target_level:
            continue
        v = _masked_values(num_cache.values[i], den_cache.values[j], t_grid,
                           den_cache.zeros[j], cfg)
        r = _cell_range(v)
        if not (math.isfinite(r) and r <= cfg.const_f_tol * scale):
            continue
        key = ((a1_vals[i] - 1.0) ** 2 + (a2_vals[j] - 1.0) ** 2, i)
        if best_key is None or key < best_key:
            best_key, ci, cj = key, i, j
    return True, ci, cj


def _nelder_mead(fn, x0: np.ndarray, step: np.ndarray, tol: float, max_iter: int):
    """Minimal Nelder-Mead; stops when the simplex diameter drops below tol."""
    n = x0.size
    simplex = [x0.astype(float)]
    for k in range(n):
        v = x0.copy().astype(float)
        v[k] += step[k] if v[k] + step[k] <= 2.0 else -step[k]
        simplex.append(v)
    fvals = [fn(v) for v in simplex]
    for _ in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        simplex = [simplex[k] for k in order]
        fvals = [fvals[k] for k in order]
        diameter = max(
            float(np.max(np.abs(simplex[a] - simplex[b])))
            for a in range(n + 1) for b in range(a + 1, n + 1)
        )
        if diameter < tol:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        f_r = fn(reflected)
        if f_r < fvals[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_e = fn(expanded)
            if f_e < f_r:
                simplex[-1], fvals[-1] = expanded, f_e
            else:
                simplex[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, f_r
        else:
            contracted = centroid + 0.5 * (worst - centroid)
            f_c = fn(contracted)
            if f_c < fvals[-1]:
                simplex[-1], fvals[-1] = contracted, f_c
            else:
                best = simplex[0]
                simplex = [best] + [best + 0.5 * (v - best) for v in simplex[1:]]
                fvals = [fvals[0]] + [fn(v) for v in simplex[1:]]
    order = np.argsort(fvals, kind="stable")
    return simplex[order[0]], fvals[order[0]]


def reconstruct_current(flux_poly, charge_poly, alphas: FracOrderPair) -> Polynomial:
    """Invert the defining relation for i(t).

    Dividing the numerator derivative by F recovers the order-alpha2 charge
    derivative, and completing the order to one returns d(charge)/dt. The
    cancellation is algebraic, so the result is exactly the coefficientwise
    derivative of the charge antiderivative; verify_reconstruction exercises
    the same identity numerically.
    """
    if not isinstance(alphas, FracOrderPair):
        raise ValidationError("alphas must be a FracOrderPair")
    if isinstance(charge_poly, PiecewisePolynomial):
        raise ValidationError("reconstruction works on the global form; pass a Polynomial")
    return charge_poly.derivative()


def verify_reconstruction(flux_poly, charge_poly, alphas: FracOrderPair,
                          t_points, h: float = 1e-3) -> float:
    """Numerically complete D^(1-alpha2) over the closed-form order-alpha2
    charge derivative and compare with the analytic current; returns the
    worst deviation relative to the current scale at the probe points.
    Supports alpha2 <= 1 (the completing order must be non-negative)."""
    if alphas.alpha2 > 1.0:
        raise ValidationError("verification hook requires alpha2 <= 1")
    current = reconstruct_current(flux_poly, charge_poly, alphas)
    g = _make_evaluator(charge_poly, alphas.alpha2)
    worst = 0.0
    scale = max(abs(float(current(float(t)))) for t in t_points)
    if scale == 0.0:
        scale = 1.0
    for t in t_points:
        completed = gl_derivative_numeric(g, 1.0 - alphas.alpha2, float(t), h)
        deviation = abs(completed - float(current(float(t)))) / scale
        # max() would silently drop a NaN; a non-finite probe must surface
        if not math.isfinite(deviation):
            return deviation
        worst = max(worst, deviation)
    return worst


def _barycentric(point, tri):
    (x1, y1), (x2, y2), (x3, y3) = tri
    det = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3)
    if abs(det) < 1e-15:
        return None
    w1 = ((y2 - y3) * (point[0] - x3) + (x3 - x2) * (point[1] - y3)) / det
    w2 = ((y3 - y1) * (point[0] - x3) + (x1 - x3) * (point[1] - y3)) / det
    return w1, w2, 1.0 - w1 - w2


def _segment_distance(point, a, b) -> float:
    px, py = point
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    s = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    return math.hypot(px - (ax + s * dx), py - (ay + s * dy))


def classify_device(alphas: FracOrderPair, anchors: dict | None = None,
                    anchor_tol: float = 1e-6, segment_tol: float = 0.02) -> DeviceClass:
    """Name the anchor the point sits on, else list the anchor segments and
    triangles containing it, else describe it barycentrically."""
    if anchors is None:
        from .bundled import default_anchors

        anchors = default_anchors()
    try:
        anchors = {str(k): (float(v[0]), float(v[1])) for k, v in anchors.items()}
    except (TypeError, ValueError, IndexError):
        raise ValidationError("anchors must map names to (alpha1, alpha2) pairs") from None
    if len(anchors) < 2:
        raise ValidationError("need at least 2 anchors")
    point = (alphas.alpha1, alphas.alpha2)

    for name in sorted(anchors):
        ax, ay = anchors[name]
        if math.hypot(point[0] - ax, point[1] - ay) <= anchor_tol:
            return DeviceClass(point=point, label=name, region_descriptor=f"at anchor {name}")

    names = sorted(anchors)
    regions = []
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            d = _segment_distance(point, anchors[names[a]], anchors[names[b]])
            if d <= segment_tol:
                regions.append(f"on segment {names[a]}/{names[b]}")
    triangles = []
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            for c in range(b + 1, len(names)):
                tri = (anchors[names[a]], anchors[names[b]], anchors[names[c]])
                w = _barycentric(point, tri)
                if w is not None:
                    triangles.append((names[a], names[b], names[c], w))
                    if min(w) >= -1e-9:
                        regions.append(f"inside triangle {names[a]}/{names[b]}/{names[c]}")
    if not regions and triangles:
        na, nb, nc, w = min(
            triangles, key=lambda item: -min(item[3])
        )
        regions.append(
            f"outside all anchor regions; barycentric({na}, {nb}, {nc}) = "
            f"({w[0]:.4f}, {w[1]:.4f}, {w[2]:.4f})"
        )
    descriptor = "; ".join(regions) if regions else "no anchor region defined"
    return DeviceClass(point=point, label="mixed", region_descriptor=descriptor)
