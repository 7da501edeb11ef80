"""Acceptance checks for the full pipeline.

Every test pins a target value or behavior for the whole toolkit. Targets
that the bundled coefficient fixtures cannot actually reproduce under
deterministic float64 evaluation are asserted as written and left failing;
the README's "Known divergences" section explains each one. Nothing here is
marked xfail: a red acceptance test is a truthful statement about the gap.
"""

import math
from functools import lru_cache

import numpy as np
import pytest

from memfract import (
    ExcludedPointError,
    FitStats,
    FracOrderPair,
    IdealMemristorParams,
    Polynomial,
    PowerTerm,
    SearchConfig,
    SyntheticDeviceSpec,
    Waveform,
    classify_device,
    detect_spikes,
    eval_piecewise,
    fit_polynomial,
    gl_derivative_numeric,
    integrate_polynomial,
    interval_histogram,
    matched_zero_couples,
    reconstruct_current,
    rl_derivative_polysum,
    search_optimal,
    simulate_ideal_memristor,
    synth_memfractor_sweep,
)

from conftest import ramp_with_impulses

REFERENCE_ORDERS = (1.08642731, 0.25709492)
REFERENCE_RANGE = 825770.46017259
REFERENCE_MATCHED_ALPHA1 = 1.78348389322388
MEMRISTOR_PARAMS = IdealMemristorParams(
    r_on=100.0, r_off=16000.0, d=1e-8, mu=1e-15, w0=1e-9
)


# --- global search against the reference optimum --------------------------


def test_global_search_recovers_reference_orders(full_search):
    result, _ = full_search
    assert result.alphas.alpha1 == pytest.approx(REFERENCE_ORDERS[0], abs=0.02)
    assert result.alphas.alpha2 == pytest.approx(REFERENCE_ORDERS[1], abs=0.02)


def test_global_search_range_matches_reference_value(full_search):
    # the reference range is not reachable from the bundled fixture
    # coefficients in float64 (see README); asserted as specified
    result, _ = full_search
    assert result.range_value == pytest.approx(REFERENCE_RANGE, rel=0.01)


def test_global_search_completes_within_time_budget(full_search):
    _, elapsed = full_search
    assert elapsed <= 60.0


# --- piecewise matched zero and curve finiteness ---------------------------


def test_piecewise_matched_couple_at_reference_alpha1(piecewise_flux_charge):
    # the fixture coefficients put the matched band near alpha1 = 0.3115,
    # not at the reference value (see README); asserted as specified
    flux, charge = piecewise_flux_charge
    a1_grid = np.linspace(0.0, 2.0, 2001)
    couples = matched_zero_couples(flux, charge, (a1_grid, np.array([1.0])), eps_t=0.05)
    assert couples, "no matched couples found at alpha2 = 1.0"
    assert any(abs(a1 - REFERENCE_MATCHED_ALPHA1) <= 0.01 for a1, _ in couples)


def test_piecewise_curve_finite_across_sweep(piecewise_flux_charge):
    flux, charge = piecewise_flux_charge
    alphas = FracOrderPair(REFERENCE_MATCHED_ALPHA1, 1.0)
    grid = np.concatenate(
        [np.linspace(0.5, 87.24, 256), np.linspace(87.90, 171.0, 256)]
    )
    checked = 0
    for t in grid:
        try:
            value = eval_piecewise(flux, charge, alphas, float(t))
        except ExcludedPointError:
            # the closed form declares a window around the vertex where the
            # jump term diverges; those points are outside its domain
            continue
        assert math.isfinite(value), f"non-finite memfractance at t = {t}"
        checked += 1
    assert checked >= 500


# --- goodness-of-fit arithmetic --------------------------------------------


def test_goodness_of_fit_reference_decompositions():
    global_stats = FitStats.from_decomposition(0.0680517563652170, 133.688517134422)
    assert global_stats.sst == pytest.approx(133.756568890787, rel=1e-9)
    assert global_stats.r_squared == pytest.approx(0.999491226809049, rel=1e-9)
    piece_stats = FitStats.from_decomposition(5.84247524503151e-13, 4.07366051979587e-11)
    assert piece_stats.sst == pytest.approx(4.13208527224619e-11, rel=1e-9)
    assert piece_stats.r_squared == pytest.approx(0.985860709883522, rel=1e-9)


# --- fractional-calculus property suite -------------------------------------


def test_integer_order_collapse_on_random_polynomials():
    rng = np.random.default_rng(123)
    for _ in range(100):
        deg = int(rng.integers(1, 25))
        coeffs = rng.uniform(-2.0, 2.0, deg + 1)
        poly = Polynomial(tuple(coeffs))
        terms = [PowerTerm(a=float(c), beta=float(p)) for p, c in enumerate(coeffs)]
        t = float(rng.uniform(0.5, 3.0))
        assert rl_derivative_polysum(terms, 0.0, t) == pytest.approx(
            float(poly(t)), rel=1e-10
        )
        assert rl_derivative_polysum(terms, 1.0, t) == pytest.approx(
            float(poly.derivative()(t)), rel=1e-10
        )


def test_half_derivative_semigroup_on_powers():
    from memfract import gamma_ratio, rl_derivative_power

    for p in range(1, 25):
        t = 1.0 + p / 7.0
        once = PowerTerm(a=gamma_ratio(float(p), 0.5), beta=p - 0.5)
        twice = rl_derivative_power(once, 0.5, t)
        assert twice == pytest.approx(p * t ** (p - 1), rel=1e-10)


def test_closed_form_matches_difference_oracle():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(50):
        deg = int(rng.integers(2, 9))
        coeffs = rng.uniform(0.1, 2.0, deg - 1)
        terms = [
            PowerTerm(a=float(c), beta=float(p))
            for p, c in zip(range(2, deg + 1), coeffs)
        ]

        def f(x, terms=terms):
            return sum(tm.a * x**tm.beta for tm in terms)

        t = float(rng.uniform(0.5, 2.0))
        alpha = float(rng.uniform(0.1, 1.9))
        exact = rl_derivative_polysum(terms, alpha, t)
        approx = gl_derivative_numeric(f, alpha, t, h=1e-4)
        worst = max(worst, abs(approx - exact) / max(abs(exact), 1e-30))
    assert worst < 1e-3


# --- reconstruction identity -------------------------------------------------


def test_reconstruction_is_charge_derivative_coefficient_exact():
    rng = np.random.default_rng(11)
    for _ in range(100):
        deg = int(rng.integers(1, 25))
        charge = Polynomial((0.0,) + tuple(rng.uniform(-2.0, 2.0, deg)))
        alphas = FracOrderPair(float(rng.uniform(0.0, 2.0)), float(rng.uniform(0.0, 2.0)))
        rec = reconstruct_current(None, charge, alphas)
        assert rec.coeffs == charge.derivative().coeffs


def test_reconstruction_error_concentrates_near_vertex(global_fits, piecewise_fits):
    # the global reconstruction is compared against the piecewise current fit,
    # the closest bundled stand-in for the measured record; the worst relative
    # deviation actually sits at the first sample, a left-edge artifact of the
    # high-degree fit, not inside the vertex window (see README); asserted as
    # specified
    _, global_current = global_fits
    piece_v, piece_current = piecewise_fits
    charge = integrate_polynomial(global_current)
    rec = reconstruct_current(None, charge, FracOrderPair(1.0, 1.0))
    t = np.arange(1.0, 172.0)
    reference = np.asarray(piece_current(t), dtype=float)
    rel = np.abs(np.asarray(rec(t), dtype=float) - reference) / np.max(np.abs(reference))
    n_near = max(1, round(0.10 * t.size))
    nearest = set(t[np.argsort(np.abs(t - piece_v.breakpoint))[:n_near]])
    worst_t = float(t[int(np.argmax(rel))])
    assert worst_t in nearest, (
        f"worst relative error at t = {worst_t}, outside the {n_near} samples "
        f"nearest the vertex"
    )


# --- synthetic round trip ----------------------------------------------------


@lru_cache(maxsize=None)
def _round_trip(orders, noise_frac):
    drive = Waveform("sine", 1.0, 8.0, 512)
    spec = SyntheticDeviceSpec(FracOrderPair(*orders), 1e6, drive)
    series = synth_memfractor_sweep(spec)
    t, v, i = series.t, series.v, series.i
    if noise_frac:
        rng = np.random.default_rng(7)
        i = i + rng.normal(0.0, noise_frac * np.max(np.abs(i)), i.size)
    poly_v, _ = fit_polynomial(np.column_stack([t, v]), 4)
    poly_i, _ = fit_polynomial(np.column_stack([t, i]), 4)
    cfg = SearchConfig(n_alpha=81, n_t=1024, t_end=3.6)
    return search_optimal(integrate_polynomial(poly_v), integrate_polynomial(poly_i), cfg)


# A constant-memfractance device determines its orders only up to a common
# shift: differentiating both sides of the defining relation by a further
# delta maps (alpha1, alpha2) to (alpha1 + delta, alpha2 + delta) with the
# same constant, and the generator's output depends on the orders only
# through their difference. The search therefore reports the shift-class
# representative nearest (1, 1), which for a device built at (1.0, 0.0) is
# (1.5, 0.5). The (1.0, 0.0) rows assert the requested orders anyway and
# fail; see README.
@pytest.mark.parametrize("noise,tol", [(0.0, 0.05), (0.01, 0.1)], ids=["clean", "noisy1pct"])
@pytest.mark.parametrize(
    "orders", [(1.0, 1.0), (1.5, 0.5), (1.0, 0.0)], ids=["1-1", "1.5-0.5", "1-0"]
)
def test_synthetic_round_trip_recovers_orders(orders, noise, tol):
    result = _round_trip(orders, noise)
    assert result.alphas.alpha1 == pytest.approx(orders[0], abs=tol)
    assert result.alphas.alpha2 == pytest.approx(orders[1], abs=tol)
    if noise == 0.0:
        assert result.range_value <= 1e-6 * 1e6


def test_memcapacitor_anchored_device_classifies_at_its_anchor():
    # same shift degeneracy as above: the recovered pair is (1.5, 0.5), which
    # sits on the memcapacitor-capacitor segment, not at the anchor itself;
    # asserted as specified
    result = _round_trip((1.0, 0.0), 0.0)
    assert classify_device(result.alphas).label == "memcapacitor"


# --- ideal memristor properties ----------------------------------------------


def _lobe_area_sum(series):
    # the pinched loop is a figure eight; a raw shoelace over the whole cycle
    # cancels the lobes, so split at the half period and sum absolute areas
    v, i = series.v, series.i
    half = len(v) // 2

    def shoelace(xs, ys):
        return 0.5 * abs(float(np.sum(xs * np.roll(ys, -1) - ys * np.roll(xs, -1))))

    return shoelace(v[: half + 1], i[: half + 1]) + shoelace(v[half:], i[half:])


def test_memristor_loop_is_pinched_at_origin():
    series = simulate_ideal_memristor(MEMRISTOR_PARAMS, Waveform("sine", 1.0, 2.0, 4000))
    near_zero_v = np.abs(series.v) < 1e-12
    assert np.any(near_zero_v)
    assert np.all(np.abs(series.i[near_zero_v]) < 1e-12)


def test_loop_area_strictly_decreases_with_frequency():
    areas = [
        _lobe_area_sum(
            simulate_ideal_memristor(MEMRISTOR_PARAMS, Waveform("sine", 1.0, period, 4000))
        )
        for period in (2.0, 1.0, 0.5)
    ]
    assert areas[0] > areas[1] > areas[2]


# --- spike pipeline ------------------------------------------------------------


def test_injected_impulse_detection_is_exact():
    # 100% precision and 100% recall on the injected set
    injected = (30, 60, 95, 140, 180)
    series = ramp_with_impulses(spike_indices=injected)
    events = detect_spikes(series, window=11, k=4.0)
    assert {e.index for e in events} == set(injected)


def test_interval_histogram_counts_one_less_than_spikes():
    series = ramp_with_impulses()
    events = detect_spikes(series, window=11, k=4.0)
    hist = interval_histogram(events, bin_width=0.01)
    assert hist.total == len(events) - 1


def test_measured_interval_mass_concentrates_below_60mV():
    pytest.skip("no raw laboratory sweep runs are bundled; needs measured data")
