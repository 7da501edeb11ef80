"""Shared fixtures: bundled fits, their antiderivatives, and one full search.

The default-resolution search is session-scoped because several tests assert
different facets of the same result (optimum location, runtime, range) and
the search is deterministic.
"""

import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from memfract import (
    SearchConfig,
    SweepConfig,
    SweepRecord,
    SweepSeries,
    bundled_global_fits,
    bundled_piecewise_fits,
    integrate_piecewise,
    integrate_polynomial,
    search_optimal,
)

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def make_series(t, v, i, run_id="test", meta=None):
    records = tuple(
        SweepRecord(float(a), float(b), float(c)) for a, b, c in zip(t, v, i)
    )
    return SweepSeries(records=records, run_id=run_id, meta=meta)


def ramp_with_impulses(n=200, spike_indices=(30, 60, 95, 140, 180), amp=5e-9):
    """A 1 nA current ramp with five isolated +-amp impulses injected."""
    t = np.linspace(0.0, 1.0, n) + 0.001
    v = np.linspace(0.0, 1.0, n)
    i = 1e-9 * np.linspace(0.0, 1.0, n)
    signs = [1.0, -1.0, 1.0, -1.0, 1.0]
    for idx, sign in zip(spike_indices, signs):
        i[idx] += sign * amp
    return make_series(t, v, i)


@pytest.fixture(scope="session")
def sweep_config():
    return SweepConfig(v_min=-1.0, v_max=1.0, v_step=0.01, electrode_arrangement="cap_to_cap")


@pytest.fixture(scope="session")
def global_fits():
    return bundled_global_fits()


@pytest.fixture(scope="session")
def global_flux_charge(global_fits):
    v_poly, i_poly = global_fits
    return integrate_polynomial(v_poly), integrate_polynomial(i_poly)


@pytest.fixture(scope="session")
def piecewise_fits():
    return bundled_piecewise_fits()


@pytest.fixture(scope="session")
def piecewise_flux_charge(piecewise_fits):
    v_pieces, i_pieces = piecewise_fits
    return integrate_piecewise(v_pieces), integrate_piecewise(i_pieces)


@pytest.fixture(scope="session")
def full_search(global_flux_charge):
    """Default-resolution search on the bundled fits, with wall time."""
    flux, charge = global_flux_charge
    start = time.perf_counter()
    result = search_optimal(flux, charge, SearchConfig())
    elapsed = time.perf_counter() - start
    return result, elapsed


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
