"""Reference device generators: ideal memristor and synthetic mem-fractor."""

import math

import numpy as np
import pytest

from memfract import (
    FracOrderPair,
    IdealMemristorParams,
    SyntheticDeviceSpec,
    ValidationError,
    Waveform,
    simulate_ideal_memristor,
    synth_memfractor_sweep,
)
from memfract.reference_models import synthetic_flux_terms

PARAMS = IdealMemristorParams(r_on=100.0, r_off=16000.0, d=1e-8, mu=1e-15, w0=1e-9)


def test_memristor_params_validation():
    with pytest.raises(ValidationError):
        IdealMemristorParams(r_on=200.0, r_off=100.0, d=1e-8, mu=1e-15, w0=0.0)
    with pytest.raises(ValidationError):
        IdealMemristorParams(r_on=100.0, r_off=200.0, d=0.0, mu=1e-15, w0=0.0)
    with pytest.raises(ValidationError):
        IdealMemristorParams(r_on=100.0, r_off=200.0, d=1e-8, mu=-1.0, w0=0.0)
    with pytest.raises(ValidationError):
        IdealMemristorParams(r_on=100.0, r_off=200.0, d=1e-8, mu=1e-15, w0=2e-8)


def test_waveform_validation():
    with pytest.raises(ValidationError):
        Waveform("square", 1.0, 1.0, 100)
    with pytest.raises(ValidationError):
        Waveform("sine", -1.0, 1.0, 100)
    with pytest.raises(ValidationError):
        Waveform("sine", 1.0, 1.0, 1)
    with pytest.raises(ValidationError):
        Waveform("sine", 1.0, 1.0, 100, cycles=0)
    with pytest.raises(ValidationError):
        Waveform.from_dict({"shape": "sine", "amplitude": 1.0, "period": 1.0,
                            "samples": 100, "phase": 0.5})


def test_waveform_shapes():
    sine = Waveform("sine", 2.0, 4.0, 100)
    assert sine.voltage(0.0) == pytest.approx(0.0, abs=1e-15)
    assert sine.voltage(1.0) == pytest.approx(2.0)
    tri = Waveform("triangle", 2.0, 4.0, 100)
    assert tri.voltage(1.0) == pytest.approx(2.0)
    assert tri.voltage(2.0) == pytest.approx(0.0, abs=1e-15)
    assert tri.voltage(3.0) == pytest.approx(-2.0)
    arr = tri.voltage(np.array([1.0, 3.0]))
    assert isinstance(arr, np.ndarray)
    assert arr == pytest.approx([2.0, -2.0])


def test_zero_amplitude_drive_gives_zero_current():
    series = simulate_ideal_memristor(PARAMS, Waveform("sine", 0.0, 2.0, 256))
    assert np.all(series.i == 0.0)
    assert np.all(series.v == 0.0)


def test_memristor_loop_is_pinched():
    series = simulate_ideal_memristor(PARAMS, Waveform("sine", 1.0, 2.0, 4000))
    near_zero_v = np.abs(series.v) < 1e-12
    assert np.any(near_zero_v)
    assert np.all(np.abs(series.i[near_zero_v]) < 1e-12)


def test_memristor_resistance_stays_in_band():
    series = simulate_ideal_memristor(PARAMS, Waveform("sine", 1.0, 2.0, 4000))
    live = np.abs(series.v) > 1e-6
    m = series.v[live] / series.i[live]
    assert np.all(m >= PARAMS.r_on * (1.0 - 1e-12))
    assert np.all(m <= PARAMS.r_off * (1.0 + 1e-12))


def test_memristor_aborts_on_giant_state_step():
    coarse = Waveform("sine", 100.0, 2.0, 4)
    with pytest.raises(ValidationError, match="increase drive.samples"):
        simulate_ideal_memristor(PARAMS, coarse)


def test_memristor_sample_layout():
    drive = Waveform("sine", 1.0, 2.0, 500, cycles=3)
    series = simulate_ideal_memristor(PARAMS, drive)
    assert len(series.records) == 1500
    assert series.t[0] == 0.0
    assert series.t[-1] == pytest.approx(6.0)


def test_synth_spec_validation():
    drive = Waveform("sine", 1.0, 8.0, 512)
    with pytest.raises(ValidationError):
        SyntheticDeviceSpec(FracOrderPair(1.0, 1.0), 0.0, drive)
    with pytest.raises(ValidationError):
        SyntheticDeviceSpec(FracOrderPair(1.0, 1.0), 1.0, Waveform("sine", 1.0, 8.0, 32))
    with pytest.raises(ValidationError):
        synth_memfractor_sweep(
            SyntheticDeviceSpec(FracOrderPair(0.0, 1.5), 1.0, drive)
        )


def test_synth_equal_orders_is_ohmic():
    # alpha1 == alpha2 collapses the power rule to v = f_const * i
    spec = SyntheticDeviceSpec(
        FracOrderPair(1.0, 1.0), 1000.0, Waveform("triangle", 1.0, 8.0, 512)
    )
    series = synth_memfractor_sweep(spec)
    assert series.v == pytest.approx(1000.0 * series.i, rel=1e-12)


def test_synth_shift_degenerate_specs_emit_identical_sweeps():
    # the emitted samples depend on the orders only through alpha1 - alpha2,
    # so specs on the same shift line are observationally identical
    drive = Waveform("sine", 1.0, 8.0, 512)
    a = synth_memfractor_sweep(SyntheticDeviceSpec(FracOrderPair(1.5, 0.5), 2e6, drive))
    b = synth_memfractor_sweep(SyntheticDeviceSpec(FracOrderPair(1.0, 0.0), 2e6, drive))
    assert a.records == b.records


def test_synthetic_flux_terms_power_rule():
    from memfract import Polynomial

    spec = SyntheticDeviceSpec(
        FracOrderPair(1.5, 0.5), 6.0, Waveform("sine", 1.0, 8.0, 512)
    )
    terms = synthetic_flux_terms(spec, Polynomial((0.0, 0.0, 1.0)))
    assert len(terms) == 1
    coeff, power = terms[0]
    assert power == pytest.approx(3.0)
    assert coeff == pytest.approx(6.0 * 2.0 / math.gamma(4.0), rel=1e-14)


def test_synth_time_grid_starts_after_zero():
    # fractional kernels blow up at t = 0, so the first sample sits one step in
    spec = SyntheticDeviceSpec(
        FracOrderPair(1.5, 0.5), 1.0, Waveform("sine", 1.0, 8.0, 128)
    )
    series = synth_memfractor_sweep(spec)
    assert series.t[0] > 0.0
    assert len(series.records) == 128
    assert series.t[-1] == pytest.approx(8.0)
