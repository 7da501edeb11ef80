"""Reference device generators.

Two sweep sources close the pipeline loop: a linear-drift ideal memristor
(fixed-step RK4 on the dopant state) and a synthetic mem-fractor whose flux
is built from its charge via the closed-form power rule, so the fractional
relation holds with a constant memfractance at a known (alpha1, alpha2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fractional_calculus import FracOrderPair, gamma, recip_gamma
from .polyfit import Polynomial
from .sweep_ingest import SweepRecord, SweepSeries

__all__ = [
    "IdealMemristorParams",
    "Waveform",
    "SyntheticDeviceSpec",
    "simulate_ideal_memristor",
    "synth_memfractor_sweep",
]

WAVEFORM_SHAPES = ("sine", "triangle")


@dataclass(frozen=True)
class IdealMemristorParams:
    """Linear-drift memristor: resistance interpolates r_on..r_off as the
    state w sweeps the device length d with mobility mu."""

    r_on: float
    r_off: float
    d: float
    mu: float
    w0: float

    def __post_init__(self):
        if not 0 < self.r_on < self.r_off:
            raise ValidationError(f"need 0 < r_on < r_off, got {self.r_on}, {self.r_off}")
        if self.d <= 0:
            raise ValidationError(f"d must be > 0, got {self.d}")
        if self.mu <= 0:
            raise ValidationError(f"mu must be > 0, got {self.mu}")
        if not 0.0 <= self.w0 <= self.d:
            raise ValidationError(f"w0 must lie in [0, d], got {self.w0}")


@dataclass(frozen=True)
class Waveform:
    """Periodic drive voltage: shape, amplitude (V), period (s), samples per
    period, number of cycles."""

    shape: str
    amplitude: float
    period: float
    samples: int
    cycles: int = 1

    def __post_init__(self):
        if self.shape not in WAVEFORM_SHAPES:
            raise ValidationError(f"shape must be one of {WAVEFORM_SHAPES}, got {self.shape!r}")
        if self.amplitude < 0:
            raise ValidationError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.period <= 0:
            raise ValidationError(f"period must be > 0, got {self.period}")
        if self.samples < 2:
            raise ValidationError(f"samples must be >= 2, got {self.samples}")
        if self.cycles < 1:
            raise ValidationError(f"cycles must be >= 1, got {self.cycles}")

    @classmethod
    def from_dict(cls, d: dict) -> "Waveform":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(d) - known
        if bad:
            raise ValidationError(f"unknown waveform keys: {sorted(bad)}")
        return cls(**d)

    def voltage(self, t):
        """Drive voltage at time(s) t; sine starts at 0 rising, triangle too."""
        scalar = not isinstance(t, np.ndarray)
        tt = np.asarray(t, dtype=float)
        if self.shape == "sine":
            out = self.amplitude * np.sin(2.0 * math.pi * tt / self.period)
        else:
            x = np.mod(tt / self.period, 1.0)
            out = self.amplitude * np.where(
                x < 0.25, 4.0 * x, np.where(x < 0.75, 2.0 - 4.0 * x, 4.0 * x - 4.0)
            )
        return float(out) if scalar else out


@dataclass(frozen=True)
class SyntheticDeviceSpec:
    """Ground truth for a constant-memfractance synthetic device."""

    alphas: FracOrderPair
    f_const: float
    drive: Waveform

    def __post_init__(self):
        if self.f_const == 0.0:
            raise ValidationError("f_const must be nonzero")
        if self.drive.samples < 64:
            raise ValidationError(f"drive.samples must be >= 64, got {self.drive.samples}")


def simulate_ideal_memristor(params: IdealMemristorParams, drive: Waveform) -> SweepSeries:
    """Integrate dw/dt = mu*(r_on/d)*i with i = v/M(w), M(w) = r_on*w/d +
    r_off*(1 - w/d), by classical fixed-step RK4; w is clamped to [0, d].

    A state change above d/10 in one step aborts with advice to raise the
    sample count: the trajectory would be meaningless at that resolution.
    """
    n = drive.samples * drive.cycles
    total = drive.period * drive.cycles
    h = total / (n - 1)

    def resistance(w: float) -> float:
        w = min(max(w, 0.0), params.d)
        x = w / params.d
        return params.r_on * x + params.r_off * (1.0 - x)

    def rate(t: float, w: float) -> float:
        return params.mu * (params.r_on / params.d) * drive.voltage(t) / resistance(w)

    records = []
    w = params.w0
    for step in range(n):
        t = step * h
        v = drive.voltage(t)
        records.append(SweepRecord(t=t, v=v, i=v / resistance(w)))
        if step == n - 1:
            break
        k1 = rate(t, w)
        k2 = rate(t + 0.5 * h, w + 0.5 * h * k1)
        k3 = rate(t + 0.5 * h, w + 0.5 * h * k2)
        k4 = rate(t + h, w + h * k3)
        delta = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if abs(delta) > params.d / 10.0:
            raise ValidationError(
                f"state change {abs(delta):.3g} exceeds d/10 = {params.d / 10.0:.3g} "
                f"in one step at t = {t:.6g}; increase drive.samples"
            )
        w = min(max(w + delta, 0.0), params.d)
    return SweepSeries(records=tuple(records), run_id="ideal_memristor", meta=None)


def synth_memfractor_sweep(spec: SyntheticDeviceSpec) -> SweepSeries:
    """Emit (t, v, i) samples of a device obeying the fractional relation with
    constant memfractance f_const at spec.alphas.

    The charge is a cubic through the origin, least-squares matched to the
    running integral of the drive. Each charge power t^p maps to a flux power
    t^(p + alpha1 - alpha2) whose coefficient is fixed by the power rule, so
    the order-alpha1 flux derivative equals f_const times the order-alpha2
    charge derivative identically. Current and voltage are the exact first
    derivatives of charge and flux.
    """
    a1 = spec.alphas.alpha1
    a2 = spec.alphas.alpha2
    if a1 - a2 <= -1.0:
        raise ValidationError(
            f"flux powers would be non-positive: need alpha1 - alpha2 > -1, "
            f"got {a1 - a2:.3g}"
        )
    drive = spec.drive
    n = drive.samples * drive.cycles
    total = drive.period * drive.cycles
    dt = total / n
    t = (np.arange(n) + 1) * dt

    # charge: cubic through the origin fitted to the drive's running integral
    n_fine = max(4 * n, 512)
    t_fine = np.linspace(0.0, total, n_fine + 1)
    v_fine = drive.voltage(t_fine)
    steps = np.diff(t_fine)
    integral = np.concatenate(([0.0], np.cumsum(0.5 * (v_fine[1:] + v_fine[:-1]) * steps)))
    basis = np.stack([t_fine, t_fine**2, t_fine**3], axis=1)
    q_coeffs, *_ = np.linalg.lstsq(basis, integral, rcond=None)
    charge = Polynomial((0.0,) + tuple(q_coeffs))

    current = charge.derivative()(t)
    voltage = np.zeros_like(t)
    for p in range(1, 4):
        q_p = charge.coeffs[p]
        if q_p == 0.0:
            continue
        s = p + a1 - a2
        f_s = spec.f_const * q_p * gamma(p + 1) * recip_gamma(s + 1.0)
        voltage += f_s * s * np.power(t, s - 1.0)

    records = tuple(
        SweepRecord(t=float(tk), v=float(vk), i=float(ik))
        for tk, vk, ik in zip(t, voltage, current)
    )
    return SweepSeries(records=records, run_id="synthetic", meta=None)


def synthetic_flux_terms(spec: SyntheticDeviceSpec, charge: Polynomial):
    """(coefficient, power) pairs of the flux implied by a charge polynomial
    under spec; exposed for round-trip checks against fitted antiderivatives."""
    a1 = spec.alphas.alpha1
    a2 = spec.alphas.alpha2
    terms = []
    for p, q_p in enumerate(charge.coeffs):
        if p == 0 or q_p == 0.0:
            continue
        s = p + a1 - a2
        terms.append((spec.f_const * q_p * gamma(p + 1) * recip_gamma(s + 1.0), s))
    return terms
