"""Current-spike detection and inter-spike voltage-interval statistics.

A spike is a strict local extremum of the current whose deviation from the
local median exceeds k times the local MAD (median absolute deviation), with
an absolute floor so that flat noise-free stretches (MAD = 0) do not turn
every wiggle into a detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .sweep_ingest import SweepSeries

__all__ = [
    "SpikeEvent",
    "IntervalHistogram",
    "detect_spikes",
    "interval_histogram",
]


@dataclass(frozen=True)
class SpikeEvent:
    """One detected spike: sample index, time, drive voltage, current, and
    prominence (absolute deviation of the current from the window median)."""

    index: int
    t: float
    v: float
    i: float
    prominence: float

    def __post_init__(self):
        if self.index < 0:
            raise ValidationError(f"index must be >= 0, got {self.index}")
        if self.prominence < 0:
            raise ValidationError(f"prominence must be >= 0, got {self.prominence}")


@dataclass(frozen=True)
class IntervalHistogram:
    """Counts of inter-spike voltage intervals, keyed by bin lower edge.

    Keys are m * bin_width for integer m >= 0; an interval equal to a bin
    edge belongs to the bin it starts (floor convention).
    """

    bin_width: float
    counts: dict

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValidationError(f"bin_width must be > 0, got {self.bin_width}")
        object.__setattr__(
            self, "counts", {float(k): int(v) for k, v in sorted(self.counts.items())}
        )

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def detect_spikes(series: SweepSeries, window: int = 11, k: float = 4.0,
                  floor: float = 1e-10) -> list[SpikeEvent]:
    """Median/MAD outlier detection over a sliding window of odd length.

    Only samples with a full window on both sides are eligible; a sample
    qualifies when it is a strict local extremum of the current against its
    immediate neighbours and |i - median| > max(k * MAD, floor).
    """
    if window < 3 or window % 2 == 0:
        raise ValidationError(f"window must be odd and >= 3, got {window}")
    if k <= 0:
        raise ValidationError(f"k must be > 0, got {k}")
    if floor < 0:
        raise ValidationError(f"floor must be >= 0, got {floor}")
    n = len(series.records)
    if n < window:
        raise ValidationError(f"series has {n} samples, needs at least window = {window}")
    t = series.t
    v = series.v
    i = series.i
    half = window // 2
    events = []
    for j in range(half, n - half):
        center = i[j]
        if not (
            (center > i[j - 1] and center > i[j + 1])
            or (center < i[j - 1] and center < i[j + 1])
        ):
            continue
        block = i[j - half : j + half + 1]
        med = float(np.median(block))
        mad = float(np.median(np.abs(block - med)))
        deviation = abs(center - med)
        if deviation > max(k * mad, floor):
            events.append(
                SpikeEvent(
                    index=j,
                    t=float(t[j]),
                    v=float(v[j]),
                    i=float(center),
                    prominence=deviation,
                )
            )
    return events


def interval_histogram(spikes, bin_width: float, phase_boundary_t: float | None = None) -> IntervalHistogram:
    """Histogram of |v_next - v_prev| between consecutive spikes.

    With phase_boundary_t set, the consecutive pair straddling that time is
    dropped, so intervals never bridge the two sweep phases. Fewer than two
    spikes (per phase) contribute no intervals.
    """
    if bin_width <= 0:
        raise ValidationError(f"bin_width must be > 0, got {bin_width}")
    spikes = sorted(spikes, key=lambda s: s.t)
    counts: dict[float, int] = {}
    for prev, cur in zip(spikes, spikes[1:]):
        if phase_boundary_t is not None and prev.t <= phase_boundary_t < cur.t:
            continue
        gap = abs(cur.v - prev.v)
        m = math.floor(gap / bin_width + 1e-12)
        edge = m * bin_width
        counts[edge] = counts.get(edge, 0) + 1
    return IntervalHistogram(bin_width=bin_width, counts=counts)
