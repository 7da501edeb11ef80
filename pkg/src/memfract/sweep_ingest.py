"""Parsing, validation, resampling and averaging of cyclic-voltammetry runs.

File format (one CSV, many runs): header line ``run_id,t_s,v_V,i_A``, comma
separated decimal/scientific numbers, UTF-8, LF or CRLF. Lines starting with
'#' are tool headers and are skipped. A sidecar JSON object supplies the
sweep configuration.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "SweepRecord",
    "SweepSeries",
    "SweepConfig",
    "parse_sweep_csv",
    "serialize_sweep_csv",
    "average_runs",
    "histogram_bin_width",
]

CSV_HEADER = "run_id,t_s,v_V,i_A"

ELECTRODE_ARRANGEMENTS = ("cap_to_cap", "stem_to_cap")


@dataclass(frozen=True)
class SweepRecord:
    """One timestamped reading: time in seconds, voltage in volts, current in amperes."""

    t: float
    v: float
    i: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t >= 0.0):
            raise ValidationError(f"time must be finite and >= 0, got {self.t!r}")
        if not (math.isfinite(self.v) and math.isfinite(self.i)):
            raise ValidationError(f"voltage/current must be finite, got v={self.v!r}, i={self.i!r}")


@dataclass(frozen=True)
class SweepConfig:
    """Sweep protocol: voltage window, SMU voltage step, electrode arrangement."""

    v_min: float
    v_max: float
    v_step: float
    electrode_arrangement: str
    direction: str = "cyclic"

    def __post_init__(self):
        if not self.v_min < self.v_max:
            raise ValidationError(f"need v_min < v_max, got [{self.v_min}, {self.v_max}]")
        if not 0.0 < self.v_step <= self.v_max - self.v_min:
            raise ValidationError(
                f"need 0 < v_step <= v_max - v_min, got v_step={self.v_step}"
            )
        if self.electrode_arrangement not in ELECTRODE_ARRANGEMENTS:
            raise ValidationError(
                f"electrode_arrangement must be one of {ELECTRODE_ARRANGEMENTS}, "
                f"got {self.electrode_arrangement!r}"
            )
        if self.direction != "cyclic":
            raise ValidationError(f"direction must be 'cyclic', got {self.direction!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        try:
            return cls(
                v_min=float(d["v_min"]),
                v_max=float(d["v_max"]),
                v_step=float(d["v_step"]),
                electrode_arrangement=str(d["electrode_arrangement"]),
                direction=str(d.get("direction", "cyclic")),
            )
        except KeyError as exc:
            raise ValidationError(f"sweep config missing key {exc.args[0]!r}") from None


@dataclass(frozen=True)
class SweepSeries:
    """An ordered run of readings, strictly increasing in time."""

    records: tuple[SweepRecord, ...]
    run_id: str
    meta: SweepConfig | None = None

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        if len(records) < 2:
            raise ValidationError(f"run {self.run_id!r}: need at least 2 records, got {len(records)}")
        for a, b in zip(records, records[1:]):
            if not a.t < b.t:
                raise ValidationError(
                    f"run {self.run_id!r}: time not strictly increasing at t = {b.t!r}"
                )

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records], dtype=float)

    @property
    def v(self) -> np.ndarray:
        return np.array([r.v for r in self.records], dtype=float)

    @property
    def i(self) -> np.ndarray:
        return np.array([r.i for r in self.records], dtype=float)


def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    raise ValidationError(f"unsupported source type {type(source).__name__}")


def parse_sweep_csv(source, config: SweepConfig | None = None) -> list[SweepSeries]:
    """Parse one CSV holding any number of runs; one series per distinct run_id.

    Within a run the rows must appear with strictly increasing t; runs may
    interleave freely. Errors carry the 1-based line number of the offender.
    """
    text = _as_text(source)
    lines = text.splitlines()
    header_line = None
    start = 0
    for idx, raw in enumerate(lines):
        if raw.strip() == "" or raw.lstrip().startswith("#"):
            continue
        header_line = raw.strip()
        start = idx + 1
        break
    if header_line is None:
        raise ParseError("empty file: no header line found")
    if header_line != CSV_HEADER:
        raise ParseError(f"expected header {CSV_HEADER!r}, got {header_line!r}", line=start)

    per_run: dict[str, list[SweepRecord]] = {}
    last_t: dict[str, tuple[float, int]] = {}
    n_rows = 0
    for idx in range(start, len(lines)):
        raw = lines[idx]
        lineno = idx + 1
        if raw.strip() == "" or raw.lstrip().startswith("#"):
            continue
        fields = raw.strip().split(",")
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", line=lineno)
        run_id = fields[0].strip()
        if not run_id:
            raise ParseError("empty run_id", line=lineno)
        try:
            t, v, i = (float(fields[k]) for k in (1, 2, 3))
        except ValueError:
            raise ParseError(f"non-numeric field in {raw.strip()!r}", line=lineno) from None
        try:
            record = SweepRecord(t=t, v=v, i=i)
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        if run_id in last_t and not last_t[run_id][0] < t:
            raise ValidationError(
                f"line {lineno}: run {run_id!r} time {t!r} not greater than "
                f"{last_t[run_id][0]!r} (line {last_t[run_id][1]})"
            )
        last_t[run_id] = (t, lineno)
        per_run.setdefault(run_id, []).append(record)
        n_rows += 1
    if n_rows == 0:
        raise ValidationError("no data rows")
    return [
        SweepSeries(records=tuple(records), run_id=run_id, meta=config)
        for run_id, records in per_run.items()
    ]


def serialize_sweep_csv(runs, header_comment: str | None = None) -> str:
    """Inverse of parse_sweep_csv; floats as shortest round-trip decimals."""
    out = io.StringIO()
    if header_comment is not None:
        out.write(f"# {header_comment}\n")
    out.write(CSV_HEADER + "\n")
    for run in runs:
        for r in run.records:
            out.write(f"{run.run_id},{r.t!r},{r.v!r},{r.i!r}\n")
    return out.getvalue()


def average_runs(runs) -> SweepSeries:
    """Pointwise average on the first run's grid, linear interpolation per run.

    Only the time interval common to every run is kept; grid points outside
    the overlap are dropped rather than extrapolated.
    """
    runs = list(runs)
    if not runs:
        raise ValidationError("need at least one run to average")
    meta = runs[0].meta
    for run in runs[1:]:
        if run.meta != meta:
            raise ValidationError(
                f"run {run.run_id!r} has a different sweep config than {runs[0].run_id!r}"
            )
    base = runs[0].t
    lo = max(float(run.records[0].t) for run in runs)
    hi = min(float(run.records[-1].t) for run in runs)
    grid = base[(base >= lo) & (base <= hi)]
    if grid.size < 2:
        raise ValidationError("runs share fewer than 2 overlapping grid points")
    n = len(runs)
    v_acc = np.zeros_like(grid)
    i_acc = np.zeros_like(grid)
    for run in runs:
        ts = run.t
        v_acc += np.interp(grid, ts, run.v)
        i_acc += np.interp(grid, ts, run.i)
    records = tuple(
        SweepRecord(t=float(t), v=float(v / n), i=float(i / n))
        for t, v, i in zip(grid, v_acc, i_acc)
    )
    return SweepSeries(records=records, run_id="average", meta=meta)


def histogram_bin_width(config: SweepConfig) -> float:
    """Histogram bin width equals the SMU voltage step."""
    return config.v_step
