"""Spike summary for a sweep CSV.

Detects current spikes per run, bins inter-spike voltage intervals, and
prints a compact report: spike counts, the most prominent events, and the
interval histogram. A quick look before committing to the full CLI outputs.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from memfract import detect_spikes, interval_histogram, parse_sweep_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input", help="sweep CSV path")
    parser.add_argument("--window", type=int, default=11)
    parser.add_argument("--k", type=float, default=4.0)
    parser.add_argument("--bin-width", type=float, default=0.01)
    parser.add_argument("--top", type=int, default=5, help="events to list per run")
    parser.add_argument("--split-at-apex", action="store_true",
                        help="drop the interval straddling the voltage apex")
    args = parser.parse_args()

    runs = parse_sweep_csv(Path(args.input).read_bytes())
    for run in runs:
        spikes = detect_spikes(run, window=args.window, k=args.k)
        print(f"run {run.run_id}: {len(spikes)} spikes over {len(run.records)} samples")
        for event in sorted(spikes, key=lambda s: -s.prominence)[: args.top]:
            print(f"  t = {event.t:.6g} s, v = {event.v:.4g} V, "
                  f"i = {event.i:.4g} A, prominence {event.prominence:.3g} A")
        boundary = float(run.t[int(np.argmax(run.v))]) if args.split_at_apex else None
        hist = interval_histogram(spikes, args.bin_width, phase_boundary_t=boundary)
        if hist.counts:
            print(f"  intervals ({hist.total} total, bin {args.bin_width:g} V):")
            for edge, count in hist.counts.items():
                print(f"    [{edge:.3g}, {edge + args.bin_width:.3g}) V: {count}")
        else:
            print("  no inter-spike intervals")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
