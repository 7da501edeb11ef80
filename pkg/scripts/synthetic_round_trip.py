"""Generate a constant-memfractance device and recover its orders.

Builds a synthetic sweep at the requested (alpha1, alpha2), optionally adds
seeded Gaussian noise to the current channel, fits both channels, searches
the order plane, and reports how far the recovered pair landed from the
spec. Devices whose orders differ by the same amount are observationally
identical, so the search reports the shift-class representative nearest
(1, 1); expect that representative, not necessarily the literal input.
"""

from __future__ import annotations

import argparse

import numpy as np

from memfract import (
    FracOrderPair,
    SearchConfig,
    SyntheticDeviceSpec,
    Waveform,
    fit_polynomial,
    integrate_polynomial,
    search_optimal,
    synth_memfractor_sweep,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha1", type=float, default=1.5)
    parser.add_argument("--alpha2", type=float, default=0.5)
    parser.add_argument("--f-const", type=float, default=1e6)
    parser.add_argument("--noise", type=float, default=0.0,
                        help="noise sigma as a fraction of current amplitude")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--degree", type=int, default=4)
    parser.add_argument("--grid", type=int, default=81)
    args = parser.parse_args()

    drive = Waveform("sine", 1.0, 8.0, 512)
    spec = SyntheticDeviceSpec(FracOrderPair(args.alpha1, args.alpha2), args.f_const, drive)
    series = synth_memfractor_sweep(spec)
    t, v, i = series.t, series.v, series.i
    if args.noise:
        rng = np.random.default_rng(args.seed)
        i = i + rng.normal(0.0, args.noise * np.max(np.abs(i)), i.size)

    poly_v, stats_v = fit_polynomial(np.column_stack([t, v]), args.degree)
    poly_i, stats_i = fit_polynomial(np.column_stack([t, i]), args.degree)
    cfg = SearchConfig(n_alpha=args.grid, n_t=1024, t_end=3.6)
    result = search_optimal(integrate_polynomial(poly_v), integrate_polynomial(poly_i), cfg)

    print(f"spec orders:      ({args.alpha1}, {args.alpha2}), F = {args.f_const:g}")
    print(f"fit R^2:          v {stats_v.r_squared:.9f}, i {stats_i.r_squared:.9f}")
    print(f"recovered orders: ({result.alphas.alpha1}, {result.alphas.alpha2})"
          f"{'  [shift-class representative]' if result.ridge_canonicalized else ''}")
    print(f"range:            {result.range_value:.3e}"
          f" ({result.range_value / abs(args.f_const):.2e} of |F|)")
    d1 = result.alphas.alpha1 - args.alpha1
    d2 = result.alphas.alpha2 - args.alpha2
    print(f"offset from spec: ({d1:+.4f}, {d2:+.4f})")
    if abs(d1 - d2) < 1e-9 and abs(d1) > 1e-9:
        print("offsets are equal: the device sits on the same shift line as the spec")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
