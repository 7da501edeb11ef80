"""Command-line front end: ingestion, fitting, search, reconstruction, reports.

Exit codes: 0 success, 2 input or validation error, 3 search infeasibility.
Every output file carries the tool version and a digest of the inputs; runs
are deterministic, so repeated invocations produce byte-identical files
(timestamps come from SOURCE_DATE_EPOCH when set, never from the wall clock).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bundled import dump_coeff_json, load_coeff_json
from .errors import InfeasibleSearchError, MemfractError, ValidationError
from .fractional_calculus import FracOrderPair
from .memfractance import (
    SearchConfig,
    classify_device,
    reconstruct_current,
    search_optimal,
    verify_reconstruction,
    zero_loci,
)
from .polyfit import (
    PiecewisePolynomial,
    estimate_breakpoint,
    fit_piecewise,
    fit_polynomial,
    integrate_piecewise,
    integrate_polynomial,
)
from .reference_models import (
    IdealMemristorParams,
    SyntheticDeviceSpec,
    Waveform,
    simulate_ideal_memristor,
    synth_memfractor_sweep,
)
from .spike_analysis import detect_spikes, interval_histogram
from .sweep_ingest import SweepConfig, average_runs, parse_sweep_csv, serialize_sweep_csv

__all__ = ["main"]


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written next to every command's outputs."""

    command: str
    input_paths: tuple[str, ...]
    config_path: str | None
    out_dir: str
    version: str
    timestamp: str
    input_sha256: str


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return datetime.fromtimestamp(int(epoch), timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return "unset"


def _digest_bytes(chunks) -> str:
    h = hashlib.sha256()
    for chunk in chunks:
        h.update(chunk)
    return h.hexdigest()[:16]


def _digest_files(paths) -> str:
    return _digest_bytes(Path(p).read_bytes() for p in paths)


def _meta(digest: str) -> dict:
    return {"tool": "memfract", "version": __version__, "input_sha256": digest}


def _header_line(digest: str) -> str:
    return f"# memfract {__version__} input_sha256={digest}"


def _write_json(path: Path, payload: dict, digest: str) -> None:
    payload = dict(payload)
    payload["_meta"] = _meta(digest)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, columns: str, rows, digest: str) -> None:
    lines = [_header_line(digest), columns]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _save_svg(path: Path, fig, digest: str) -> None:
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = "memfract"
    fig.savefig(path, format="svg", metadata={"Date": None})
    text = path.read_text(encoding="utf-8")
    nl = text.index("\n") + 1
    path.write_text(text[:nl] + f"<!-- memfract {__version__} input_sha256={digest} -->\n" + text[nl:],
                    encoding="utf-8")


def _load_sweep_config(path: str | None) -> SweepConfig | None:
    if path is None:
        return None
    return SweepConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(args, command: str, inputs, digest: str) -> None:
    manifest = RunManifest(
        command=command,
        input_paths=tuple(str(p) for p in inputs),
        config_path=getattr(args, "config", None),
        out_dir=str(args.out_dir),
        version=__version__,
        timestamp=_timestamp(),
        input_sha256=digest,
    )
    path = _out_dir(args) / f"manifest_{command}.json"
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _safe_name(run_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", run_id) or "run"


def cmd_fit(args) -> int:
    config = _load_sweep_config(args.config)
    runs = parse_sweep_csv(Path(args.input).read_bytes(), config)
    avg = average_runs(runs)
    digest = _digest_files([args.input])
    out = _out_dir(args)

    t = avg.t
    v_samples = np.column_stack([t, avg.v])
    i_samples = np.column_stack([t, avg.i])
    domain = (float(t.min()), float(t.max()))

    if args.piecewise:
        if args.breakpoint == "auto":
            breakpoint_t = estimate_breakpoint(runs)
        else:
            breakpoint_t = float(args.breakpoint)
        poly_v, stats_v = fit_piecewise(v_samples, args.degree, breakpoint_t)
        poly_i, stats_i = fit_piecewise(i_samples, args.degree, breakpoint_t)
        stats_doc = {
            "breakpoint": breakpoint_t,
            "voltage": {"left": asdict(stats_v[0]), "right": asdict(stats_v[1])},
            "current": {"left": asdict(stats_i[0]), "right": asdict(stats_i[1])},
        }
    else:
        poly_v, stats_v = fit_polynomial(v_samples, args.degree)
        poly_i, stats_i = fit_polynomial(i_samples, args.degree)
        stats_doc = {"voltage": asdict(stats_v), "current": asdict(stats_i)}

    _write_json(out / "v_coeffs.json", dump_coeff_json(poly_v, "voltage_V", domain), digest)
    _write_json(out / "i_coeffs.json", dump_coeff_json(poly_i, "current_A", domain), digest)
    _write_json(out / "fit_stats.json", stats_doc, digest)

    v_fit = np.asarray(poly_v(t), dtype=float)
    i_fit = np.asarray(poly_i(t), dtype=float)
    rows = (
        f"{tv!r},{vv!r},{vf!r},{iv!r},{if_!r}"
        for tv, vv, vf, iv, if_ in zip(t, avg.v, v_fit, avg.i, i_fit)
    )
    _write_csv(out / "overlay.csv", "t_s,v_V,v_fit_V,i_A,i_fit_A", rows, digest)
    _write_manifest(args, "fit", [args.input], digest)
    return 0


def _parse_grid(text: str) -> int:
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise ValidationError(f"--grid must look like 201x201, got {text!r}")
    n1, n2 = int(m.group(1)), int(m.group(2))
    if n1 != n2:
        raise ValidationError(f"--grid must be square, got {text!r}")
    return n1


def _load_fit_doc(path: str):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    poly = load_coeff_json(doc)
    domain = doc.get("domain")
    t_end = float(domain[1]) if domain else None
    return poly, t_end


def cmd_search(args) -> int:
    poly_v, t_end_v = _load_fit_doc(args.v_coeffs)
    poly_i, t_end_i = _load_fit_doc(args.i_coeffs)
    t_end = args.t_end or t_end_v or t_end_i
    if t_end is None:
        raise ValidationError("no domain in the coefficient files; pass --t-end")
    if isinstance(poly_v, PiecewisePolynomial) != isinstance(poly_i, PiecewisePolynomial):
        raise ValidationError("voltage and current fits must both be global or both piecewise")
    piecewise = isinstance(poly_v, PiecewisePolynomial)
    flux = integrate_piecewise(poly_v) if piecewise else integrate_polynomial(poly_v)
    charge = integrate_piecewise(poly_i) if piecewise else integrate_polynomial(poly_i)

    cfg = SearchConfig(
        n_alpha=_parse_grid(args.grid),
        n_t=args.t_points,
        t_end=float(t_end),
        eps_t=args.eps_t,
        delta=args.delta,
        on_infeasible="error" if args.strict_singularities else "relax",
        alpha2_fixed=args.fix_alpha2,
        threads=args.threads,
    )
    result = search_optimal(flux, charge, cfg)
    digest = _digest_files([args.v_coeffs, args.i_coeffs])
    out = _out_dir(args)

    _write_json(
        out / "optimum.json",
        {
            "alpha1": result.alphas.alpha1,
            "alpha2": result.alphas.alpha2,
            "range": result.range_value,
            "ridge_canonicalized": result.ridge_canonicalized,
            "unmatched_pole_count": result.unmatched_pole_count,
            "num_zeros": list(result.num_zeros),
            "den_zeros": list(result.den_zeros),
            "grid": args.grid,
            "t_points": cfg.n_t,
            "t_end": cfg.t_end,
        },
        digest,
    )

    curve = result.curve
    finite = curve.finite_mask
    rows = (
        f"{tv!r},{fv!r}"
        for tv, fv in zip(curve.t_grid[finite], curve.values[finite])
    )
    _write_csv(out / "curve.csv", "t_s,memfractance", rows, digest)

    locus_alphas = np.linspace(0.0, 2.0, min(cfg.n_alpha, 81))
    locus_rows = []
    for side, poly in (("numerator", flux), ("denominator", charge)):
        for locus in zero_loci(poly, locus_alphas, t_end=cfg.t_end, grid_n=cfg.n_t, delta=cfg.delta):
            for z in locus.zeros:
                locus_rows.append(f"{side},{locus.alpha!r},{z!r}")
    _write_csv(out / "zero_locus.csv", "side,alpha,t_zero", locus_rows, digest)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(curve.t_grid, np.where(finite, curve.values, np.nan), lw=1.0)
    for z in curve.singular_points:
        ax.axvline(z, color="tab:red", ls="--", lw=0.8)
    ax.set_xlabel("t (s)")
    ax.set_ylabel("memfractance")
    ax.set_title(
        f"alpha1 = {result.alphas.alpha1:.6f}, alpha2 = {result.alphas.alpha2:.6f}, "
        f"range = {result.range_value:.6g}"
    )
    fig.tight_layout()
    _save_svg(out / "memfractance.svg", fig, digest)
    plt.close(fig)

    _write_manifest(args, "search", [args.v_coeffs, args.i_coeffs], digest)
    return 0


def cmd_reconstruct(args) -> int:
    poly_i, t_end = _load_fit_doc(args.i_coeffs)
    if isinstance(poly_i, PiecewisePolynomial):
        raise ValidationError("reconstruction works on global fits; pass a global coefficient file")
    charge = integrate_polynomial(poly_i)
    alphas = FracOrderPair(args.alpha1, args.alpha2)
    flux = None
    inputs = [args.i_coeffs]
    if args.v_coeffs:
        poly_v, _ = _load_fit_doc(args.v_coeffs)
        flux = integrate_polynomial(poly_v)
        inputs.insert(0, args.v_coeffs)
    current = reconstruct_current(flux, charge, alphas)
    digest = _digest_files(inputs)
    out = _out_dir(args)
    t_end = args.t_end or t_end or 1.0

    payload = dump_coeff_json(current, "current_A", (0.0, float(t_end)))
    if args.verify_points > 0:
        probes = np.linspace(t_end / (args.verify_points + 1), t_end * 0.9, args.verify_points)
        payload["verification_max_rel_error"] = verify_reconstruction(
            flux, charge, alphas, [float(p) for p in probes], h=args.verify_h
        )
    _write_json(out / "reconstructed_current.json", payload, digest)

    grid = np.linspace(t_end / 512, float(t_end), 512)
    rows = (f"{tv!r},{iv!r}" for tv, iv in zip(grid, np.asarray(current(grid), dtype=float)))
    _write_csv(out / "reconstruction.csv", "t_s,i_A", rows, digest)
    _write_manifest(args, "reconstruct", inputs, digest)
    return 0


def cmd_spikes(args) -> int:
    config = _load_sweep_config(args.config)
    runs = parse_sweep_csv(Path(args.input).read_bytes(), config)
    if args.bin_width is not None:
        bin_width = args.bin_width
    elif config is not None:
        bin_width = config.v_step
    else:
        raise ValidationError("provide --bin-width or a --config with v_step")
    digest = _digest_files([args.input])
    out = _out_dir(args)

    all_rows = []
    merged: dict[float, int] = {}
    for run in runs:
        spikes = detect_spikes(run, window=args.window, k=args.k, floor=args.floor)
        name = _safe_name(run.run_id)
        rows = [
            f"{s.index},{s.t!r},{s.v!r},{s.i!r},{s.prominence!r}" for s in spikes
        ]
        _write_csv(out / f"spikes_{name}.csv", "index,t_s,v_V,i_A,prominence_A", rows, digest)
        all_rows.extend(f"{run.run_id},{r}" for r in rows)

        if args.phase_boundary == "none":
            boundary = None
        elif args.phase_boundary == "auto":
            boundary = float(run.t[int(np.argmax(run.v))])
        else:
            boundary = float(args.phase_boundary)
        hist = interval_histogram(spikes, bin_width, phase_boundary_t=boundary)
        hist_rows = [f"{edge!r},{count}" for edge, count in hist.counts.items()]
        _write_csv(out / f"histogram_{name}.csv", "bin_start_V,count", hist_rows, digest)
        for edge, count in hist.counts.items():
            merged[edge] = merged.get(edge, 0) + count

    _write_csv(out / "spikes_concat.csv", "run_id,index,t_s,v_V,i_A,prominence_A", all_rows, digest)
    merged_rows = [f"{edge!r},{merged[edge]}" for edge in sorted(merged)]
    _write_csv(out / "histogram_concat.csv", "bin_start_V,count", merged_rows, digest)
    _write_manifest(args, "spikes", [args.input], digest)
    return 0


def cmd_simulate(args) -> int:
    spec_doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    if not isinstance(spec_doc, dict) or "model" not in spec_doc:
        raise ValidationError('device spec must be a JSON object with a "model" key')
    drive = Waveform.from_dict(spec_doc.get("drive", {}))
    model = spec_doc["model"]
    if model == "ideal_memristor":
        params = spec_doc.get("params", {})
        if not isinstance(params, dict):
            raise ValidationError('"params" must be an object')
        series = simulate_ideal_memristor(IdealMemristorParams(**params), drive)
    elif model == "memfractor":
        alphas = spec_doc.get("alphas")
        if not isinstance(alphas, (list, tuple)) or len(alphas) != 2:
            raise ValidationError('"alphas" must be a two-element array')
        spec = SyntheticDeviceSpec(
            alphas=FracOrderPair(float(alphas[0]), float(alphas[1])),
            f_const=float(spec_doc.get("f_const", 0.0)),
            drive=drive,
        )
        series = synth_memfractor_sweep(spec)
    else:
        raise ValidationError(f"unknown model {model!r}; use ideal_memristor or memfractor")

    digest = _digest_files([args.spec])
    out = _out_dir(args)
    sweep_text = serialize_sweep_csv([series], header_comment=_header_line(digest)[2:])
    (out / "sweep.csv").write_text(sweep_text, encoding="utf-8")
    rows = (f"{r.v!r},{r.i!r}" for r in series.records)
    _write_csv(out / "iv_curve.csv", "v_V,i_A", rows, digest)
    _write_manifest(args, "simulate", [args.spec], digest)
    return 0


def cmd_classify(args) -> int:
    anchors = None
    inputs = []
    if args.anchors:
        anchors = {
            k: tuple(v)
            for k, v in json.loads(Path(args.anchors).read_text(encoding="utf-8")).items()
        }
        inputs.append(args.anchors)
    alphas = FracOrderPair(args.alpha1, args.alpha2)
    result = classify_device(
        alphas, anchors, anchor_tol=args.anchor_tol, segment_tol=args.segment_tol
    )
    digest = _digest_files(inputs) if inputs else _digest_bytes(
        [f"{alphas.alpha1!r},{alphas.alpha2!r}".encode()]
    )
    out = _out_dir(args)
    _write_json(
        out / "classification.json",
        {
            "alpha1": result.point[0],
            "alpha2": result.point[1],
            "label": result.label,
            "region_descriptor": result.region_descriptor,
        },
        digest,
    )
    _write_manifest(args, "classify", inputs, digest)
    print(f"{result.label}: {result.region_descriptor}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memfract",
        description="Memfractance extraction toolkit for cyclic-voltammetry sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"memfract {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--config", default=None, help="sweep config JSON path")
    common.add_argument("--threads", type=int, default=None, help="cap search parallelism")
    common.add_argument("--seed", type=int, default=None, help="seed recorded for provenance")

    p = sub.add_parser("fit", parents=[common], help="fit v(t), i(t) polynomials to a sweep CSV")
    p.add_argument("--input", required=True, help="sweep CSV path")
    p.add_argument("--degree", type=int, default=24)
    p.add_argument("--piecewise", action="store_true", help="two-piece fit split at the vertex")
    p.add_argument("--breakpoint", default="auto", help='vertex time or "auto"')
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("search", parents=[common], help="search (alpha1, alpha2) minimizing the range")
    p.add_argument("--v-coeffs", required=True, help="voltage fit JSON")
    p.add_argument("--i-coeffs", required=True, help="current fit JSON")
    p.add_argument("--grid", default="201x201")
    p.add_argument("--t-points", type=int, default=2048)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--eps-t", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.33)
    p.add_argument("--fix-alpha2", type=float, default=None)
    p.add_argument(
        "--strict-singularities",
        action="store_true",
        help="fail (exit 3) unless some grid couple matches every denominator zero",
    )
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("reconstruct", parents=[common], help="rebuild i(t) from the fitted charge")
    p.add_argument("--i-coeffs", required=True)
    p.add_argument("--v-coeffs", default=None)
    p.add_argument("--alpha1", type=float, default=1.0)
    p.add_argument("--alpha2", type=float, default=1.0)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--verify-points", type=int, default=0,
                   help="numerically verify at N probe times (needs alpha2 <= 1)")
    p.add_argument("--verify-h", type=float, default=1e-3)
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("spikes", parents=[common], help="detect current spikes and bin intervals")
    p.add_argument("--input", required=True, help="sweep CSV path")
    p.add_argument("--window", type=int, default=11)
    p.add_argument("--k", type=float, default=4.0)
    p.add_argument("--floor", type=float, default=1e-10)
    p.add_argument("--bin-width", type=float, default=None)
    p.add_argument("--phase-boundary", default="none",
                   help='"none", "auto" (split at the voltage apex), or a time in seconds')
    p.set_defaults(handler=cmd_spikes)

    p = sub.add_parser("simulate", parents=[common], help="generate a reference device sweep")
    p.add_argument("--spec", required=True, help="device spec JSON path")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("classify", parents=[common], help="place (alpha1, alpha2) among mem-elements")
    p.add_argument("--alpha1", type=float, required=True)
    p.add_argument("--alpha2", type=float, required=True)
    p.add_argument("--anchors", default=None, help="anchor table JSON path")
    p.add_argument("--anchor-tol", type=float, default=1e-6)
    p.add_argument("--segment-tol", type=float, default=0.02)
    p.set_defaults(handler=cmd_classify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InfeasibleSearchError as exc:
        print(f"memfract: {exc}", file=sys.stderr)
        return 3
    except (MemfractError, OSError, json.JSONDecodeError) as exc:
        print(f"memfract: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
