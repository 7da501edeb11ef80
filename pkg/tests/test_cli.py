"""End-to-end command-line checks: exit codes, outputs, determinism."""

import json
import re

import numpy as np
import pytest

from memfract import (
    FracOrderPair,
    Polynomial,
    SyntheticDeviceSpec,
    Waveform,
    __version__,
    parse_sweep_csv,
    serialize_sweep_csv,
    synth_memfractor_sweep,
)
from memfract.bundled import dump_coeff_json
from memfract.cli import main

from conftest import make_series

HEADER_RE = re.compile(r"^# memfract \S+ input_sha256=[0-9a-f]{16}$")


def write_synth_csv(path, alphas=(1.0, 1.0), f_const=1000.0):
    spec = SyntheticDeviceSpec(
        FracOrderPair(*alphas), f_const, Waveform("sine", 1.0, 8.0, 512)
    )
    series = synth_memfractor_sweep(spec)
    path.write_text(serialize_sweep_csv([series]), encoding="utf-8")
    return path


def test_fit_writes_fit_bundle(tmp_path):
    csv = write_synth_csv(tmp_path / "sweep.csv")
    out = tmp_path / "out"
    rc = main(["fit", "--input", str(csv), "--degree", "4", "--out-dir", str(out)])
    assert rc == 0
    for name in ("v_coeffs.json", "i_coeffs.json", "fit_stats.json", "overlay.csv",
                 "manifest_fit.json"):
        assert (out / name).exists()
    doc = json.loads((out / "v_coeffs.json").read_text())
    assert doc["_meta"]["version"] == __version__
    assert len(doc["coeffs"]) == 5
    first_line = (out / "overlay.csv").read_text().splitlines()[0]
    assert HEADER_RE.match(first_line)
    stats = json.loads((out / "fit_stats.json").read_text())
    assert stats["voltage"]["r_squared"] > 0.99


def test_fit_piecewise_explicit_breakpoint(tmp_path):
    csv = write_synth_csv(tmp_path / "sweep.csv")
    out = tmp_path / "out"
    rc = main([
        "fit", "--input", str(csv), "--degree", "3", "--piecewise",
        "--breakpoint", "4.0", "--out-dir", str(out),
    ])
    assert rc == 0
    stats = json.loads((out / "fit_stats.json").read_text())
    assert stats["breakpoint"] == 4.0
    assert "left" in stats["voltage"] and "right" in stats["voltage"]
    doc = json.loads((out / "v_coeffs.json").read_text())
    assert doc["breakpoint"] == 4.0


def test_simulate_fit_search_round_trip(tmp_path):
    # a constant-memfractance device built at (1.5, 0.5) comes back out of the
    # full pipeline at exactly that canonical pair
    spec_path = tmp_path / "device.json"
    spec_path.write_text(json.dumps({
        "model": "memfractor",
        "alphas": [1.5, 0.5],
        "f_const": 1.0,
        "drive": {"shape": "sine", "amplitude": 1.0, "period": 8.0, "samples": 512},
    }))
    sim_dir = tmp_path / "sim"
    assert main(["simulate", "--spec", str(spec_path), "--out-dir", str(sim_dir)]) == 0
    assert (sim_dir / "sweep.csv").exists()
    assert (sim_dir / "iv_curve.csv").exists()

    fit_dir = tmp_path / "fit"
    assert main([
        "fit", "--input", str(sim_dir / "sweep.csv"), "--degree", "4",
        "--out-dir", str(fit_dir),
    ]) == 0

    search_dir = tmp_path / "search"
    rc = main([
        "search",
        "--v-coeffs", str(fit_dir / "v_coeffs.json"),
        "--i-coeffs", str(fit_dir / "i_coeffs.json"),
        "--grid", "81x81", "--t-points", "1024", "--t-end", "3.6",
        "--out-dir", str(search_dir),
    ])
    assert rc == 0
    optimum = json.loads((search_dir / "optimum.json").read_text())
    assert optimum["alpha1"] == pytest.approx(1.5, abs=1e-12)
    assert optimum["alpha2"] == pytest.approx(0.5, abs=1e-12)
    assert optimum["ridge_canonicalized"] is True
    for name in ("curve.csv", "zero_locus.csv", "memfractance.svg", "manifest_search.json"):
        assert (search_dir / name).exists()
    svg_head = (search_dir / "memfractance.svg").read_text().splitlines()[1]
    assert "input_sha256=" in svg_head


def test_search_strict_singularities_exit_3(tmp_path, capsys, global_fits):
    poly_v, poly_i = global_fits
    v_path = tmp_path / "v.json"
    i_path = tmp_path / "i.json"
    v_path.write_text(json.dumps(dump_coeff_json(poly_v, "voltage_V", (0.0, 171.0))))
    i_path.write_text(json.dumps(dump_coeff_json(poly_i, "current_A", (0.0, 171.0))))
    rc = main([
        "search", "--v-coeffs", str(v_path), "--i-coeffs", str(i_path),
        "--grid", "41x41", "--t-points", "1024", "--strict-singularities",
        "--out-dir", str(tmp_path / "out"),
    ])
    assert rc == 3
    assert "nearest matched-zero couples" in capsys.readouterr().err


def test_bad_grid_exit_2(tmp_path, capsys, global_fits):
    poly_v, poly_i = global_fits
    v_path = tmp_path / "v.json"
    i_path = tmp_path / "i.json"
    v_path.write_text(json.dumps(dump_coeff_json(poly_v, "voltage_V", (0.0, 171.0))))
    i_path.write_text(json.dumps(dump_coeff_json(poly_i, "current_A", (0.0, 171.0))))
    rc = main([
        "search", "--v-coeffs", str(v_path), "--i-coeffs", str(i_path),
        "--grid", "201x101", "--out-dir", str(tmp_path / "out"),
    ])
    assert rc == 2
    assert "square" in capsys.readouterr().err


def test_missing_input_exit_2(tmp_path, capsys):
    rc = main(["fit", "--input", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path)])
    assert rc == 2


def test_fit_outputs_are_deterministic(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    csv = write_synth_csv(tmp_path / "sweep.csv")
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["fit", "--input", str(csv), "--degree", "4",
                     "--out-dir", str(out)]) == 0
    for name in ("v_coeffs.json", "i_coeffs.json", "fit_stats.json", "overlay.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    man_a = json.loads((out_a / "manifest_fit.json").read_text())
    man_b = json.loads((out_b / "manifest_fit.json").read_text())
    assert man_a["timestamp"] == "2023-11-14T22:13:20Z" == man_b["timestamp"]
    assert man_a["input_sha256"] == man_b["input_sha256"]


def test_simulate_ideal_memristor_sweep_parses_back(tmp_path):
    spec_path = tmp_path / "device.json"
    spec_path.write_text(json.dumps({
        "model": "ideal_memristor",
        "params": {"r_on": 100.0, "r_off": 16000.0, "d": 1e-8, "mu": 1e-15, "w0": 1e-9},
        "drive": {"shape": "sine", "amplitude": 1.0, "period": 2.0, "samples": 1000},
    }))
    out = tmp_path / "out"
    assert main(["simulate", "--spec", str(spec_path), "--out-dir", str(out)]) == 0
    runs = parse_sweep_csv((out / "sweep.csv").read_bytes())
    assert len(runs) == 1
    assert len(runs[0].records) == 1000
    assert runs[0].run_id == "ideal_memristor"


def test_simulate_unknown_model_exit_2(tmp_path, capsys):
    spec_path = tmp_path / "device.json"
    spec_path.write_text(json.dumps({
        "model": "quantum_flux",
        "drive": {"shape": "sine", "amplitude": 1.0, "period": 2.0, "samples": 128},
    }))
    rc = main(["simulate", "--spec", str(spec_path), "--out-dir", str(tmp_path)])
    assert rc == 2
    assert "unknown model" in capsys.readouterr().err


def test_classify_prints_label(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["classify", "--alpha1", "1.0", "--alpha2", "1.0", "--out-dir", str(out)])
    assert rc == 0
    assert "memristor" in capsys.readouterr().out
    doc = json.loads((out / "classification.json").read_text())
    assert doc["label"] == "memristor"


def test_classify_custom_anchor_table(tmp_path):
    anchors = tmp_path / "anchors.json"
    anchors.write_text(json.dumps({"ohmic": [1.0, 1.0], "oddball": [0.2, 1.7]}))
    out = tmp_path / "out"
    rc = main([
        "classify", "--alpha1", "0.2", "--alpha2", "1.7",
        "--anchors", str(anchors), "--out-dir", str(out),
    ])
    assert rc == 0
    doc = json.loads((out / "classification.json").read_text())
    assert doc["label"] == "oddball"


def test_reconstruct_reports_verification_error(tmp_path):
    current = Polynomial((0.0, 2.0, 0.3))
    i_path = tmp_path / "i.json"
    i_path.write_text(json.dumps(dump_coeff_json(current, "current_A", (0.0, 2.0))))
    out = tmp_path / "out"
    rc = main([
        "reconstruct", "--i-coeffs", str(i_path),
        "--alpha1", "1.0", "--alpha2", "0.5",
        "--verify-points", "3", "--out-dir", str(out),
    ])
    assert rc == 0
    doc = json.loads((out / "reconstructed_current.json").read_text())
    assert doc["coeffs"] == list(current.coeffs)
    assert doc["verification_max_rel_error"] < 1e-3
    assert (out / "reconstruction.csv").exists()


def test_spikes_command_finds_injected_impulses(tmp_path):
    n = 200
    t = np.linspace(0.001, 1.001, n)
    v = np.linspace(0.0, 1.0, n)
    i = 1e-9 * np.linspace(0.0, 1.0, n)
    for idx, sign in zip((30, 60, 95, 140, 180), (1, -1, 1, -1, 1)):
        i[idx] += sign * 5e-9
    series = make_series(t, v, i, run_id="lab_run")
    csv = tmp_path / "sweep.csv"
    csv.write_text(serialize_sweep_csv([series]), encoding="utf-8")
    out = tmp_path / "out"
    rc = main([
        "spikes", "--input", str(csv), "--bin-width", "0.05", "--out-dir", str(out),
    ])
    assert rc == 0
    spike_lines = (out / "spikes_lab_run.csv").read_text().splitlines()
    assert len(spike_lines) == 2 + 5  # header comment + column row + five events
    hist = (out / "histogram_concat.csv").read_text().splitlines()
    counts = [int(line.split(",")[1]) for line in hist[2:]]
    assert sum(counts) == 4


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out
