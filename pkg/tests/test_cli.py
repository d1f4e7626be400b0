import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from homflow.cli import main


def run_cli(*args: str) -> int:
    return main(list(args))


def test_help_via_subprocess():
    cp = subprocess.run([sys.executable, "-m", "homflow", "--help"], capture_output=True, text=True)
    assert cp.returncode == 0, cp.stderr
    for sub in ("simulate", "phase", "fixed-points", "curvature", "verify", "scaling-check"):
        assert sub in cp.stdout


def test_simulate_su2_manifest_reports_singularity(tmp_path: Path):
    out = tmp_path / "run.csv"
    code = run_cli("simulate", "--class", "su2", "--init", "7,5,3", "--alpha", "1", "--tmax", "2", "--out", str(out))
    assert code == 0
    manifest = json.loads((tmp_path / "run.manifest.json").read_text())
    assert manifest["terminal"] == "singular"
    assert abs(manifest["t_s"] - 0.702) < 0.01
    header = out.read_text().splitlines()[0]
    assert header == "t,A,B,C,scal,rc_norm_sq"


def test_simulate_sol_special_exact_endpoint(tmp_path: Path):
    out = tmp_path / "sol.csv"
    code = run_cli("simulate", "--system", "sol-special", "--init", "2,1", "--alpha", "0", "--tmax", "1", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,A,B,scal,rc_norm_sq"
    last = [float(v) for v in lines[-1].split(",")]
    assert last[1] == pytest.approx(2.0, rel=1e-12)
    assert last[2] == pytest.approx(17.0, rel=1e-10)


def test_simulate_rejects_nonpositive_component(tmp_path: Path, capsys):
    code = run_cli("simulate", "--class", "su2", "--init", "7,-5,3", "--alpha", "1", "--out", str(tmp_path / "x.csv"))
    assert code == 1
    assert "B" in capsys.readouterr().err


def test_simulate_requires_single_sampling_mode(tmp_path: Path):
    code = run_cli(
        "simulate", "--class", "nil", "--init", "1,1,1", "--samples", "10", "--times", "0.1,0.2",
        "--out", str(tmp_path / "x.csv"),
    )
    assert code == 1


def test_simulate_deterministic_outputs(tmp_path: Path):
    args = ("simulate", "--class", "nil", "--init", "7,5,3", "--alpha", "1", "--tmax", "0.1", "--samples", "40")
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert run_cli(*args, "--out", str(out1)) == 0
    assert run_cli(*args, "--out", str(out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_csv_round_trips_17_digits(tmp_path: Path):
    out = tmp_path / "run.csv"
    run_cli("simulate", "--class", "sol", "--init", "7,5,3", "--alpha", "1", "--tmax", "0.05", "--samples", "5", "--out", str(out))
    lines = out.read_text().splitlines()
    assert lines[-1] == ",".join(format(float(v), ".17g") for v in lines[-1].split(","))


def test_json_format_includes_manifest(tmp_path: Path):
    out = tmp_path / "run.json"
    code = run_cli(
        "simulate", "--class", "isom", "--init", "7,5,3", "--alpha", "0", "--tmax", "0.1",
        "--format", "json", "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["columns"][0] == "t"
    assert payload["manifest"]["config"]["system"] == "isom"
    drift = payload["manifest"]["conserved_drift"]
    assert drift["A*B"] < 1e-8


def test_config_file_with_flag_override(tmp_path: Path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("class=su2\ninit=7,5,3\nalpha=1\ntmax=0.05\nsamples=9\n", encoding="utf-8")
    out = tmp_path / "run.csv"
    code = run_cli("simulate", "--config", str(cfg), "--alpha", "0", "--out", str(out))
    assert code == 0
    manifest = json.loads((tmp_path / "run.manifest.json").read_text())
    assert manifest["config"]["alpha_prime"] == 0.0  # flag wins
    assert manifest["config"]["samples"] == 9  # file fills the rest
    assert len(out.read_text().splitlines()) == 10


def test_config_file_rejects_unknown_keys(tmp_path: Path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("flux_capacitance=1\n", encoding="utf-8")
    code = run_cli("simulate", "--config", str(cfg), "--class", "su2", "--init", "1,1,1", "--out", "-")
    assert code == 1
    assert "flux_capacitance" in capsys.readouterr().err


def test_curvature_subcommand(tmp_path: Path):
    out = tmp_path / "curv.csv"
    code = run_cli("curvature", "--class", "nil", "--init", "7,5,3", "--alpha", "0", "--tmax", "1", "--samples", "20", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,scal,rc_norm_sq"
    scal = np.array([float(r.split(",")[1]) for r in lines[1:]])
    assert np.all(scal < 0)


def test_phase_grid_outputs(tmp_path: Path):
    out = tmp_path / "grid"
    code = run_cli(
        "phase", "--system", "nil-special", "--alpha", "1", "--box", "0.5,2.5,0.5,3",
        "--grid", "3", "--tmax", "8", "--out", str(out),
    )
    assert code == 0
    index = json.loads((out / "index.json").read_text())
    assert len(index["labels"]) == 9
    assert index["critical_curve"] is not None
    xi = [b * b / a for a, b in index["critical_curve"]]
    assert max(abs(v - 3.0) for v in xi) < 1e-3
    seed_files = sorted(p.name for p in out.glob("seed_*.csv"))
    assert seed_files[0] == "seed_0_0.csv"
    assert len(seed_files) == 9


def test_phase_rejects_tiny_grid(tmp_path: Path):
    code = run_cli("phase", "--system", "berger", "--alpha", "0", "--box", "0.5,2,0.5,2", "--grid", "1", "--out", str(tmp_path / "g"))
    assert code == 1


def test_phase_rejects_three_component_system(tmp_path: Path):
    code = run_cli("phase", "--system", "su2", "--alpha", "0", "--box", "0,1,0,1,0,1", "--grid", "3", "--out", str(tmp_path / "g"))
    assert code == 1


def test_fixed_points_subcommand(tmp_path: Path):
    out = tmp_path / "fp.json"
    code = run_cli("fixed-points", "--system", "sl2r-special", "--alpha", "1", "--box", "0,6,0,3", "--grid", "7", "--out", str(out))
    assert code == 0
    points = json.loads(out.read_text())
    assert len(points) == 1
    assert points[0]["state"] == pytest.approx([4.0, 0.0], abs=1e-8)
    assert points[0]["residual_norm"] < 1e-10


def test_scaling_check_subcommand(tmp_path: Path):
    out = tmp_path / "scaling.json"
    code = run_cli("scaling-check", "--class", "su2", "--init", "7,5,3", "--alpha", "1", "--omega", "2", "--t", "0.1", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["max_rel_diff"] < 1e-8
    code = run_cli("scaling-check", "--class", "su2", "--init", "7,5,3", "--alpha", "1", "--omega", "2", "--t", "0.1", "--threshold", "1e-18", "--out", str(out))
    assert code == 3


def test_verify_subcommand_passing_suite(tmp_path: Path):
    out = tmp_path / "report.json"
    code = run_cli("verify", "--suite", "fixed-points", "--out", str(out))
    assert code == 0
    report = json.loads(out.read_text())
    assert all(case["pass"] for case in report)
    assert {case["suite"] for case in report} == {"fixed-points"}


def test_verify_unknown_suite_is_config_error(tmp_path: Path):
    assert run_cli("verify", "--suite", "nonsense", "--out", str(tmp_path / "r.json")) == 1
