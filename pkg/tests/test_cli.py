import json
import subprocess

import numpy as np
import pytest

from entrain import run_from_manifest
from entrain.cli import main


def read(path):
    return path.read_bytes()


def test_simulate_writes_csv_report_manifest(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "example1", "--t-end", "20",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "converged:" in out

    csv_path = tmp_path / "trajectory.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,x,p,xi,psi,zeta"
    t = np.array([float(l.split(",")[0]) for l in lines[1:]])
    assert np.all(np.diff(t) > 0)
    assert t[0] == 0.0 and t[-1] == 20.0
    assert len(lines[1].split(",")) == 6

    report = json.loads((tmp_path / "report.json").read_text())
    assert report["scenario_id"] == "example1"
    assert report["converged"] in (True, False)
    assert report["tail_stats"]["variable"] == "p"
    assert "max_component_variation" in report["steady_state"]

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["csv"] == "trajectory.csv"
    for key in ("scenario", "K", "input", "x0", "t_start", "t_end",
                "grid_step", "rel_tol", "abs_tol", "method", "version"):
        assert key in manifest


def test_repeat_runs_and_manifest_replay_are_byte_identical(tmp_path):
    args = ["simulate", "--scenario", "example2", "--input", "sin:1:1",
            "--t-end", "10", "--grid-step", "0.05"]
    d1, d2, d3 = (tmp_path / n for n in ("a", "b", "c"))
    assert main(args + ["--out-dir", str(d1)]) == 0
    assert main(args + ["--out-dir", str(d2)]) == 0
    assert read(d1 / "trajectory.csv") == read(d2 / "trajectory.csv")

    run_from_manifest(d1 / "manifest.json", out_dir=d3)
    assert read(d1 / "trajectory.csv") == read(d3 / "trajectory.csv")
    assert read(d1 / "report.json") == read(d3 / "report.json")


def test_replay_rejects_foreign_manifest(tmp_path):
    bad = tmp_path / "manifest.json"
    bad.write_text(json.dumps({"command": "montecarlo"}))
    with pytest.raises(ValueError):
        run_from_manifest(bad)


def test_out_dir_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("ENTRAIN_OUT_DIR", str(tmp_path / "from_env"))
    rc = main(["simulate", "--scenario", "example1", "--t-end", "12"])
    assert rc == 0
    assert (tmp_path / "from_env" / "trajectory.csv").exists()


def test_unknown_scenario_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--scenario", "example9", "--out-dir", str(tmp_path)])
    assert exc.value.code == 2


def test_bad_arguments_exit_2(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["montecarlo", "--scenario", "example2", "--n", "0",
                 "--out-dir", out]) == 2
    assert main(["simulate", "--scenario", "example1", "--x0", "1,2",
                 "--t-end", "20", "--out-dir", out]) == 2
    assert main(["simulate", "--scenario", "example1", "--input", "tri:1:1",
                 "--t-end", "20", "--out-dir", out]) == 2
    assert main(["simulate", "--scenario", "example1", "--t-end", "-5",
                 "--out-dir", out]) == 2
    assert main(["lyapunov", "--input", "const:0", "--out-dir", out]) == 2
    err = capsys.readouterr().err
    assert err.count("error:") == 5


def test_divergence_exits_3_and_names_last_good_time(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "general",
               "--x0", "0,1,1e200,1e200,0", "--t-end", "5",
               "--out-dir", str(tmp_path)])
    assert rc == 3
    err = capsys.readouterr().err
    assert "last good time" in err


def test_freqresp_reports_zero_at_origin(capsys):
    assert main(["freqresp", "--scenario", "example2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("zero at origin: yes")
    assert out[1] == "omega,magnitude,phase"
    row = next(l for l in out if l.startswith("1,"))
    _, mag, phase = row.split(",")
    assert float(mag) == pytest.approx(1 / np.sqrt(2), abs=1e-6)
    assert float(phase) == pytest.approx(np.pi / 4, abs=1e-6)
    # magnitude rolls off toward DC
    first = float(out[2].split(",")[1])
    assert first < 0.02


def test_lyapunov_scenario_under_constant_input(capsys):
    # constant forcing starves the gate, so the exponent sits at ~0 (the
    # frozen z-block neither grows nor shrinks perturbations); well below
    # the chaos threshold either way
    rc = main(["lyapunov", "--scenario", "example1", "--input", "const:0",
               "--rel-tol", "1e-6", "--abs-tol", "1e-8"])
    assert rc == 0
    est = json.loads(capsys.readouterr().out)
    assert est["lambda_max"] < 0.05
    assert est["renorm_count"] >= 50
    assert est["renorm_interval"] == 0.5


def test_montecarlo_writes_jsonl(tmp_path, capsys):
    rc = main(["montecarlo", "--scenario", "example2", "--n", "1",
               "--seed", "7", "--rel-tol", "1e-6", "--abs-tol", "1e-8",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "summary (n=1, seed=7)" in out
    lines = (tmp_path / "verdicts.jsonl").read_text().splitlines()
    assert len(lines) == 1
    row = json.loads(lines[0])
    assert sorted(row) == ["lambda_const", "lambda_sin", "p_tail_mean_const",
                           "p_tail_mean_sin", "sample", "u0", "verdict_const",
                           "verdict_sin", "x0"]
    assert row["sample"] == 0
    assert len(row["x0"]) == 5


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(["entrain", "freqresp"], capture_output=True,
                          text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout.startswith("zero at origin: yes")
    proc = subprocess.run(["entrain", "--version"], capture_output=True,
                          text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout.strip()
