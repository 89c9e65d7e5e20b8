import json
import subprocess
import sys

import numpy as np
import pytest

from spectral_cggm.cli import main
from spectral_cggm.panel import TimeSeriesPanel, save_panel


@pytest.fixture
def panel_csv(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((6, 128, 3))
    x[:, :, 2] += x[:, :, 0]
    path = tmp_path / "panel.csv"
    save_panel(TimeSeriesPanel(x, 128.0), path)
    return path


def test_pipeline_and_rerun(panel_csv, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["pipeline", "--input", str(panel_csv), "--output-dir", str(out),
                 "--sampling-rate", "128", "--band-low", "4", "--band-high", "40",
                 "--seed", "3"]) == 0
    for name in ("connectivity.csv", "edges.csv", "heatmap.png", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["band"] == {"low": 4.0, "high": 40.0, "name": ""}
    assert main(["rerun", str(out / "manifest.json"), "--output-dir", str(tmp_path / "b")]) == 0
    for name in ("connectivity.csv", "edges.csv", "heatmap.png"):
        assert (out / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_transform_spectrum_estimate(panel_csv, tmp_path):
    g = tmp_path / "g.csv"
    assert main(["transform", "--input", str(panel_csv), "--output", str(g)]) == 0
    s = tmp_path / "s.csv"
    assert main(["spectrum", "--input", str(g), "--output", str(s), "--no-copula",
                 "--screen", str(tmp_path / "screen.csv")]) == 0
    assert main(["estimate", "--input", str(s), "--lam", "0.05",
                 "--output-dir", str(tmp_path / "e")]) == 0
    result = json.loads((tmp_path / "e" / "result.json").read_text())
    assert result["estimate_kind"] == "precision" and result["converged"]
    assert (tmp_path / "e" / "precision.csv").exists()


def test_estimate_from_samples(tmp_path):
    x = np.random.default_rng(1).standard_normal((80, 3)) + 5.0
    path = tmp_path / "x.csv"
    np.savetxt(path, x, delimiter=",", header="a,b,c", comments="")
    for solver in ("glasso", "spcov", "ledoit_wolf"):
        assert main(["estimate", "--input", str(path), "--samples", "--solver", solver,
                     "--output-dir", str(tmp_path / solver)]) == 0


def test_simulate_two_reps(tmp_path):
    assert main(["simulate", "--model", "cliques", "--reps", "2", "--seed", "7",
                 "--output-dir", str(tmp_path), "--quiet"]) == 0
    doc = json.loads((tmp_path / "bench_report.json").read_text())
    assert doc["config"]["n_reps"] == 2
    assert doc["config"]["n_samples"] == 200
    assert doc["config"]["generators"]["cliques"]["p"] == 18
    assert {r["solver"] for r in doc["results"]} == {"glasso", "spcov", "ledoit_wolf"}
    assert all(r["n_reps"] == 2 for r in doc["results"])
    assert (tmp_path / "bench_report.txt").read_text().startswith("model")


@pytest.mark.parametrize("argv", [
    ["simulate", "--model", "bogus"],
    ["pipeline", "--input", "x"],
    ["estimate", "--input", "x", "--output-dir", "y", "--lam", "-1"],
    ["nonexistent-command"],
    [],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    assert main(["pipeline", "--input", str(tmp_path / "none.csv"),
                 "--output-dir", str(tmp_path)]) == 1
    assert "[load]" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("trial,time,a,b\n0,0,1,nan\n")
    assert main(["transform", "--input", str(bad), "--output", str(tmp_path / "o")]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spectral_cggm", "simulate", "--model", "x"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage" in proc.stderr
