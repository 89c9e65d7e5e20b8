import json

import numpy as np
import pytest

from spectral_cggm.errors import (DimensionMismatch, InconsistentTrialLength,
                                  NonFiniteSample, ParseError)
from spectral_cggm.panel import TimeSeriesPanel, load_panel, save_panel


def write(tmp_path, text, name="panel.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


FIXTURE = """trial,time,Fz,Cz
0,0,1.0,2.0
0,1,1.5,2.5
0,2,0.5,-1.0
0,3,0.0,0.25
1,0,3.0,4.0
1,1,-3.0,1e-3
1,2,2.0,2.0
1,3,7.0,8.0
"""


def test_csv_fixture(tmp_path):
    panel = load_panel(write(tmp_path, FIXTURE), sampling_rate=256.0)
    assert panel.data.shape == (2, 4, 2)
    assert panel.channel_labels == ("Fz", "Cz")
    assert panel.data[1, 1, 1] == 1e-3
    assert panel.sampling_rate == 256.0 and panel.nyquist == 128.0


def test_nan_names_row(tmp_path):
    text = FIXTURE.replace("0,2,0.5,-1.0", "0,2,NaN,-1.0")
    with pytest.raises(NonFiniteSample, match="line 4"):
        load_panel(write(tmp_path, text))


def test_unequal_trials(tmp_path):
    text = FIXTURE.rsplit("\n", 2)[0] + "\n"
    with pytest.raises(InconsistentTrialLength):
        load_panel(write(tmp_path, text))


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("time,trial,a\n0,0,1\n", 1),
    ("trial,time,a\n0,0,1,2\n", 2),
    ("trial,time,a\n0,0,x\n", 2),
    ("trial,time,a\n0,0,1\n1,0,1\n0,1,1\n", 4),
])
def test_parse_errors_report_line(tmp_path, text, line):
    with pytest.raises(ParseError, match=f"line {line}"):
        load_panel(write(tmp_path, text))


@pytest.mark.parametrize("fmt", ["csv-long", "f64-binary"])
def test_round_trip(tmp_path, fmt):
    rng = np.random.default_rng(0)
    panel = TimeSeriesPanel(rng.standard_normal((3, 70, 4)), 128.0, ["a", "b", "c", "d"])
    path = tmp_path / "p.dat"
    save_panel(panel, path, fmt)
    back = load_panel(path, fmt, sampling_rate=128.0 if fmt == "csv-long" else None)
    assert np.array_equal(back.data, panel.data)
    assert back.channel_labels == panel.channel_labels
    assert back.sampling_rate == 128.0


def test_binary_sidecar_errors(tmp_path):
    path = tmp_path / "p.f64"
    np.arange(6, dtype="<f8").tofile(path)
    (tmp_path / "p.f64.json").write_text(json.dumps({"trials": 1, "time_points": 2,
                                                     "channels": 2}))
    with pytest.raises(ParseError):
        load_panel(path, "f64-binary")
    (tmp_path / "p.f64.json").write_text("{}")
    with pytest.raises(ParseError):
        load_panel(path, "f64-binary")
    np.array([1.0, np.inf], dtype="<f8").tofile(path)
    (tmp_path / "p.f64.json").write_text(json.dumps({"trials": 1, "time_points": 1,
                                                     "channels": 2}))
    with pytest.raises(NonFiniteSample, match="byte offset 8"):
        load_panel(path, "f64-binary")


def test_panel_invariants():
    with pytest.raises(DimensionMismatch):
        TimeSeriesPanel(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        TimeSeriesPanel(np.zeros((1, 2, 2)), 1.0, ["only-one"])
    with pytest.raises(NonFiniteSample):
        TimeSeriesPanel(np.full((1, 2, 2), np.nan))
    with pytest.raises(ValueError):
        TimeSeriesPanel(np.zeros((1, 2, 2)), 0.0)
    p = TimeSeriesPanel(np.zeros((1, 2, 3)))
    assert p.channel_labels == ("ch1", "ch2", "ch3")
    assert not p.data.flags.writeable


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        load_panel(tmp_path / "x", "parquet")
