"""Multichannel recordings (trials x time x channels) and their file formats.

Two on-disk formats are supported:

``csv-long``
    One header line ``trial,time,<label_1>,...,<label_p>`` followed by one
    row per (trial, time point).  Rows of a trial must be contiguous; trials
    appear in file order.

``f64-binary``
    Raw little-endian float64 samples in C order (trial, time, channel),
    with a JSON sidecar ``<path>.json`` holding ``trials``, ``time_points``,
    ``channels``, ``sampling_rate`` and optionally ``channel_labels``.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (DimensionMismatch, InconsistentTrialLength,
                     NonFiniteSample, ParseError)

FORMATS = ("csv-long", "f64-binary")


@dataclass(frozen=True)
class TimeSeriesPanel:
    data: np.ndarray
    sampling_rate: float = 1.0
    channel_labels: tuple = field(default=())

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 3 or min(data.shape) < 1:
            raise DimensionMismatch(
                f"panel must be trials x time x channels, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            t, i, c = np.argwhere(~np.isfinite(data))[0]
            raise NonFiniteSample(
                f"non-finite sample at trial {t}, time {i}, channel {c}")
        if not (self.sampling_rate > 0 and math.isfinite(self.sampling_rate)):
            raise ValueError("sampling_rate must be positive")
        labels = tuple(str(s) for s in self.channel_labels) or tuple(
            f"ch{k + 1}" for k in range(data.shape[2]))
        if len(labels) != data.shape[2]:
            raise DimensionMismatch(
                f"{len(labels)} labels for {data.shape[2]} channels")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sampling_rate", float(self.sampling_rate))
        object.__setattr__(self, "channel_labels", labels)

    @property
    def trial_count(self):
        return self.data.shape[0]

    @property
    def time_points(self):
        return self.data.shape[1]

    @property
    def channel_count(self):
        return self.data.shape[2]

    @property
    def nyquist(self):
        return self.sampling_rate / 2.0

    def with_data(self, data):
        return TimeSeriesPanel(data, self.sampling_rate, self.channel_labels)


def load_panel(path, format="csv-long", sampling_rate=None):
    """Read a panel from ``path``.

    ``sampling_rate`` is required information for ``csv-long`` files (which
    do not store it); it defaults to 1.0.  For ``f64-binary`` the sidecar
    value is used unless overridden.
    """
    path = Path(path)
    if format == "csv-long":
        return _load_csv_long(path, 1.0 if sampling_rate is None else sampling_rate)
    if format == "f64-binary":
        return _load_f64(path, sampling_rate)
    raise ValueError(f"unknown panel format {format!r}; expected one of {FORMATS}")


def _load_csv_long(path, sampling_rate):
    trials = []
    current_key = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if len(header) < 3 or header[0] != "trial" or header[1] != "time":
            raise ParseError("header must be 'trial,time,<channel>,...'", line=1)
        labels = header[2:]
        p = len(labels)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != p + 2:
                raise ParseError(f"expected {p + 2} fields, found {len(row)}", line=line)
            try:
                values = np.array([float(c) for c in row[2:]])
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from None
            if not np.all(np.isfinite(values)):
                raise NonFiniteSample(f"non-finite sample in row {line}", line=line)
            key = row[0].strip()
            if key != current_key:
                if any(k == key for k, _ in trials):
                    raise ParseError(f"rows of trial {key!r} are not contiguous", line=line)
                trials.append((key, []))
                current_key = key
            trials[-1][1].append(values)
    if not trials:
        raise ParseError("no data rows", line=2)
    lengths = {len(rows) for _, rows in trials}
    if len(lengths) != 1:
        raise InconsistentTrialLength(
            "trials have unequal lengths: " + ", ".join(
                f"{k}={len(rows)}" for k, rows in trials))
    data = np.array([np.vstack(rows) for _, rows in trials])
    return TimeSeriesPanel(data, sampling_rate, labels)


def _sidecar(path):
    return Path(str(path) + ".json")


def _load_f64(path, sampling_rate):
    try:
        meta = json.loads(_sidecar(path).read_text())
        shape = (int(meta["trials"]), int(meta["time_points"]), int(meta["channels"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"bad sidecar {_sidecar(path)}: {exc}") from None
    raw = np.fromfile(path, dtype="<f8")
    if raw.size != np.prod(shape):
        raise ParseError(
            f"{raw.size} samples in file, sidecar declares {shape} = {np.prod(shape)}")
    data = raw.reshape(shape)
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        t, i, c = bad[0]
        raise NonFiniteSample(
            f"non-finite sample at trial {t}, time {i}, channel {c} "
            f"(byte offset {8 * (int(t) * shape[1] * shape[2] + int(i) * shape[2] + int(c))})")
    rate = sampling_rate if sampling_rate is not None else meta.get("sampling_rate", 1.0)
    return TimeSeriesPanel(data, rate, meta.get("channel_labels", ()))


def save_panel(panel, path, format="csv-long"):
    """Write ``panel`` in one of :data:`FORMATS`; values round-trip exactly."""
    path = Path(path)
    if format == "csv-long":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trial", "time", *panel.channel_labels])
            for t in range(panel.trial_count):
                for i in range(panel.time_points):
                    w.writerow([t, i, *(repr(float(v)) for v in panel.data[t, i])])
    elif format == "f64-binary":
        panel.data.astype("<f8").tofile(path)
        meta = {
            "trials": panel.trial_count,
            "time_points": panel.time_points,
            "channels": panel.channel_count,
            "sampling_rate": panel.sampling_rate,
            "channel_labels": list(panel.channel_labels),
        }
        _sidecar(path).write_text(json.dumps(meta, indent=2) + "\n")
    else:
        raise ValueError(f"unknown panel format {format!r}; expected one of {FORMATS}")
