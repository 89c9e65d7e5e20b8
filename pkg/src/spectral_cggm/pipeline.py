"""End-to-end connectivity estimation from a recorded panel.

copula transform -> multitaper spectrum -> band collapse -> solver ->
normalized connectivity scores, written as

* ``connectivity.csv`` -- p x p score matrix, header = channel labels;
* ``edges.csv`` -- ``src,dst,score`` for ``|score| > edge_threshold``;
* ``heatmap.png`` -- |score| heatmap;
* ``manifest.json`` -- configuration echo and solver diagnostics.
"""

import contextlib
import csv
import hashlib
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .copula import to_gaussian_panel
from .errors import CggmError, DimensionMismatch, MaxIterationsExceeded, ParseError, StageError
from .heatmap import render_heatmap
from .numerics import sym
from .panel import load_panel
from .solvers import (COVARIANCE, SOLVER_IDS, SOLVERS, SolverConfig,
                      cross_validate_lambda, default_grid, ledoit_wolf_from_moments)
from .spectral import (DEFAULT_TAPERS, FrequencyBand, band_collapse, band_moments,
                       band_units, estimate_spectrum)

OUTPUT_FILES = {
    "matrix": "connectivity.csv",
    "edges": "edges.csv",
    "heatmap": "heatmap.png",
    "manifest": "manifest.json",
}


@dataclass
class RunConfig:
    """Everything needed to re-run :func:`run_pipeline`.

    ``lam`` is a number or ``"cv"``; with ``"cv"`` the penalty is chosen by
    K-fold held-out likelihood over ``lambda_grid`` multiplied by the mean
    diagonal of the collapsed spectrum.  ``band=None`` means the full band.
    """

    input: str
    output_dir: str
    format: str = "csv-long"
    sampling_rate: float = None
    band: FrequencyBand = None
    solver: str = "glasso"
    lam: object = "cv"
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    taper_count: int = DEFAULT_TAPERS
    edge_threshold: float = 0.1
    seed: int = 0
    n_folds: int = 5
    lambda_grid: tuple = tuple(default_grid())
    copula: bool = True

    def __post_init__(self):
        if self.solver not in SOLVER_IDS:
            raise ValueError(f"unknown solver {self.solver!r}; expected one of {SOLVER_IDS}")
        if not self.edge_threshold >= 0:
            raise ValueError("edge_threshold must be >= 0")
        if self.lam != "cv" and not float(self.lam) >= 0:
            raise ValueError("lam must be 'cv' or a nonnegative number")

    def to_dict(self):
        d = asdict(self)
        d["band"] = None if self.band is None else asdict(self.band)
        d["lambda_grid"] = [float(v) for v in self.lambda_grid]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("band") is not None:
            d["band"] = FrequencyBand(**d["band"])
        d["solver_config"] = SolverConfig(**d.get("solver_config", {}))
        d["lambda_grid"] = tuple(d.get("lambda_grid", default_grid()))
        return cls(**d)


@contextlib.contextmanager
def stage(name):
    try:
        yield
    except StageError:
        raise
    except (CggmError, ValueError, OSError) as exc:
        raise StageError(name, exc) from exc


def connectivity_scores(estimate, kind):
    """Scale-free association matrix with unit diagonal.

    Precision estimates give partial correlations ``-theta_ij / sqrt(theta_ii
    theta_jj)``; covariance estimates give correlations.
    """
    m = np.asarray(estimate, dtype=float)
    d = np.sqrt(np.diag(m))
    r = m / np.outer(d, d)
    if kind != COVARIANCE:
        r = -r
    np.fill_diagonal(r, 1.0)
    return sym(r)


def edge_list(scores, labels, threshold):
    """Upper-triangle entries with ``|score| > threshold`` as (src, dst, score)."""
    p = scores.shape[0]
    return [(labels[i], labels[j], scores[i, j])
            for i in range(p) for j in range(i + 1, p)
            if abs(scores[i, j]) > threshold]


def write_matrix_csv(m, labels, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(labels)
        for row in np.asarray(m, dtype=float):
            w.writerow([repr(float(v) + 0.0) for v in row])


def read_matrix_csv(path):
    """Inverse of :func:`write_matrix_csv`: returns (matrix, labels)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty matrix file", line=1)
    labels = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    try:
        m = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if m.shape != (len(labels), len(labels)):
        raise DimensionMismatch(f"matrix of shape {m.shape} for {len(labels)} labels")
    return m, labels


def write_edges_csv(edges, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "score"])
        for src, dst, score in edges:
            w.writerow([src, dst, repr(float(score))])


def read_edges_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return [(r[0], r[1], float(r[2])) for r in rows[1:] if r]


def _cv_folds(units, n_folds, rng):
    n = units.shape[0]
    k = min(n_folds, n)
    order = rng.permutation(n)
    folds = []
    for test in np.array_split(order, k):
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        folds.append((sym(units[mask].mean(axis=0)), sym(units[~mask].mean(axis=0))))
    return folds


def _solve(panel, s, band, cfg, record):
    if cfg.solver == "ledoit_wolf":
        u, fourth, n = band_moments(panel, band, cfg.taper_count)
        record["n_fourier_rows"] = int(n)
        return ledoit_wolf_from_moments(u, fourth, n)

    lam = cfg.lam
    if lam == "cv":
        by = "trial" if panel.trial_count >= 2 else "frequency"
        units = band_units(panel, band, cfg.taper_count, by=by)
        if units.shape[0] < 2:
            raise ValueError("cross-validation needs >= 2 trials or in-band frequencies")
        folds = _cv_folds(units, cfg.n_folds, np.random.default_rng(cfg.seed))
        scale = float(np.mean(np.diag(s)))
        grid = np.asarray(cfg.lambda_grid, dtype=float) * scale
        cv = cross_validate_lambda(folds, grid, cfg.solver, cfg.solver_config)
        lam = cv.lam
        record["cv"] = {
            "fold_unit": by,
            "n_folds": len(folds),
            "grid": [float(g) for g in cv.grid],
            "mean_scores": [float(v) for v in cv.mean_scores],
        }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaxIterationsExceeded)
        return SOLVERS[cfg.solver](s, cfg.solver_config.replace(lam=float(lam)))


def run_pipeline(cfg):
    """Run the full estimation for ``cfg`` and write the output files.

    Returns
    -------
    dict
        ``scores`` (the connectivity matrix), ``result`` (the
        :class:`~spectral_cggm.solvers.SolverResult`), ``edges`` and
        ``paths`` (output file locations).

    Raises
    ------
    StageError
        Wrapping the underlying error, labelled with the failing stage.
    """
    t_start = time.perf_counter()
    out = Path(cfg.output_dir)
    record = {}
    with stage("load"):
        panel = load_panel(cfg.input, cfg.format, cfg.sampling_rate)
        digest = hashlib.sha256(Path(cfg.input).read_bytes()).hexdigest()
    band = cfg.band or FrequencyBand.full(panel.sampling_rate)
    with stage("transform"):
        band.check(panel.nyquist)
        if cfg.copula:
            panel = panel.with_data(to_gaussian_panel(panel.data))
    with stage("spectrum"):
        sd = estimate_spectrum(panel, cfg.taper_count)
        s = band_collapse(sd, band)
    with stage("solve"):
        result = _solve(panel, s, band, cfg, record)
    with stage("write"):
        scores = connectivity_scores(result.estimate, result.estimate_kind)
        edges = edge_list(scores, panel.channel_labels, cfg.edge_threshold)
        out.mkdir(parents=True, exist_ok=True)
        paths = {k: out / v for k, v in OUTPUT_FILES.items()}
        write_matrix_csv(scores, panel.channel_labels, paths["matrix"])
        write_edges_csv(edges, paths["edges"])
        render_heatmap(scores, paths["heatmap"])
        manifest = {
            "software": {"name": "spectral_cggm", "version": __version__},
            "config": cfg.to_dict(),
            "input": {
                "sha256": digest,
                "trials": panel.trial_count,
                "time_points": panel.time_points,
                "channels": panel.channel_count,
                "channel_labels": list(panel.channel_labels),
                "sampling_rate": panel.sampling_rate,
            },
            "band": asdict(band),
            "solver": {
                "name": cfg.solver,
                "estimate_kind": result.estimate_kind,
                "lambda": result.lam,
                "objective": result.objective,
                "iterations": result.iterations,
                "converged": result.converged,
                **record,
            },
            "n_edges": len(edges),
            "outputs": dict(OUTPUT_FILES),
            "timing": {
                "solver_wall_time": result.wall_time,
                "total_wall_time": time.perf_counter() - t_start,
            },
        }
        paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return {"scores": scores, "result": result, "edges": edges, "paths": paths,
            "manifest": manifest}
