"""Simulation models, loss functions and the replicated benchmark harness.

Two sparse covariance models are provided:

* cliques -- block-diagonal, ``n_blocks`` dense PD blocks of ``block_size``;
* random -- each off-diagonal pair nonzero with probability ``edge_prob``.

:func:`run_benchmark` draws a fresh truth and a fresh sample per
replication, fits every solver, and aggregates RMSE, entropy loss and
execution time as mean and standard error.
"""

import json
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CggmError, DimensionMismatch, MaxIterationsExceeded
from .numerics import cholesky, log_det, sym
from .solvers import (SOLVER_IDS, SOLVERS, SolverConfig, cross_validate_lambda,
                      default_grid, kfold_covariances, ledoit_wolf,
                      sample_covariance)

MODELS = ("cliques", "random")
# samples come from N(0, Sigma): every solver sees the known-mean second
# moment matrix X.T X / n
ZERO_MEAN = True
OFFDIAG_RANGE = (0.3, 0.8)
# SPCOV needs a few hundred MM steps at the small penalties CV favours
BENCH_MAX_OUTER_ITERS = 1000


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "cliques"
    p: int = 18
    block_size: int = 6
    n_blocks: int = 3
    edge_prob: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODELS:
            raise ValueError(f"unknown model {self.kind!r}; expected one of {MODELS}")
        if self.kind == "cliques" and self.p != self.block_size * self.n_blocks:
            raise DimensionMismatch(
                f"cliques model needs p == block_size * n_blocks, got "
                f"{self.p} != {self.block_size} * {self.n_blocks}")
        if not 0.0 < self.edge_prob < 1.0:
            raise ValueError("edge_prob must lie in (0, 1)")

    def with_seed(self, seed):
        return GeneratorSpec(**{**asdict(self), "seed": int(seed)})


def gen_cliques(spec):
    """Block-diagonal covariance; each block is ``A.T A / b + 0.1 I``."""
    if spec.kind != "cliques":
        raise ValueError("gen_cliques needs a cliques spec")
    rng = np.random.default_rng(spec.seed)
    b = spec.block_size
    sigma = np.zeros((spec.p, spec.p))
    for k in range(spec.n_blocks):
        a = rng.standard_normal((b, b))
        sl = slice(k * b, (k + 1) * b)
        sigma[sl, sl] = a.T @ a / b + 0.1 * np.eye(b)
    return sym(sigma)


def gen_random(spec):
    """Sparse random covariance with a common diagonal boosted for PD-ness.

    Upper-triangle entries are nonzero with probability ``edge_prob`` and
    magnitude uniform on ``[0.3, 0.8]`` with a random sign.  The diagonal is
    set to ``1 + |lambda_min| + 0.1`` where ``lambda_min`` is the most
    negative eigenvalue of the off-diagonal part (0 if none is negative).
    """
    if spec.kind != "random":
        raise ValueError("gen_random needs a random spec")
    rng = np.random.default_rng(spec.seed)
    p = spec.p
    iu = np.triu_indices(p, k=1)
    mask = rng.random(iu[0].size) < spec.edge_prob
    mag = rng.uniform(*OFFDIAG_RANGE, size=iu[0].size)
    sign = np.where(rng.random(iu[0].size) < 0.5, -1.0, 1.0)
    off = np.zeros((p, p))
    off[iu] = np.where(mask, sign * mag, 0.0)
    off = off + off.T
    lam_min = min(float(np.linalg.eigvalsh(off)[0]), 0.0)
    sigma = off + (1.0 + abs(lam_min) + 0.1) * np.eye(p)
    cholesky(sigma)
    return sym(sigma)


def generate(spec):
    return gen_cliques(spec) if spec.kind == "cliques" else gen_random(spec)


def sample_mvn(sigma, n, seed):
    """``n`` i.i.d. rows from ``N(0, sigma)``, deterministic in ``seed``."""
    if int(n) < 1:
        raise ValueError("n must be >= 1")
    L = cholesky(sym(sigma))
    z = np.random.default_rng(seed).standard_normal((int(n), L.shape[0]))
    return z @ L.T


def _check_pair(est, truth):
    est, truth = np.asarray(est, dtype=float), np.asarray(truth, dtype=float)
    if est.shape != truth.shape or est.ndim != 2:
        raise DimensionMismatch(f"shapes {est.shape} and {truth.shape} differ")
    return est, truth


def rmse(est, truth):
    """``||est - truth||_F / p``."""
    est, truth = _check_pair(est, truth)
    return float(np.linalg.norm(est - truth, "fro") / truth.shape[0])


def entropy_loss(est, truth):
    """Stein-type loss ``-log det(est truth^-1) + tr(est truth^-1) - p``."""
    est, truth = _check_pair(est, truth)
    L = cholesky(truth)
    # tr(est truth^-1) = tr(L^-1 est L^-T)
    m = np.linalg.solve(L, np.linalg.solve(L, est).T)
    return float(-(log_det(est) - log_det(truth)) + np.trace(m) - truth.shape[0])


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"mean": None, "se": None}
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return {"mean": float(v.mean()), "se": se}


@dataclass
class BenchReport:
    """Aggregated benchmark results.

    ``rows`` holds one dict per (model, solver) with keys ``model``,
    ``solver``, ``n_reps``, ``n_ok``, ``n_failed``, and ``{"mean", "se"}``
    entries for ``rmse``, ``entropy_loss``, ``exec_time_seconds``,
    ``tuning_time_seconds`` and ``lambda``.
    """

    config: dict
    rows: list = field(default_factory=list)

    def row(self, model, solver):
        for r in self.rows:
            if r["model"] == model and r["solver"] == solver:
                return r
        raise KeyError((model, solver))

    def merge(self, other):
        cfg = dict(self.config)
        cfg["models"] = list(dict.fromkeys(
            self.config.get("models", []) + other.config.get("models", [])))
        cfg.setdefault("generators", {}).update(other.config.get("generators", {}))
        return BenchReport(cfg, self.rows + other.rows)

    def to_dict(self):
        return {"config": self.config, "results": self.rows}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self):
        def fmt(entry):
            if entry["mean"] is None:
                return "n/a"
            return f"{entry['mean']:.4g} +/- {entry['se']:.3g}"

        header = ["model", "solver", "ok/reps", "rmse", "entropy loss", "time (s)"]
        body = [[r["model"], r["solver"], f"{r['n_ok']}/{r['n_reps']}", fmt(r["rmse"]),
                 fmt(r["entropy_loss"]), fmt(r["exec_time_seconds"])] for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(header, *body)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in body]
        return "\n".join(lines) + "\n"


def replication_seeds(master_seed, rep):
    """(truth seed, sample seed, fold seed) for one replication."""
    ss = np.random.SeedSequence([int(master_seed), int(rep)])
    return tuple(int(v) for v in ss.generate_state(3, dtype=np.uint64))


def _fit(solver, x, lambda_policy, cfg, n_folds, grid, fold_seed):
    """Fit one solver on samples ``x``; returns (covariance, lam, times)."""
    if solver == "ledoit_wolf":
        t0 = time.perf_counter()
        res = ledoit_wolf(x, assume_centered=ZERO_MEAN)
        return res, 0.0, time.perf_counter() - t0, 0.0
    t0 = time.perf_counter()
    if lambda_policy == "cv":
        folds = kfold_covariances(x, n_folds, np.random.default_rng(fold_seed), ZERO_MEAN)
        lam = cross_validate_lambda(folds, grid, solver, cfg).lam
    else:
        lam = float(lambda_policy)
    tuning = time.perf_counter() - t0
    t0 = time.perf_counter()
    res = SOLVERS[solver](sample_covariance(x, ZERO_MEAN), cfg.replace(lam=lam))
    return res, lam, time.perf_counter() - t0, tuning


def run_replication(spec, solvers, n_samples, rep, master_seed, lambda_policy="cv",
                    cfg=None, n_folds=5, grid=None):
    """One replication: fresh truth, fresh sample, every solver.

    Returns a dict ``solver -> record``; a record holds the metrics or an
    ``error`` string.  Depends only on its arguments, so replications can be
    run in any order or in parallel.
    """
    cfg = cfg or SolverConfig()
    grid = default_grid() if grid is None else grid
    truth_seed, sample_seed, fold_seed = replication_seeds(master_seed, rep)
    truth = generate(spec.with_seed(truth_seed))
    x = sample_mvn(truth, n_samples, sample_seed)
    out = {}
    for solver in solvers:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", MaxIterationsExceeded)
                res, lam, elapsed, tuning = _fit(
                    solver, x, lambda_policy, cfg, n_folds, grid, fold_seed)
            if not res.converged:
                out[solver] = {"error": "did not converge"}
                continue
            est = res.covariance()
            out[solver] = {
                "rmse": rmse(est, truth),
                "entropy_loss": entropy_loss(est, truth),
                "exec_time_seconds": elapsed,
                "tuning_time_seconds": tuning,
                "lambda": lam,
            }
        except CggmError as exc:
            out[solver] = {"error": f"{type(exc).__name__}: {exc}"}
    return out


def aggregate(model, solvers, records):
    """Fold per-replication records (``rep -> {solver: record}``) into rows.

    Records are sorted by replication index first, so the result does not
    depend on completion order.
    """
    rows = []
    ordered = [records[k] for k in sorted(records)]
    for solver in solvers:
        recs = [r[solver] for r in ordered]
        ok = [r for r in recs if "error" not in r]
        row = {"model": model, "solver": solver, "n_reps": len(recs),
               "n_ok": len(ok), "n_failed": len(recs) - len(ok)}
        for key in ("rmse", "entropy_loss", "exec_time_seconds",
                    "tuning_time_seconds", "lambda"):
            row[key] = _mean_se([r[key] for r in ok])
        rows.append(row)
    return rows


def run_benchmark(spec, solvers=SOLVER_IDS, n_samples=200, n_reps=100,
                  lambda_policy="cv", seed=0, cfg=None, n_folds=5, grid=None,
                  progress=None):
    """Replicated benchmark of ``solvers`` on the model described by ``spec``.

    Parameters
    ----------
    spec : GeneratorSpec
        Model and dimension; its ``seed`` is ignored (each replication derives
        its own from ``seed`` and the replication index).
    solvers : sequence of {"glasso", "spcov", "ledoit_wolf"}
    n_samples : int
        Rows drawn per replication.
    n_reps : int
        Number of replications, >= 1.
    lambda_policy : "cv" or float
        ``"cv"`` runs K-fold :func:`~spectral_cggm.solvers.cross_validate_lambda`
        on every replication over ``grid`` (default: 10 log-spaced values in
        [0.01, 1]).
    progress : callable, optional
        Called with the replication index after each replication.

    Returns
    -------
    BenchReport
        Precision estimates are inverted before scoring; replications where a
        solver fails or does not converge are counted in ``n_failed`` and left
        out of the aggregates.
    """
    if int(n_reps) < 1:
        raise ValueError("n_reps must be >= 1")
    unknown = set(solvers) - set(SOLVER_IDS)
    if unknown:
        raise ValueError(f"unknown solvers {sorted(unknown)}")
    cfg = cfg or SolverConfig()
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    records = {}
    for rep in range(int(n_reps)):
        records[rep] = run_replication(spec, solvers, n_samples, rep, seed,
                                       lambda_policy, cfg, n_folds, grid)
        if progress is not None:
            progress(rep)
    gen = {k: v for k, v in asdict(spec).items() if k != "seed"}
    if spec.kind == "random":
        gen.pop("block_size")
        gen.pop("n_blocks")
        gen["offdiag_magnitude"] = list(OFFDIAG_RANGE)
    else:
        gen.pop("edge_prob")
    config = {
        "models": [spec.kind],
        "generators": {spec.kind: gen},
        "solvers": list(solvers),
        "n_samples": int(n_samples),
        "n_reps": int(n_reps),
        "seed": int(seed),
        "lambda_policy": lambda_policy if lambda_policy == "cv" else float(lambda_policy),
        "lambda_grid": [float(g) for g in grid],
        "n_folds": int(n_folds),
        "solver_config": asdict(cfg),
        "time_excludes_tuning": True,
        "known_zero_mean": ZERO_MEAN,
    }
    return BenchReport(config, aggregate(spec.kind, solvers, records))
