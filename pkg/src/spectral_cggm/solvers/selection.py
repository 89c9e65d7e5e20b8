"""Penalty selection by K-fold held-out likelihood."""

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyGrid, MaxIterationsExceeded, TooFewSamples
from ._base import SolverConfig, heldout_loglik, sample_covariance


@dataclass
class CVResult:
    lam: float
    grid: np.ndarray
    scores: np.ndarray  # (n_folds, n_grid)

    @property
    def mean_scores(self):
        return self.scores.mean(axis=0)


def default_grid(n=10, low=0.01, high=1.0):
    return np.logspace(np.log10(low), np.log10(high), n)


def kfold_covariances(x, n_folds=5, rng=None, assume_centered=False):
    """Split the rows of ``x`` into folds; return (train, test) covariances.

    Rows are assigned to folds in order, or after a permutation drawn from
    ``rng`` when one is given.  ``assume_centered`` is passed on to
    :func:`sample_covariance` for every fold.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n_folds < 2 or n < 2 * n_folds:
        raise TooFewSamples(f"cannot split {n} rows into {n_folds} folds")
    order = np.arange(n) if rng is None else rng.permutation(n)
    folds = []
    for test_idx in np.array_split(order, n_folds):
        mask = np.ones(n, dtype=bool)
        mask[test_idx] = False
        folds.append((sample_covariance(x[mask], assume_centered),
                      sample_covariance(x[~mask], assume_centered)))
    return folds


def cross_validate_lambda(folds, lambda_grid, solver_id, cfg=None):
    """Choose the penalty with the best mean held-out log-likelihood.

    Parameters
    ----------
    folds : sequence of (s_train, s_test)
        At least two folds.
    lambda_grid : sequence of float
    solver_id : {"glasso", "spcov"}
    cfg : SolverConfig, optional
        Template; its ``lam`` is overridden by the grid values.

    Returns
    -------
    CVResult
        Ties in the mean score go to the larger penalty.
    """
    from . import SOLVERS

    grid = np.asarray(sorted(set(float(v) for v in lambda_grid)), dtype=float)
    if grid.size == 0:
        raise EmptyGrid("lambda grid is empty")
    if len(folds) < 2:
        raise ValueError("cross-validation needs at least two folds")
    if solver_id not in ("glasso", "spcov"):
        raise ValueError(f"solver {solver_id!r} has no penalty to tune")
    solve = SOLVERS[solver_id]
    cfg = cfg or SolverConfig()

    scores = np.empty((len(folds), grid.size))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaxIterationsExceeded)
        for f, (s_train, s_test) in enumerate(folds):
            warm = None
            # largest penalty first; each solve warm-starts the next
            for g in range(grid.size - 1, -1, -1):
                res = solve(s_train, cfg.replace(lam=grid[g]), init=warm)
                warm = res.info["coefs"] if solver_id == "glasso" else res.estimate
                scores[f, g] = heldout_loglik(res.precision(), s_test)

    mean = scores.mean(axis=0)
    best = mean.max()
    ties = np.flatnonzero(mean >= best - 1e-12 * max(1.0, abs(best)))
    return CVResult(lam=float(grid[ties.max()]), grid=grid, scores=scores)
