import math
import warnings

import numpy as np
import pytest

from conftest import random_pd
from oracles import glasso_dual_oracle, spcov_scalar_grid
from spectral_cggm.errors import (BadDelta, DegenerateData, EmptyGrid,
                                  MaxIterationsExceeded, NotPositiveDefinite,
                                  SingularInput, TooFewSamples)
from spectral_cggm.numerics import invert
from spectral_cggm.solvers import (COVARIANCE, PRECISION, SolverConfig,
                                   cross_validate_lambda, graphical_lasso,
                                   kfold_covariances, kkt_residual, ledoit_wolf,
                                   objective_covariance, objective_precision,
                                   sample_covariance, shrinkage_intensity, spcov)
from spectral_cggm.synthetic import planted_precision

TIGHT = SolverConfig(tol=1e-12, max_outer_iters=1000)


# -- shared objective -------------------------------------------------------

@pytest.mark.parametrize("theta, s, lam, expected", [
    (np.eye(3), np.eye(3), 0.0, 3.0),
    (np.eye(2), np.eye(2), 1.0, 4.0),
    (np.diag([2.0, 2.0]), np.eye(2), 0.0, -2 * math.log(2) + 4),
])
def test_objective_precision_examples(theta, s, lam, expected):
    assert objective_precision(theta, s, lam) == pytest.approx(expected, abs=1e-12)


def test_objective_precision_requires_pd():
    with pytest.raises(NotPositiveDefinite):
        objective_precision(-np.eye(2), np.eye(2), 0.0)


def test_objective_covariance_at_s_is_log_det_plus_p():
    s = random_pd(np.random.default_rng(0), 4)
    assert objective_covariance(s, s, 0.0) == pytest.approx(np.linalg.slogdet(s)[1] + 4)


def test_config_validation():
    for bad in ({"lam": -1}, {"tol": 0}, {"delta": 0}, {"step_shrink": 1.0}):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


# -- graphical lasso --------------------------------------------------------

@pytest.mark.parametrize("lam", [0.0, 0.3, 2.0])
def test_glasso_diagonal_closed_form(lam):
    s = np.diag([1.0, 2.0, 3.0])
    res = graphical_lasso(s, SolverConfig(lam=lam))
    assert res.estimate_kind == PRECISION
    np.testing.assert_allclose(res.estimate, np.diag(1 / (np.diag(s) + lam)), atol=1e-12)
    value, _, _ = glasso_dual_oracle(s, lam)
    assert res.objective == pytest.approx(value, abs=1e-8)


def test_glasso_unpenalized_is_inverse():
    s = random_pd(np.random.default_rng(1), 4)
    res = graphical_lasso(s, SolverConfig(lam=0.0))
    assert np.abs(res.estimate - np.linalg.inv(s)).max() < 1e-5


def test_glasso_full_shrinkage_threshold():
    s = random_pd(np.random.default_rng(2), 5)
    lam = np.abs(s - np.diag(np.diag(s))).max()
    theta = graphical_lasso(s, SolverConfig(lam=lam)).estimate
    assert np.all(theta[~np.eye(5, dtype=bool)] == 0.0)
    value, oracle_theta, _ = glasso_dual_oracle(s, lam)
    assert objective_precision(theta, s, lam) == pytest.approx(value, abs=1e-8)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("lam", [0.05, 0.2])
def test_glasso_kkt_certificate(seed, lam):
    s = random_pd(np.random.default_rng(seed), 6)
    theta = graphical_lasso(s, SolverConfig(lam=lam)).estimate
    w = invert(theta)
    off = ~np.eye(6, dtype=bool)
    dev = np.abs(w - s)
    assert np.all(dev[off] <= lam + 1e-4)
    nz = off & (theta != 0)
    assert np.all(np.abs(dev[nz] - lam) <= 1e-4)
    assert np.abs(np.diag(w) - (np.diag(s) + lam)).max() <= 1e-10
    assert kkt_residual(theta, s, lam) <= 1e-4


def test_glasso_matches_oracle_p4():
    rng = np.random.default_rng(3)
    for lam in (0.0, 0.1, 0.5):
        s = random_pd(rng, 4)
        value, _, gap = glasso_dual_oracle(s, lam)
        assert gap <= 1e-10
        res = graphical_lasso(s, SolverConfig(lam=lam))
        assert abs(objective_precision(res.estimate, s, lam) - value) <= 1e-6


def test_glasso_scale_behavior():
    s = random_pd(np.random.default_rng(4), 5)
    a = graphical_lasso(s, TIGHT.replace(lam=0.1)).estimate
    b = graphical_lasso(2 * s, TIGHT.replace(lam=0.2)).estimate
    assert np.abs(b - a / 2).max() <= 1e-8


def test_glasso_singular_input():
    x = np.random.default_rng(0).standard_normal((2, 4))
    s = sample_covariance(x)
    with pytest.raises(SingularInput):
        graphical_lasso(s, SolverConfig(lam=0.0))
    res = graphical_lasso(s, SolverConfig(lam=0.1))
    assert np.all(np.linalg.eigvalsh(res.estimate) > 0)


def test_glasso_negative_diagonal_rejected():
    with pytest.raises(ValueError):
        graphical_lasso(-np.eye(2), SolverConfig())


def test_glasso_iteration_cap_warns():
    s = random_pd(np.random.default_rng(5), 8)
    with pytest.warns(MaxIterationsExceeded):
        res = graphical_lasso(s, SolverConfig(lam=0.01, max_outer_iters=1, tol=1e-15))
    assert not res.converged
    assert np.all(np.linalg.eigvalsh(res.estimate) > 0)


# -- spcov -------------------------------------------------------------------

@pytest.mark.parametrize("lam", [0.2, 1.0])
def test_spcov_diagonal_matches_scalar_oracle(lam):
    d = np.array([0.5, 1.0, 2.0, 3.0])
    res = spcov(np.diag(d), TIGHT.replace(lam=lam))
    assert res.estimate_kind == COVARIANCE
    est = res.estimate
    assert np.all(est[~np.eye(4, dtype=bool)] == 0.0)
    for i, di in enumerate(d):
        closed = (-1 + math.sqrt(1 + 4 * lam * di)) / (2 * lam)
        assert est[i, i] == pytest.approx(spcov_scalar_grid(di, lam), abs=1e-3)
        assert est[i, i] == pytest.approx(closed, abs=1e-4)


def test_spcov_unpenalized_returns_s():
    s = random_pd(np.random.default_rng(6), 5)
    res = spcov(s, SolverConfig(lam=0.0, max_outer_iters=2000, tol=1e-12))
    assert np.abs(res.estimate - s).max() < 1e-4


@pytest.mark.parametrize("seed", range(5))
def test_spcov_descent_and_floor(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((30, 10))
    s = sample_covariance(x)
    cfg = SolverConfig(lam=0.1, delta=0.05)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaxIterationsExceeded)
        res = spcov(s, cfg)
    h = np.array(res.history)
    assert np.all(np.diff(h) <= 1e-10)
    assert np.linalg.eigvalsh(res.estimate)[0] >= cfg.delta - 1e-8
    assert res.objective == pytest.approx(objective_covariance(res.estimate, s, 0.1), rel=1e-10)


def test_spcov_bad_delta():
    with pytest.raises(BadDelta):
        spcov(np.diag([1.0, 0.01]), SolverConfig(delta=0.05))


# -- Ledoit-Wolf -------------------------------------------------------------

def test_ledoit_wolf_large_n_recovers_identity():
    x = np.random.default_rng(0).standard_normal((100_000, 4))
    res = ledoit_wolf(x)
    assert res.estimate_kind == COVARIANCE
    assert np.linalg.norm(res.estimate - np.eye(4)) / 2.0 < 0.02


def test_ledoit_wolf_rescues_rank_deficiency():
    res = ledoit_wolf(np.random.default_rng(1).standard_normal((2, 50)))
    assert np.linalg.eigvalsh(res.estimate)[0] > 0


def test_ledoit_wolf_degenerate_and_too_few():
    # identical rows have zero sample covariance once the mean is removed
    with pytest.raises(DegenerateData):
        ledoit_wolf(np.tile([1.0, 2.0, 3.0], (5, 1)), assume_centered=False)
    with pytest.raises(DegenerateData):
        ledoit_wolf(np.zeros((5, 3)))
    with pytest.raises(TooFewSamples):
        ledoit_wolf(np.ones((1, 3)))


def test_ledoit_wolf_intensity_vanishes_with_n():
    x = np.random.default_rng(2).standard_normal((100_000, 5)) @ np.diag([1, 2, 3, 4, 5.0])
    small = ledoit_wolf(x[:50]).info["shrinkage"]
    large = ledoit_wolf(x).info["shrinkage"]
    assert 0 <= large < small <= 1


def test_ledoit_wolf_matches_explicit_plug_in():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((40, 6)) @ rng.standard_normal((6, 6))
    xc = x - x.mean(axis=0)
    n, p = xc.shape
    u = xc.T @ xc / n
    mu = np.trace(u) / p
    var_sum = sum(np.sum((np.outer(r, r) - u) ** 2) for r in xc) / n ** 2
    dist = np.sum((u - mu * np.eye(p)) ** 2)
    pi = min(1.0, var_sum / dist)
    assert shrinkage_intensity(u, float(np.sum(np.sum(xc ** 2, 1) ** 2)), n) == pytest.approx(pi)
    np.testing.assert_allclose(ledoit_wolf(x, assume_centered=False).estimate, pi * mu * np.eye(p) + (1 - pi) * u,
                               atol=1e-12)


# -- permutation equivariance ------------------------------------------------

@pytest.mark.parametrize("solver", ["glasso", "spcov", "ledoit_wolf"])
def test_permutation_equivariance(solver):
    rng = np.random.default_rng(7)
    x = rng.standard_normal((60, 5)) @ rng.standard_normal((5, 5))
    perm = np.array([2, 4, 0, 1, 3])
    if solver == "ledoit_wolf":
        a, b = ledoit_wolf(x).estimate, ledoit_wolf(x[:, perm]).estimate
    else:
        s = sample_covariance(x)
        fn = graphical_lasso if solver == "glasso" else spcov
        cfg = SolverConfig(lam=0.1, delta=1e-3)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MaxIterationsExceeded)
            a = fn(s, cfg).estimate
            b = fn(s[np.ix_(perm, perm)], cfg).estimate
    assert np.abs(b - a[np.ix_(perm, perm)]).max() <= 1e-8


# -- cross-validation ----------------------------------------------------------

def _sparse_folds(seed, n=30, p=10):
    theta = planted_precision(p, [(i, i + 1) for i in range(p - 1)])
    rng = np.random.default_rng(seed)
    x = rng.multivariate_normal(np.zeros(p), invert(theta), size=n)
    return kfold_covariances(x, 5, np.random.default_rng(seed))


def test_cv_single_lambda():
    assert cross_validate_lambda(_sparse_folds(0), [0.3], "glasso").lam == 0.3


def test_cv_picks_middle_of_extreme_grid():
    cv = cross_validate_lambda(_sparse_folds(0), [0.001, 0.1, 10], "glasso")
    assert cv.lam == 0.1
    assert cv.scores.shape == (5, 3)


def test_cv_identical_folds_have_zero_variance():
    s = random_pd(np.random.default_rng(8), 4)
    cv = cross_validate_lambda([(s, s)] * 3, [0.01, 0.1, 1.0], "spcov")
    assert np.all(cv.scores.var(axis=0) == 0)


def test_cv_ties_go_to_larger_lambda():
    # diagonal data: every penalty >= max |offdiag| = 0 gives the same fit shape,
    # but scores still differ; a one-point grid duplicate must collapse
    s = np.diag([1.0, 2.0])
    cv = cross_validate_lambda([(s, s), (s, s)], [0.5, 0.5], "glasso")
    assert cv.lam == 0.5
    t = np.eye(2)
    # glasso estimate for s=diag(d) is diag(1/(d+lam)); with s_test=0 the
    # held-out score log det Theta is maximal... construct an exact tie instead
    folds = [(t, np.zeros((2, 2)))] * 2
    cv = cross_validate_lambda(folds, [0.0, 0.0 + 1e-300], "glasso")
    assert cv.lam == 1e-300


def test_cv_errors():
    with pytest.raises(EmptyGrid):
        cross_validate_lambda(_sparse_folds(0), [], "glasso")
    with pytest.raises(ValueError):
        cross_validate_lambda(_sparse_folds(0)[:1], [0.1], "glasso")
    with pytest.raises(ValueError):
        cross_validate_lambda(_sparse_folds(0), [0.1], "ledoit_wolf")
