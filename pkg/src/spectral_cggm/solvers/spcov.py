"""Sparse covariance estimation by majorize-minimize.

Minimizes the covariance-form objective

    f(Sigma) = log det(Sigma) + tr(S Sigma^{-1}) + lam * ||Sigma||_1

over ``Sigma >= delta I``.  ``log det`` is concave, so each outer step
replaces it by its tangent at the current iterate ``Sigma_0``:

    g(Sigma) = tr(Sigma_0^{-1} Sigma) + tr(S Sigma^{-1}) + lam * ||Sigma||_1

which is convex and majorizes ``f`` up to a constant.  The inner loop
minimizes ``g`` with proximal-gradient steps (soft-thresholding followed
by an eigenvalue floor at ``delta``), accepting a step only when it lowers
``g``.  That acceptance rule is what makes the outer objective sequence
non-increasing.
"""

import time
import warnings

import numba
import numpy as np

from ..errors import BadDelta, MaxIterationsExceeded
from ..numerics import clip_eigenvalues, sym
from ._base import COVARIANCE, SolverResult

MIN_STEP = 1e-14


@numba.njit(cache=True)
def _chol(a, L):
    # In-place lower Cholesky factor; False when a is not PD.
    p = a.shape[0]
    L[:, :] = 0.0
    for j in range(p):
        d = a[j, j]
        for k in range(j):
            d -= L[j, k] * L[j, k]
        if not d > 0.0:
            return False
        ljj = np.sqrt(d)
        L[j, j] = ljj
        for i in range(j + 1, p):
            v = a[i, j]
            for k in range(j):
                v -= L[i, k] * L[j, k]
            L[i, j] = v / ljj
    return True


@numba.njit(cache=True)
def _inv_logdet(a, L):
    # (ok, inverse, log det) of a symmetric matrix via its Cholesky factor.
    p = a.shape[0]
    inv = np.empty((p, p))
    if not _chol(a, L):
        return False, inv, 0.0
    linv = np.zeros((p, p))
    for j in range(p):
        linv[j, j] = 1.0 / L[j, j]
        for i in range(j + 1, p):
            v = 0.0
            for k in range(j, i):
                v -= L[i, k] * linv[k, j]
            linv[i, j] = v / L[i, i]
    logdet = 0.0
    for j in range(p):
        logdet += 2.0 * np.log(L[j, j])
    inv[:, :] = linv.T @ linv
    inv[:, :] = (inv + inv.T) / 2.0
    return True, inv, logdet


@numba.njit(cache=True)
def _floor(y, delta, L):
    # Frobenius projection onto {Y >= delta I}; skips eigh when already feasible.
    p = y.shape[0]
    if _chol(y - delta * np.eye(p), L):
        return y
    w, v = np.linalg.eigh(y)
    for k in range(p):
        if w[k] < delta:
            w[k] = delta
    out = (v * w) @ v.T
    return (out + out.T) / 2.0


@numba.njit(cache=True)
def _objective(x, s, lam, L):
    ok, x_inv, ld = _inv_logdet(x, L)
    if not ok:
        return np.inf
    return ld + np.sum(s * x_inv) + lam * np.sum(np.abs(x))


@numba.njit(cache=True)
def _surrogate(x, sigma0_inv, s, lam, L):
    ok, x_inv, _ = _inv_logdet(x, L)
    if not ok:
        return np.inf, x_inv
    return np.sum(sigma0_inv * x) + np.sum(s * x_inv) + lam * np.sum(np.abs(x)), x_inv


@numba.njit(cache=True)
def _minimize_surrogate(x, sigma0_inv, s, lam, delta, tol, max_inner, shrink, t, L):
    gx, x_inv = _surrogate(x, sigma0_inv, s, lam, L)
    steps = 0
    for _ in range(max_inner):
        grad = sigma0_inv - x_inv @ s @ x_inv
        t = t / shrink
        accepted = False
        gy = np.inf
        y = x
        y_inv = x_inv
        while t >= MIN_STEP:
            z = x - t * grad
            thr = t * lam
            y = np.sign(z) * np.maximum(np.abs(z) - thr, 0.0)
            y = (y + y.T) / 2.0
            y = _floor(y, delta, L)
            gy, y_inv = _surrogate(y, sigma0_inv, s, lam, L)
            if gy < gx:
                accepted = True
                break
            t *= shrink
        if not accepted:
            t = max(t, MIN_STEP)
            break
        steps += 1
        rel = (gx - gy) / max(1.0, abs(gy))
        x, gx, x_inv = y, gy, y_inv
        if rel < tol:
            break
    return x, steps, t


@numba.njit(cache=True)
def _mm(s, sigma, lam, delta, tol, max_outer, max_inner, shrink, t, history):
    p = s.shape[0]
    L = np.zeros((p, p))
    f = _objective(sigma, s, lam, L)
    history[0] = f
    inner_total = 0
    converged = False
    it = 0
    for it in range(1, max_outer + 1):
        _, sigma0_inv, _ = _inv_logdet(sigma, L)
        new, steps, t = _minimize_surrogate(
            sigma, sigma0_inv, s, lam, delta, tol, max_inner, shrink, t, L)
        inner_total += steps
        f_new = _objective(new, s, lam, L) if steps > 0 else f
        if f_new > f:
            # rounding-level increase: keep the previous iterate
            f_new = f
            new = sigma
        history[it] = f_new
        rel = (f - f_new) / max(1.0, abs(f_new))
        sigma = new
        f = f_new
        if rel < tol:
            converged = True
            break
    return sigma, it, inner_total, converged


def covariance_objective(sigma, s, lam):
    """``log det(sigma) + tr(s sigma^{-1}) + lam * ||sigma||_1`` (inf if not PD)."""
    sigma = np.ascontiguousarray(sigma, dtype=float)
    return float(_objective(sigma, np.ascontiguousarray(s, dtype=float), float(lam),
                            np.zeros_like(sigma)))


def spcov(s, cfg, *, init=None):
    """Sparse covariance estimate with an L1 penalty on the covariance.

    Parameters
    ----------
    s : array-like, shape (p, p)
        Symmetric positive semi-definite input.
    cfg : SolverConfig
        ``delta`` must be smaller than the smallest diagonal entry of ``s``.
    init : array-like, optional
        Starting covariance; defaults to ``diag(s)``.

    Returns
    -------
    SolverResult
        ``estimate_kind == "covariance"``; ``history`` holds the objective
        at the start and after every outer step.
    """
    t0 = time.perf_counter()
    s = sym(s)
    lam, delta = float(cfg.lam), float(cfg.delta)
    if delta >= np.min(np.diag(s)):
        raise BadDelta(
            f"delta={delta} must be below the smallest diagonal entry "
            f"{np.min(np.diag(s))} of s")
    sigma = np.diag(np.diag(s)) if init is None else clip_eigenvalues(sym(init), delta)
    # first step: 0.9 / L with L = 2 ||S|| ||Sigma^{-1}||^3 bounding the
    # curvature of tr(S Sigma^{-1}) at the start; later steps adapt
    lmin = float(np.linalg.eigvalsh(sigma)[0])
    step = 0.9 / max(2.0 * float(np.linalg.norm(s, 2)) / lmin ** 3, np.finfo(float).tiny)

    history = np.full(int(cfg.max_outer_iters) + 1, np.nan)
    sigma, it, inner_total, converged = _mm(
        s, np.ascontiguousarray(sigma), lam, delta, float(cfg.tol),
        int(cfg.max_outer_iters), int(cfg.max_inner_iters), float(cfg.step_shrink),
        step, history)
    sigma = sym(sigma)
    history = [float(h) for h in history[:it + 1]]

    if not converged:
        warnings.warn(
            f"spcov stopped after {it} outer iterations without converging",
            MaxIterationsExceeded, stacklevel=2)
    return SolverResult(
        estimate=sigma,
        estimate_kind=COVARIANCE,
        objective=history[-1],
        iterations=int(it),
        converged=bool(converged),
        wall_time=time.perf_counter() - t0,
        lam=lam,
        history=history,
        info={"inner_steps": int(inner_total), "delta": delta},
    )
