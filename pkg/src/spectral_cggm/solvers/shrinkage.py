"""Linear shrinkage of the sample covariance toward a scaled identity."""

import time

import numpy as np

from ..errors import DegenerateData, TooFewSamples
from ._base import COVARIANCE, SolverResult


def shrinkage_intensity(u, sum_sq_norms_sq, n):
    """Plug-in optimal intensity, clamped to [0, 1].

    Parameters
    ----------
    u : ndarray, shape (p, p)
        Sample covariance ``X.T @ X / n`` of the (centered) rows ``x_k``.
    sum_sq_norms_sq : float
        ``sum_k ||x_k||^4``.
    n : int
        Number of rows.

    Notes
    -----
    The numerator estimates ``sum_ij Var(u_ij)`` by
    ``n^-2 sum_k ||x_k x_k^T - u||_F^2 = n^-2 (sum_k ||x_k||^4 - n ||u||_F^2)``
    and the denominator is ``||u - mu I||_F^2`` with ``mu = tr(u) / p``.
    """
    p = u.shape[0]
    mu = np.trace(u) / p
    u_sq = float(np.sum(u * u))
    # ||u - mu I||_F^2 expanded
    d2 = u_sq - p * mu * mu
    b2 = (sum_sq_norms_sq - n * u_sq) / n ** 2
    b2 = max(b2, 0.0)
    if d2 <= 0.0:
        return 1.0
    return float(min(1.0, max(0.0, min(b2, d2) / d2)))


def ledoit_wolf_from_moments(u, sum_sq_norms_sq, n):
    """Shrunk covariance from sufficient statistics; see :func:`ledoit_wolf`."""
    t0 = time.perf_counter()
    u = np.asarray(u, dtype=float)
    u = (u + u.T) / 2.0
    p = u.shape[0]
    mu = np.trace(u) / p
    if not mu > 0:
        raise DegenerateData("sample covariance is zero")
    pi = shrinkage_intensity(u, sum_sq_norms_sq, n)
    est = (1.0 - pi) * u
    est.flat[::p + 1] += pi * mu
    # est shares eigenvectors with u, so the unpenalized covariance-form
    # likelihood follows from the eigenvalues of u alone
    w = np.maximum(np.linalg.eigvalsh(u), 0.0)
    shrunk = (1.0 - pi) * w + pi * mu
    objective = float(np.sum(np.log(shrunk)) + np.sum(w / shrunk))
    return SolverResult(
        estimate=est,
        estimate_kind=COVARIANCE,
        objective=objective,
        iterations=1,
        converged=True,
        wall_time=time.perf_counter() - t0,
        lam=0.0,
        history=[],
        info={"shrinkage": pi, "target_scale": float(mu), "n_samples": int(n)},
    )


def ledoit_wolf(x, assume_centered=True):
    """Ledoit-Wolf shrinkage estimate of the covariance of ``x``.

    ``pi * mu I + (1 - pi) * U`` with ``U`` the divide-by-n sample covariance,
    ``mu = tr(U) / p`` and ``pi`` from :func:`shrinkage_intensity`.

    Parameters
    ----------
    x : array-like, shape (n, p)
        Samples in rows, n >= 2.
    assume_centered : bool
        Treat the rows as zero-mean draws (the default, matching every data
        source in this package).  With ``False`` the column means are
        removed first; note that for ``n = 2`` centered rows make every
        per-row deviation from ``U`` vanish, so the intensity drops to 0.

    Returns
    -------
    SolverResult
        ``estimate_kind == "covariance"``; ``info["shrinkage"]`` is ``pi``.
    """
    t0 = time.perf_counter()
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 1:
        raise TooFewSamples(f"need an n x p matrix with n >= 2, got shape {x.shape}")
    if not assume_centered:
        x = x - x.mean(axis=0)
    n = x.shape[0]
    u = x.T @ x / n
    row_sq = np.einsum("ij,ij->i", x, x)
    res = ledoit_wolf_from_moments(u, float(row_sq @ row_sq), n)
    res.wall_time = time.perf_counter() - t0
    return res
