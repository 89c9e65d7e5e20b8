"""Synthetic panels with a known conditional-independence graph."""

import numpy as np

from .numerics import cholesky, invert, sym
from .panel import TimeSeriesPanel

# monotone maps that make the observed margins visibly non-Gaussian
MARGINS = (np.exp, np.cbrt, lambda z: z + z ** 3, np.arctan)


def planted_precision(p, edges, weight=0.4):
    """Unit-diagonal precision matrix with ``theta_ij = -weight`` on ``edges``.

    ``edges`` are 0-based index pairs.  The matrix must come out positive
    definite, which holds whenever every node has degree below ``1/weight``.
    """
    theta = np.eye(p)
    for i, j in edges:
        if i == j or not (0 <= i < p and 0 <= j < p):
            raise ValueError(f"invalid edge ({i}, {j}) for p={p}")
        theta[i, j] = theta[j, i] = -weight
    cholesky(theta)
    return sym(theta)


def planted_panel(theta, trials=20, time_points=256, sampling_rate=1.0, seed=0,
                  nonlinear=True):
    """White-in-time latent Gaussian panel with precision ``theta``.

    Each time point is an independent draw of ``N(0, theta^{-1})``, so the
    cross-spectrum is flat and its inverse shares the zero pattern of
    ``theta`` at every frequency.  With ``nonlinear`` the channels pass
    through the monotone maps in :data:`MARGINS` (cycled), which leaves the
    latent graph unchanged but breaks Gaussianity of the observations.
    """
    sigma = invert(theta)
    p = sigma.shape[0]
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((trials, time_points, p)) @ cholesky(sigma).T
    if nonlinear:
        for k in range(p):
            z[:, :, k] = MARGINS[k % len(MARGINS)](z[:, :, k])
    return TimeSeriesPanel(z, sampling_rate)


def edge_set(pairs):
    return {tuple(sorted(e)) for e in pairs}


def edge_f1(found, truth):
    """F1 score of a recovered edge set against the planted one."""
    found, truth = edge_set(found), edge_set(truth)
    if not found and not truth:
        return 1.0
    tp = len(found & truth)
    return 2.0 * tp / (len(found) + len(truth))
