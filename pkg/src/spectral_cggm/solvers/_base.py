from dataclasses import dataclass, field

import numpy as np

from ..numerics import invert, log_det, sym

PRECISION = "precision"
COVARIANCE = "covariance"


@dataclass(frozen=True)
class SolverConfig:
    """Tuning shared by the iterative solvers.

    Attributes
    ----------
    lam : float
        L1 penalty weight, applied to every entry including the diagonal.
    max_outer_iters : int
        Cap on graphical-lasso sweeps / SPCOV majorize-minimize steps.
    tol : float
        Stop once the relative objective change falls below this value.
    delta : float
        Eigenvalue floor for the SPCOV covariance estimate.
    step_shrink : float
        Backtracking factor of the SPCOV proximal-gradient steps.
    max_inner_iters : int
        Cap on SPCOV proximal-gradient steps per outer iteration.
    """

    lam: float = 0.1
    max_outer_iters: int = 200
    tol: float = 1e-6
    delta: float = 1e-4
    step_shrink: float = 0.5
    max_inner_iters: int = 200

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if int(self.max_outer_iters) < 1 or int(self.max_inner_iters) < 1:
            raise ValueError("iteration caps must be positive")

    def replace(self, **changes):
        fields = {**self.__dict__, **changes}
        return SolverConfig(**fields)


@dataclass
class SolverResult:
    estimate: np.ndarray
    estimate_kind: str
    objective: float
    iterations: int
    converged: bool
    wall_time: float
    lam: float = 0.0
    history: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def covariance(self):
        if self.estimate_kind == COVARIANCE:
            return self.estimate
        return invert(self.estimate)

    def precision(self):
        if self.estimate_kind == PRECISION:
            return self.estimate
        return invert(self.estimate)


def l1_norm(a):
    return float(np.abs(a).sum())


def objective_precision(theta, s, lam):
    """Penalized negative log-likelihood in precision form.

    ``-log det(theta) + tr(s theta) + lam * sum_ij |theta_ij|``
    """
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    return -log_det(theta) + float(np.sum(s * theta)) + lam * l1_norm(theta)


def objective_covariance(sigma, s, lam):
    """Penalized negative log-likelihood in covariance form.

    ``log det(sigma) + tr(s sigma^{-1}) + lam * sum_ij |sigma_ij|``
    """
    sigma = np.asarray(sigma, dtype=float)
    s = np.asarray(s, dtype=float)
    return log_det(sigma) + float(np.sum(s * invert(sigma))) + lam * l1_norm(sigma)


def heldout_loglik(precision, s_test):
    """Gaussian log-likelihood (up to constants and the factor n/2) of test
    data with covariance ``s_test`` under ``precision``."""
    return log_det(precision) - float(np.sum(np.asarray(s_test) * precision))


def sample_covariance(x, assume_centered=False):
    """Maximum-likelihood (divide by n) covariance of an ``n x p`` matrix."""
    x = np.asarray(x, dtype=float)
    if not assume_centered:
        x = x - x.mean(axis=0)
    return sym(x.T @ x / x.shape[0])
