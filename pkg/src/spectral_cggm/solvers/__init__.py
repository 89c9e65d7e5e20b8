"""Solvers for the L1-penalized Gaussian likelihood.

Three interchangeable estimators share :class:`SolverResult`:

* :func:`graphical_lasso` -- sparse precision matrix (precision form).
* :func:`spcov` -- sparse covariance by majorize-minimize (covariance form).
* :func:`ledoit_wolf` -- analytic linear shrinkage of the sample covariance.
"""

from ._base import (COVARIANCE, PRECISION, SolverConfig, SolverResult,
                    heldout_loglik, objective_covariance, objective_precision,
                    sample_covariance)
from .glasso import graphical_lasso, kkt_residual
from .selection import (CVResult, cross_validate_lambda, default_grid,
                        kfold_covariances)
from .shrinkage import ledoit_wolf, ledoit_wolf_from_moments, shrinkage_intensity
from .spcov import spcov

SOLVERS = {"glasso": graphical_lasso, "spcov": spcov}
SOLVER_IDS = ("glasso", "spcov", "ledoit_wolf")

__all__ = [
    "COVARIANCE", "PRECISION", "SOLVERS", "SOLVER_IDS", "CVResult",
    "SolverConfig", "SolverResult", "cross_validate_lambda", "default_grid",
    "graphical_lasso", "heldout_loglik", "kfold_covariances", "kkt_residual",
    "ledoit_wolf", "ledoit_wolf_from_moments", "objective_covariance",
    "objective_precision", "sample_covariance", "shrinkage_intensity", "spcov",
]
