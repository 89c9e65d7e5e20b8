"""Dense symmetric / Hermitian matrix kernels.

Matrices are plain ``numpy.ndarray`` objects.  :func:`sym` and :func:`herm`
are the constructors: they validate shape and return an exactly
(bit-for-bit) symmetric or Hermitian copy.

All numerical tolerances used by the library live in this module.
"""

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonFiniteInput, NotPositiveDefinite

# Reconstruction / inversion tolerances checked by the test-suite.
CHOLESKY_RTOL = 1e-10
INVERSE_ATOL = 1e-8
EIGEN_ATOL = 1e-8
# Smallest admissible eigenvalue of a "PSD" spectral matrix, relative to the
# largest one.
PSD_RTOL = 1e-8
# Lasso coordinate-descent tolerance on coefficient change.
LASSO_TOL = 1e-7
# Graphical lasso KKT residual (relative to mean diagonal) required before
# the objective-based stopping rule is allowed to fire.
GLASSO_KKT_RTOL = 1e-11


def _square(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput("matrix has non-finite entries")
    return a


def sym(a):
    """Return a real symmetric copy of ``a``: ``(a + a.T) / 2``.

    The result satisfies ``out[i, j] == out[j, i]`` exactly because
    floating-point addition is commutative.
    """
    a = _square(a, float)
    return (a + a.T) / 2.0


def herm(a):
    """Return a Hermitian copy of ``a``; the diagonal is exactly real."""
    a = _square(a, complex)
    return (a + a.conj().T) / 2.0


def is_symmetric(a):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.array_equal(a, a.T)


def cholesky(a):
    """Lower Cholesky factor ``L`` with ``L @ L.T == a``.

    Raises
    ------
    NotPositiveDefinite
        If the factorization breaks down.
    """
    a = np.asarray(a, dtype=float)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("matrix is not positive definite") from None


def is_pd(a):
    try:
        cholesky(a)
    except NotPositiveDefinite:
        return False
    return True


def log_det(a):
    """Log-determinant of a positive definite matrix via its Cholesky factor."""
    L = cholesky(a)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def invert(a):
    """Inverse of a positive definite matrix, returned exactly symmetric."""
    a = np.asarray(a, dtype=float)
    L = cholesky(a)
    inv = scipy.linalg.cho_solve((L, True), np.eye(a.shape[0]))
    return (inv + inv.T) / 2.0


def eigen_sym(a):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric ``a``."""
    return np.linalg.eigh(np.asarray(a, dtype=float))


def soft_threshold(x, t):
    """Proximal operator of ``t * |.|``: ``sign(x) * max(|x| - t, 0)``.

    Works elementwise on arrays; returns a float for scalar input.
    """
    out = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def clip_eigenvalues(a, floor):
    """Project symmetric ``a`` onto ``{X : X >= floor * I}`` in Frobenius norm."""
    w, v = eigen_sym(a)
    if w[0] >= floor:
        return a
    w = np.maximum(w, floor)
    out = (v * w) @ v.T
    return (out + out.T) / 2.0
