"""Empirical-CDF copula transform to latent Gaussian margins.

Each channel ``y`` is mapped to ``x = Phi^{-1}(F(y))`` where ``F`` is the
empirical CDF of the channel.  The raw empirical CDF reaches 1 at the
sample maximum, so :func:`to_gaussian` uses the rescaled mid-rank
``rank / (n + 1)`` instead, which keeps every output finite.
"""

from dataclasses import dataclass

import numpy as np
import scipy.special
import scipy.stats

from .errors import NonFiniteInput, OutOfRange, TooFewSamples

_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)

# Rational approximation of the normal quantile (P. J. Acklam), relative
# error ~1.15e-9 before refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def gaussian_cdf(x):
    """Standard normal CDF."""
    out = 0.5 * scipy.special.erfc(-np.asarray(x, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def _horner(coefs, x):
    acc = np.zeros_like(x) + coefs[0]
    for c in coefs[1:]:
        acc = acc * x + c
    return acc


def _lower_quantile(p):
    # valid for 0 < p <= 0.5
    x = np.empty_like(p)
    tail = p < _P_LOW
    q = np.sqrt(-2.0 * np.log(p[tail]))
    x[tail] = _horner(_C, q) / (_horner(_D, q) * q + 1.0)
    mid = ~tail
    q = p[mid] - 0.5
    r = q * q
    x[mid] = _horner(_A, r) * q / (_horner(_B, r) * r + 1.0)
    # one Newton step on Phi(x) - p
    err = 0.5 * scipy.special.erfc(-x / _SQRT2) - p
    return x - err * _SQRT2PI * np.exp(0.5 * x * x)


def gaussian_quantile(p):
    """Inverse standard normal CDF for ``0 < p < 1``.

    Raises
    ------
    OutOfRange
        If any ``p`` lies outside the open unit interval.
    """
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if not np.all((p > 0.0) & (p < 1.0)):
        raise OutOfRange("quantile argument must lie in (0, 1)")
    upper = p > 0.5
    # 1 - p is exact for p >= 0.5
    x = _lower_quantile(np.where(upper, 1.0 - p, p))
    x = np.where(upper, -x, x)
    return float(x[0]) if scalar else x


@dataclass(frozen=True)
class EmpiricalCdf:
    sorted_samples: np.ndarray

    @property
    def n(self):
        return self.sorted_samples.size

    def __call__(self, x):
        """``F(x) = #{samples <= x} / n``."""
        counts = np.searchsorted(self.sorted_samples, x, side="right")
        out = counts / self.n
        return float(out) if np.ndim(out) == 0 else out


def _check_samples(samples):
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 2:
        raise TooFewSamples(f"need at least 2 samples, got {samples.size}")
    if not np.all(np.isfinite(samples)):
        raise NonFiniteInput("samples contain NaN or infinity")
    return samples


def fit_cdf(samples):
    """Fit the empirical CDF of a 1-D sample."""
    samples = _check_samples(samples)
    s = np.sort(samples)
    s.flags.writeable = False
    return EmpiricalCdf(s)


def inverse_cdf(f, y):
    """Generalized inverse ``inf{z : F(z) >= y}`` for ``0 < y <= 1``."""
    y = float(y)
    if not 0.0 < y <= 1.0:
        raise OutOfRange("inverse_cdf argument must lie in (0, 1]")
    # F is non-decreasing along the sorted samples
    k = int(np.searchsorted(f(f.sorted_samples), y, side="left"))
    return float(f.sorted_samples[min(k, f.n - 1)])


def to_gaussian(channel):
    """Map one channel to standard normal scores via mid-ranks.

    ``out[i] = Phi^{-1}(rank(channel[i]) / (n + 1))`` with ties sharing
    their average rank.  The output depends on the input only through its
    ranks, so any strictly increasing transform of ``channel`` yields the
    identical result.

    Parameters
    ----------
    channel : array-like, shape (n,)
        Samples of a single channel, n >= 2.

    Returns
    -------
    scores : ndarray, shape (n,)
    """
    channel = _check_samples(channel)
    n = channel.size
    ranks = scipy.stats.rankdata(channel, method="average")
    u = np.clip(ranks / (n + 1.0), 1.0 / (n + 1.0), n / (n + 1.0))
    return gaussian_quantile(u)


def to_gaussian_panel(data):
    """Apply :func:`to_gaussian` to every channel of a ``trials x time x
    channels`` array, pooling all trials and time points of a channel."""
    data = np.asarray(data, dtype=float)
    out = np.empty_like(data)
    for c in range(data.shape[-1]):
        out[..., c] = to_gaussian(data[..., c].ravel()).reshape(data.shape[:-1])
    return out
