"""Cross-spectral density estimation and band collapse.

The spectrum is a trial-averaged multitaper estimate built from sine
tapers on the FFT grid of one trial (no zero padding).  With unit-energy
tapers, white noise of variance ``s2`` has a flat spectrum equal to ``s2``,
so averaging the real part of ``S(f)`` over the full band recovers the
time-domain covariance.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyBand, EmptyPanel, TooShort
from .numerics import PSD_RTOL, sym
from .panel import TimeSeriesPanel

MIN_TIME_POINTS = 64
DEFAULT_TAPERS = 5


@dataclass(frozen=True)
class FrequencyBand:
    low: float
    high: float
    name: str = ""

    def __post_init__(self):
        if not (0.0 <= self.low < self.high):
            raise ValueError(
                f"band requires 0 <= low < high, got [{self.low}, {self.high}]")

    def check(self, nyquist):
        if self.high > nyquist * (1 + 1e-12):
            raise ValueError(f"band upper edge {self.high} exceeds Nyquist {nyquist}")

    @classmethod
    def full(cls, sampling_rate):
        return cls(0.0, sampling_rate / 2.0, "broadband")


@dataclass(frozen=True)
class SpectralDensity:
    """Cross-spectral matrices on an ascending frequency grid.

    ``matrices[k]`` is the Hermitian ``p x p`` matrix at ``frequencies[k]``.
    The constructor Hermitian-symmetrizes and checks positive
    semi-definiteness up to :data:`~spectral_cggm.numerics.PSD_RTOL`.
    """

    frequencies: np.ndarray
    matrices: np.ndarray
    sampling_rate: float

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float).ravel()
        mats = np.array(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2] or mats.shape[0] != freqs.size:
            raise DimensionMismatch(
                f"matrices of shape {mats.shape} do not match {freqs.size} frequencies")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be strictly ascending")
        if freqs.size and (freqs[0] < 0 or freqs[-1] > self.sampling_rate / 2.0):
            raise ValueError("frequencies must lie in [0, sampling_rate / 2]")
        mats = (mats + np.conj(np.swapaxes(mats, 1, 2))) / 2.0
        w = np.linalg.eigvalsh(mats)
        scale = np.maximum(np.abs(w).max(axis=1), np.finfo(float).tiny)
        if np.any(w[:, 0] < -PSD_RTOL * scale):
            raise ValueError("spectral matrices are not positive semi-definite")
        freqs.flags.writeable = False
        mats.flags.writeable = False
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "sampling_rate", float(self.sampling_rate))

    @property
    def n_channels(self):
        return self.matrices.shape[1]

    def at(self, k):
        return self.matrices[k]

    def band_indices(self, band):
        idx = np.flatnonzero((self.frequencies >= band.low) & (self.frequencies <= band.high))
        if idx.size == 0:
            raise EmptyBand(f"no frequency of the grid falls in [{band.low}, {band.high}]")
        return idx


def sine_tapers(n, k):
    """The first ``k`` orthonormal sine tapers of length ``n``, shape (k, n)."""
    t = np.arange(1, n + 1)
    orders = np.arange(1, k + 1)[:, None]
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * orders * t / (n + 1))


def _as_panel(panel, sampling_rate):
    if isinstance(panel, TimeSeriesPanel):
        return panel
    data = np.asarray(panel, dtype=float)
    if data.ndim == 2:
        data = data[None]
    return TimeSeriesPanel(data, sampling_rate)


def _validate(panel, min_channels=2):
    if panel.trial_count < 1 or panel.channel_count < min_channels:
        raise EmptyPanel(
            f"need >= 1 trial and >= {min_channels} channels, "
            f"got {panel.trial_count} x {panel.channel_count}")
    if panel.time_points < MIN_TIME_POINTS:
        raise TooShort(
            f"need >= {MIN_TIME_POINTS} time points per trial, got {panel.time_points}")


def fourier_coefficients(trial, tapers):
    """Tapered DFT coefficients of one mean-centered trial.

    Parameters
    ----------
    trial : ndarray, shape (n_time, p)
    tapers : ndarray, shape (k, n_time)

    Returns
    -------
    coefs : ndarray, shape (k, n_freq, p), complex
    """
    x = trial - trial.mean(axis=0)
    return np.fft.rfft(tapers[:, :, None] * x[None], axis=1)


def estimate_spectrum(panel, taper_count=DEFAULT_TAPERS, sampling_rate=1.0):
    """Trial- and taper-averaged cross-spectral density of a panel.

    ``S(f) = mean over trials and tapers of d(f) d(f)^H`` where ``d(f)`` is
    the vector of tapered Fourier coefficients across channels.

    Parameters
    ----------
    panel : TimeSeriesPanel or array-like (trials, time, channels)
        Plain arrays use ``sampling_rate``.
    taper_count : int
        Number of sine tapers.

    Returns
    -------
    SpectralDensity
    """
    panel = _as_panel(panel, sampling_rate)
    _validate(panel)
    if int(taper_count) < 1:
        raise ValueError("taper_count must be a positive integer")
    n, p = panel.time_points, panel.channel_count
    tapers = sine_tapers(n, int(taper_count))
    freqs = np.fft.rfftfreq(n, d=1.0 / panel.sampling_rate)
    acc = np.zeros((freqs.size, p, p), dtype=complex)
    for trial in panel.data:
        d = fourier_coefficients(trial, tapers)
        acc += np.einsum("kfi,kfj->fij", d, d.conj())
    acc /= panel.trial_count * tapers.shape[0]
    return SpectralDensity(freqs, acc, panel.sampling_rate)


def band_collapse(sd, band):
    """Real part of the mean of ``S(f)`` over grid frequencies in ``band``."""
    idx = sd.band_indices(band)
    return sym(sd.matrices[idx].mean(axis=0).real)


def _band_grid(panel, band):
    freqs = np.fft.rfftfreq(panel.time_points, d=1.0 / panel.sampling_rate)
    idx = np.flatnonzero((freqs >= band.low) & (freqs <= band.high))
    if idx.size == 0:
        raise EmptyBand(f"no frequency of the grid falls in [{band.low}, {band.high}]")
    return idx


def band_moments(panel, band, taper_count=DEFAULT_TAPERS):
    """Sufficient statistics of the real Fourier sample rows in a band.

    Every (trial, taper, in-band frequency) coefficient vector ``d`` yields
    the two real rows ``sqrt(2) Re d`` and ``sqrt(2) Im d``.  Their second
    moment ``U = X.T X / n`` equals :func:`band_collapse` of the panel's
    spectrum, which lets sample-based estimators run on the same matrix.

    Returns
    -------
    u : ndarray, shape (p, p)
    sum_sq_norms_sq : float
        ``sum_k ||x_k||^4`` over the rows.
    n : int
        Number of rows.
    """
    _validate(panel)
    idx = _band_grid(panel, band)
    tapers = sine_tapers(panel.time_points, int(taper_count))
    p = panel.channel_count
    u = np.zeros((p, p))
    fourth = 0.0
    n = 0
    for trial in panel.data:
        d = fourier_coefficients(trial, tapers)[:, idx, :].reshape(-1, p)
        for part in (d.real, d.imag):
            x = np.sqrt(2.0) * part
            u += x.T @ x
            sq = np.einsum("ij,ij->i", x, x)
            fourth += float(sq @ sq)
            n += x.shape[0]
    return sym(u / n), fourth, n


def band_units(panel, band, taper_count=DEFAULT_TAPERS, by="trial"):
    """Band-collapsed real cross-spectra of independent pieces of a panel.

    ``by="trial"`` returns one matrix per trial (averaged over tapers and
    in-band frequencies); ``by="frequency"`` returns one matrix per in-band
    frequency (averaged over trials and tapers).  In both cases the plain
    mean over units equals :func:`band_collapse` of the whole panel, so
    units can be split into cross-validation folds.
    """
    _validate(panel)
    idx = _band_grid(panel, band)
    tapers = sine_tapers(panel.time_points, int(taper_count))
    k = tapers.shape[0]
    p = panel.channel_count
    if by == "trial":
        out = np.empty((panel.trial_count, p, p))
        for t, trial in enumerate(panel.data):
            d = fourier_coefficients(trial, tapers)[:, idx, :].reshape(-1, p)
            out[t] = (d.T @ d.conj()).real / d.shape[0]
    elif by == "frequency":
        out = np.zeros((idx.size, p, p))
        for trial in panel.data:
            d = fourier_coefficients(trial, tapers)[:, idx, :]
            out += np.einsum("kfi,kfj->fij", d, d.conj()).real
        out /= panel.trial_count * k
    else:
        raise ValueError("by must be 'trial' or 'frequency'")
    return (out + np.swapaxes(out, 1, 2)) / 2.0


def partial_coherence_screen(sd, band, ridge=1e-6):
    """Max partial coherence magnitude over the band, for every channel pair.

    ``score[i, j] = max_f |P_ij(f)| / sqrt(P_ii(f) P_jj(f))`` with
    ``P(f) = (S(f) + ridge I)^{-1}``.  Zeros of the inverse spectrum at all
    frequencies mark conditionally independent channels, so small scores
    point at absent edges.  The diagonal is zero.
    """
    if not ridge > 0:
        raise ValueError("ridge must be positive")
    idx = sd.band_indices(band)
    p = sd.n_channels
    if p == 1:
        return np.zeros((1, 1))
    mats = sd.matrices[idx] + ridge * np.eye(p)
    prec = np.linalg.inv(mats)
    d = np.sqrt(np.abs(np.real(np.diagonal(prec, axis1=1, axis2=2))))
    coh = np.abs(prec) / (d[:, :, None] * d[:, None, :])
    score = coh.max(axis=0)
    np.fill_diagonal(score, 0.0)
    return sym(score)


def coherence(sd):
    """Magnitude-squared coherence ``|S_ij|^2 / (S_ii S_jj)`` per frequency."""
    diag = np.real(np.diagonal(sd.matrices, axis1=1, axis2=2))
    return np.abs(sd.matrices) ** 2 / (diag[:, :, None] * diag[:, None, :])
