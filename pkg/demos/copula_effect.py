"""What the copula transform buys on heavy-tailed channels.

Two channels are strongly coupled in the latent Gaussian space, and a third
is independent.  The first channel is observed through ``exp``, which makes
it log-normal and skews the raw cross-spectrum.  We compare the partial
correlations estimated with and without Gaussianizing each channel first.
"""

import numpy as np

from spectral_cggm.copula import to_gaussian_panel
from spectral_cggm.pipeline import connectivity_scores
from spectral_cggm.solvers import SolverConfig, graphical_lasso
from spectral_cggm.spectral import FrequencyBand, band_collapse, estimate_spectrum
from spectral_cggm.synthetic import planted_panel, planted_precision

theta = planted_precision(3, [(0, 1)], weight=0.45)
latent = planted_panel(theta, trials=30, time_points=256, seed=4, nonlinear=False)
observed = latent.with_data(np.concatenate(
    [np.exp(2.0 * latent.data[:, :, :1]), latent.data[:, :, 1:]], axis=2))

target = -theta[0, 1] / np.sqrt(theta[0, 0] * theta[1, 1])
print(f"latent partial correlation ch1-ch2: {target:.3f}")

band = FrequencyBand.full(observed.sampling_rate)
for label, panel in [("raw", observed),
                     ("copula", observed.with_data(to_gaussian_panel(observed.data)))]:
    s = band_collapse(estimate_spectrum(panel), band)
    fit = graphical_lasso(s, SolverConfig(lam=1e-6 * np.mean(np.diag(s))))
    r = connectivity_scores(fit.estimate, fit.estimate_kind)
    print(f"{label:>7}: ch1-ch2 {r[0, 1]:+.3f}   ch1-ch3 {r[0, 2]:+.3f}   ch2-ch3 {r[1, 2]:+.3f}")

# The penalty is nearly zero, so the gap is due to the margins alone.  The
# raw estimate is pulled toward zero because a handful of huge values
# in the exponentiated channel dominate its second moment.  After the rank
# transform every channel is standard normal again and the coupling is
# estimated at its latent strength.
