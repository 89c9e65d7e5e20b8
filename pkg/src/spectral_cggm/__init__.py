"""Sparse connectivity estimation for multichannel time series.

The library chains a Gaussian copula transform, a multitaper
cross-spectral estimate and an L1-penalized likelihood solver.  Submodules:

``numerics``   dense symmetric matrix kernels
``copula``     empirical-CDF Gaussianization
``spectral``   cross-spectral density and band collapse
``solvers``    graphical lasso, SPCOV and Ledoit-Wolf
``simbench``   simulation models and replicated benchmarks
``pipeline``   file-to-file connectivity runs (also via the CLI)
"""

__version__ = "0.1.0"
