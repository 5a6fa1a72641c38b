"""Moment experiments for arithmetic coefficients in progressions mod p.

The package builds exact coefficient tables (divisor counts, cusp-form
eigenvalues), Kloosterman-sum tables and configuration sums, smooth-weight
Bessel transforms, and the per-residue error statistics whose moments the
experiments compare against Gaussian predictions.
"""

from ._kernels import BACKEND, CapacityError

__version__ = "0.1.0"

__all__ = ["BACKEND", "CapacityError", "__version__"]
