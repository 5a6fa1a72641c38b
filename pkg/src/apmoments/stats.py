"""Gaussian reference moments, KS distances, covariance estimation."""

import math
from dataclasses import dataclass

import numpy as np

HIST_LO = -5.0
HIST_HI = 5.0
HIST_WIDTH = 0.25

_erfc_vec = np.vectorize(math.erfc, otypes=[np.float64])


def gaussian_moment(kappa):
    """kappa-th moment of a standard Gaussian, exact integer."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if kappa % 2:
        return 0
    h = kappa // 2
    return math.factorial(kappa) // (2**h * math.factorial(h))


def normal_cdf(x):
    """Standard normal CDF via the error function; clamped past |x| = 8."""
    x = np.clip(np.asarray(x, dtype=np.float64), -8.0, 8.0)
    out = 0.5 * _erfc_vec(-x / math.sqrt(2.0))
    return out if out.ndim else float(out)


def ks_statistic(samples, cdf):
    """sup-norm distance between the empirical CDF and cdf (one pass)."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(s)
    if n == 0:
        raise ValueError("need at least one sample")
    f = np.asarray(cdf(s), dtype=np.float64)
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("cdf must be monotone")
    up = np.max(np.arange(1, n + 1) / n - f)
    down = np.max(f - np.arange(0, n) / n)
    return float(max(up, down))


def covariance_estimate(pairs):
    """2x2 covariance matrix (population normalization) of sample pairs."""
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("need at least two (x, y) pairs")
    centered = arr - arr.mean(axis=0)
    return centered.T @ centered / arr.shape[0]


def correlation(pairs):
    cov = covariance_estimate(pairs)
    denom = math.sqrt(cov[0, 0] * cov[1, 1])
    if denom == 0:
        raise ValueError("degenerate sample: zero variance")
    return float(cov[0, 1] / denom)


@dataclass(frozen=True)
class DistributionSummary:
    count: int
    mean: float
    variance: float
    std_moments: tuple  # standardized moments of order 1..8
    ks_normal: float
    histogram: tuple  # counts over [-5, 5] in 0.25-wide bins
    underflow: int
    overflow: int

    @classmethod
    def from_samples(cls, samples):
        s = np.asarray(samples, dtype=np.float64)
        n = len(s)
        mean = float(np.mean(s))
        var = float(np.mean((s - mean) ** 2))
        sd = math.sqrt(var) if var > 0 else 1.0
        z = (s - mean) / sd
        std_moments = tuple(float(np.mean(z**k)) for k in range(1, 9))
        ks = ks_statistic(s, normal_cdf)
        edges = np.arange(HIST_LO, HIST_HI + HIST_WIDTH / 2, HIST_WIDTH)
        counts, _ = np.histogram(s, bins=edges)
        under = int(np.sum(s < HIST_LO))
        over = int(np.sum(s >= HIST_HI))
        return cls(n, mean, var, std_moments, ks, tuple(int(c) for c in counts), under, over)

    def to_dict(self):
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "std_moments": list(self.std_moments),
            "ks_normal": self.ks_normal,
            "histogram": {
                "lo": HIST_LO,
                "hi": HIST_HI,
                "width": HIST_WIDTH,
                "counts": list(self.histogram),
                "underflow": self.underflow,
                "overflow": self.overflow,
            },
        }
