"""The experiment engine: progression sums, error vectors, dual-sum
verification, correlation sums, and empirical vs predicted (mixed) moments.

Everything downstream of the coefficient tables is deterministic float
arithmetic; per-residue sums are binned in a single pass over n.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels, kloosterman, smoothing
from ._kernels import CapacityError
from .coeffs import local_factor, rankin_constant
from .quadrature import adaptive_quadrature
from .stats import gaussian_moment

EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class ResidueErrorVector:
    """S, M and the normalized errors E for one (kind, X, p) window.

    sums[a] covers every residue class including a = 0; errors[a] is the
    statistic's sample only for a in F_p^x (index 0 is filled but not part
    of any moment).
    """

    kind: str
    p: int
    x_window: float
    main_term: float
    sums: np.ndarray
    errors: np.ndarray
    smoothed_total: float

    def __post_init__(self):
        self.sums.setflags(write=False)
        self.errors.setflags(write=False)

    @property
    def scale_y(self):
        return self.p * self.p / self.x_window

    @property
    def main_term_decay_diagnostic(self):
        """|M_f| * p * X^3, monitored for the rapid-decay claim (kind f)."""
        return abs(self.main_term) * self.p * self.x_window**3


@lru_cache(maxsize=32)
def _weight_integrals(profile):
    """(integral of w, integral of w(t) log t dt) for the main term."""
    i0, _ = adaptive_quadrature(profile, profile.w0, profile.w1, 1e-12)
    i1, _ = adaptive_quadrature(
        lambda t: profile(t) * np.log(t), profile.w0, profile.w1, 1e-12
    )
    return i0, i1


def progression_sums(table, x_window, p, profile):
    """One exact pass over n <= w1it*X binned by n mod p."""
    n_lo = max(1, int(math.floor(profile.w0 * x_window)))
    n_hi = int(math.ceil(profile.w1 * x_window))
    if n_hi > table.n_max:
        raise CapacityError(
            f"window needs coefficients to {n_hi}, table has {table.n_max}"
        )
    ns = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    weights = profile(ns / x_window) * table.values[n_lo : n_hi + 1].astype(
        np.float64
    )
    sums = _kernels.bin_residues(weights, p, n_lo)
    total = float(np.sum(weights))
    if table.kind == "d":
        i0, i1 = _weight_integrals(profile)
        log_part = (math.log(x_window) + 2.0 * EULER_GAMMA - 2.0 * math.log(p)) * i0
        main = total / p - x_window * (log_part + i1) / (p * p)
    else:
        main = total / p
    errors = (sums - main) / math.sqrt(x_window / p)
    return ResidueErrorVector(table.kind, p, float(x_window), main, sums, errors, total)


def divisor_tail_bound(n_from, exponent):
    """Rigorous bound on sum_{n > N} d(n) n^-A via d(n) <= 2 sqrt(n)."""
    if exponent <= 1.5:
        raise ValueError("needs exponent > 3/2")
    return 2.0 * n_from ** (1.5 - exponent) / (exponent - 1.5)


@dataclass(frozen=True)
class VoronoiCheck:
    lhs: float
    rhs: float
    tail_bound: float
    n_used: int

    @property
    def diff(self):
        return abs(self.lhs - self.rhs)


def _voronoi_tail(kind, x_window, p, tail_c, tail_a, n_from):
    both_signs = 2.0 if kind == "d" else 1.0
    scale_y = p * p / x_window
    return (
        both_signs
        * 2.0  # Weil bound for prime modulus
        * math.sqrt(x_window / (p * p))
        * tail_c
        * scale_y**tail_a
        * divisor_tail_bound(n_from, tail_a)
    )


def voronoi_truncation_length(kind, x_window, p, profile, tail_target=1e-4, tail_c=None):
    """Smallest dual length N with certified tail below tail_target."""
    if tail_c is None:
        tail_c = smoothing.tail_constant(kind, profile)
    scale_y = p * p / x_window
    n = max(4, int(math.ceil(scale_y)) + 1)
    while _voronoi_tail(kind, x_window, p, tail_c, smoothing.TAIL_DECAY_A, n) > tail_target:
        n = int(n * 1.3) + 1
        if n > 10_000_000:
            raise CapacityError("voronoi tail will not certify below target")
    return n


def voronoi_check(
    errvec,
    table,
    profile,
    a,
    n_max=None,
    ttable=None,
    kl_row=None,
    tail_target=1e-4,
):
    """Direct E(X,p,a) against the truncated dual Kloosterman expansion."""
    p = errvec.p
    x_window = errvec.x_window
    if a % p == 0:
        raise ValueError("residue must be coprime to p")
    if kl_row is None:
        kl_row = kloosterman.kl_table(p)
    scale_y = errvec.scale_y
    if ttable is not None and n_max is None:
        n_max = ttable.n_max
    if n_max is None:
        n_max = voronoi_truncation_length(
            table.kind, x_window, p, profile, tail_target
        )
    if n_max > table.n_max:
        raise CapacityError(
            f"dual sum needs coefficients to {n_max}, table has {table.n_max}"
        )
    if ttable is None:
        ttable = smoothing.build_transform_table(
            table.kind, scale_y, n_max, profile
        )
    ns = np.arange(1, n_max + 1, dtype=np.int64)
    tot = 0.0
    signs = (1, -1) if table.kind == "d" else (1,)
    for s in signs:
        sn = s * ns
        term = (
            table.values_signed(sn)
            * ttable.lookup(sn)
            * kl_row[(a * sn) % p]
        )
        tot += float(np.sum(term))
    rhs = math.sqrt(x_window / (p * p)) * tot
    tail = _voronoi_tail(
        table.kind, x_window, p, ttable.tail_c, ttable.tail_a, n_max
    )
    return VoronoiCheck(float(errvec.errors[a % p]), rhs, tail, n_max)


def correlation_sum_B(table, a, b, scale_y, p, profile, ttable=None):
    """B_*(a, b, Y): the exact finite dual-window correlation sum."""
    if a == 0 or b == 0 or math.gcd(abs(a), abs(b)) != 1:
        raise ValueError("a, b must be coprime non-zero")
    top = max(abs(a), abs(b))
    n_hi = (p - 1) // (2 * top)
    if n_hi < 1:
        return 0.0
    if top * n_hi > table.n_max:
        raise CapacityError("coefficient table too short for B sum")
    if ttable is None:
        ttable = smoothing.build_transform_table(
            table.kind, scale_y, top * n_hi, profile
        )
    ns = np.arange(1, n_hi + 1, dtype=np.int64)
    total = 0.0
    for s in (1, -1):
        an, bn = s * a * ns, s * b * ns
        total += float(
            np.sum(
                table.values_signed(an)
                * table.values_signed(bn)
                * ttable.lookup(an)
                * ttable.lookup(bn)
            )
        )
    return total


def empirical_moment(errvec, kappa):
    """(1/p) sum over a in F_p^x of E(a)^kappa."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return float(np.sum(errvec.errors[1:] ** kappa) / errvec.p)


def mark_envelope(kappa, x_window, p):
    """Raw moment error envelope p^(-1/2) Y^(k/2) + Y^(-1/2), unit constant."""
    y = p * p / x_window
    return p**-0.5 * y ** (kappa / 2.0) + y**-0.5


@dataclass(frozen=True)
class NormalizationConstant:
    value: float
    mode: str  # "analytic" | "empirical"


def normalization_constant(table, x_window, p, profile, mode="empirical", ttable=None):
    """The variance constant c: analytic leading order, or the dual-window
    average B_*(1,1,Y)/Y the moment formulas are actually built from."""
    scale_y = p * p / x_window
    if mode == "empirical":
        b11 = correlation_sum_B(table, 1, 1, scale_y, p, profile, ttable)
        return NormalizationConstant(b11 / scale_y, mode)
    if mode != "analytic":
        raise ValueError("mode must be 'analytic' or 'empirical'")
    if table.kind == "d":
        t = math.log(scale_y)
        return NormalizationConstant(
            2.0 * profile.norm_sq / math.pi**2 * t**3, mode
        )
    c_f = rankin_constant(table).value
    return NormalizationConstant(profile.norm_sq * c_f, mode)


@dataclass(frozen=True)
class PredictedMoment:
    value: float
    c: float
    mode: str


def predicted_moment(table, kappa, x_window, p, profile, mode="empirical", ttable=None):
    """C(kappa) = m_kappa * c^(kappa/2)."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    norm = normalization_constant(table, x_window, p, profile, mode, ttable)
    return PredictedMoment(
        gaussian_moment(kappa) * norm.value ** (kappa / 2.0), norm.value, norm.mode
    )


@dataclass(frozen=True)
class MixedMomentValue:
    value: float
    domain_size: int


def _check_gamma(gamma, p):
    if p <= gamma.min_prime():
        raise ValueError(
            f"p = {p} too small for this map (needs p > {gamma.min_prime()})"
        )
    if gamma.det % p == 0:
        raise ValueError("determinant divisible by p")


def mixed_moment(errvec, gamma, kappa, lam):
    """(1/p) sum over admissible a of E(a)^kappa E(gamma.a)^lambda."""
    p = errvec.p
    _check_gamma(gamma, p)
    avec = np.arange(p, dtype=np.int64)
    img = kloosterman.apply_map_vec(gamma, avec, p)
    alive = (avec != 0) & (img != 0) & (img != p)
    ev = errvec.errors
    vals = ev[avec[alive]] ** kappa * ev[img[alive]] ** lam
    return MixedMomentValue(float(np.sum(vals) / p), int(np.sum(alive)))


def diag_moment_sum(kappa, lam, c, c_tilde):
    """The diagonal-case combinatorial sum over crossing numbers nu.

    Works with floats or Fractions; follows the 0^0 = 1 convention.
    """
    if (kappa + lam) % 2:
        return 0 * c
    total = 0 * c
    for nu in range(kappa % 2, min(kappa, lam) + 1, 2):
        if (kappa - nu) % 2 or (lam - nu) % 2:
            continue
        coef = (
            math.factorial(nu)
            * math.comb(kappa, nu)
            * math.comb(lam, nu)
            * gaussian_moment(kappa - nu)
            * gaussian_moment(lam - nu)
        )
        half = (kappa + lam) // 2 - nu
        total = total + coef * c**half * c_tilde**nu
    return total


def gaussian_limit_moment(kappa, lam, cov):
    """E[A^kappa B^lambda] for the centered unit-variance Gaussian pair with
    covariance cov, by direct pair-partition (Wick) enumeration."""
    if kappa + lam > 16:
        raise ValueError("pair enumeration capped at kappa + lambda = 16")
    types = [0] * kappa + [1] * lam
    if len(types) % 2:
        return 0 * cov
    weight = {(0, 0): 1, (1, 1): 1, (0, 1): cov, (1, 0): cov}

    def rec(items):
        if not items:
            return 1
        first = items[0]
        rest = items[1:]
        total = 0
        for i in range(len(rest)):
            w = weight[(first, rest[i])]
            total = total + w * rec(rest[:i] + rest[i + 1 :])
        return total

    return rec(types)


@dataclass(frozen=True)
class PredictedMixed:
    value: float
    covariance: float
    c: float
    c_tilde: float
    mode: str


def predicted_mixed(
    table, kappa, lam, gamma, x_window, p, profile, mode="empirical", ttable=None
):
    """C(kappa, lambda, gamma): the product form off the diagonal, the
    crossing-number sum (with covariance report) for diagonal maps."""
    _check_gamma(gamma, p)
    norm = normalization_constant(table, x_window, p, profile, mode, ttable)
    c = norm.value
    if not gamma.is_diagonal:
        val = (
            gaussian_moment(kappa)
            * gaussian_moment(lam)
            * c ** ((kappa + lam) / 2.0)
        )
        return PredictedMixed(val, 0.0, c, 0.0, norm.mode)
    _, g1, g2 = kloosterman.canonical_diagonal(gamma)
    rho = local_factor(g1 * g2, table)
    overlap = dilated_overlap(profile, g1, g2)
    cov = rho * overlap / profile.norm_sq
    scale_y = p * p / x_window
    if mode == "empirical":
        c_tilde = correlation_sum_B(table, g1, g2, scale_y, p, profile, ttable) / scale_y
    elif table.kind == "d":
        c_tilde = 2.0 / math.pi**2 * rho * overlap * math.log(scale_y) ** 3
    else:
        c_tilde = rankin_constant(table).value * rho * overlap
    return PredictedMixed(
        float(diag_moment_sum(kappa, lam, c, c_tilde)), cov, c, c_tilde, norm.mode
    )


def dilated_overlap(profile, m, n):
    """integral of w(m t) w(n t) dt (zero whenever the supports miss)."""
    if m == 0 or n == 0:
        raise ValueError("dilations must be non-zero")

    def interval(cf):
        lo, hi = profile.w0 / cf, profile.w1 / cf
        return (min(lo, hi), max(lo, hi))

    lo = max(interval(m)[0], interval(n)[0])
    hi = min(interval(m)[1], interval(n)[1])
    if lo >= hi:
        return 0.0
    val, _ = adaptive_quadrature(
        lambda t: profile(m * t) * profile(n * t), lo, hi, 1e-12
    )
    return val
