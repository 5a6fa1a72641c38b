"""Kloosterman sums, projective actions mod p, configuration sums.

The full normalized table {Kl(a;p)}_a is one length-p DFT of the map
x -> e(inverse(x)/p) (zero at 0), computed by a Bluestein chirp reduction
to a power-of-two FFT, O(p log p) instead of the O(p^2) direct sums.

Points of P^1(F_p) are encoded as integers 0..p-1 with p itself standing
for the point at infinity.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .arith import is_prime


class IntegrityError(Exception):
    """A numeric invariant (Weil bound etc.) failed beyond tolerance."""


@dataclass(frozen=True)
class ProjectiveMap:
    """Integer 2x2 matrix (a b; c d) with non-zero determinant."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.det == 0:
            raise ValueError("projective map must have non-zero determinant")

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def is_diagonal(self):
        return self.b == 0 and self.c == 0

    @property
    def max_entry(self):
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def inverse(self):
        """The adjugate; the same element of PGL2."""
        return ProjectiveMap(self.d, -self.b, -self.c, self.a)

    def matmul(self, other):
        return ProjectiveMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def min_prime(self):
        """Smallest admissible prime: p > max entry and p coprime to det."""
        return max(self.max_entry, abs(self.det))

    def reduced(self, p):
        """Canonical representative mod p in PGL2(F_p), as a 4-tuple."""
        if self.det % p == 0:
            raise ValueError(f"determinant divisible by {p}; no reduction")
        ent = (self.a % p, self.b % p, self.c % p, self.d % p)
        lead = next(v for v in ent if v)
        s = pow(lead, -1, p)
        return tuple((v * s) % p for v in ent)


def homothety(m):
    return ProjectiveMap(m, 0, 0, 1)


IDENTITY = homothety(1)


def canonical_diagonal(gamma):
    """Unique (alpha, g1, g2) with gamma = alpha*diag(g1, g2), g1 >= 1,
    gcd(g1, g2) = 1."""
    if not gamma.is_diagonal:
        raise ValueError("canonical form applies to diagonal maps only")
    g = math.gcd(abs(gamma.a), abs(gamma.d))
    alpha = g if gamma.a > 0 else -g
    return alpha, gamma.a // alpha, gamma.d // alpha


@dataclass(frozen=True)
class Configuration:
    """Sorted multiplicity vector of a tuple of projective maps."""

    mults: tuple

    def __post_init__(self):
        if not self.mults or any(m < 1 for m in self.mults):
            raise ValueError("multiplicities must be positive")
        if tuple(sorted(self.mults, reverse=True)) != self.mults:
            raise ValueError("multiplicities must be sorted non-increasing")

    @property
    def length(self):
        return len(self.mults)

    @property
    def total(self):
        return sum(self.mults)

    @property
    def mirror(self):
        return all(m % 2 == 0 for m in self.mults)


def configuration_of(maps, p):
    if not maps:
        raise ValueError("need at least one map")
    counts = {}
    for m in maps:
        counts[m.reduced(p)] = counts.get(m.reduced(p), 0) + 1
    return Configuration(tuple(sorted(counts.values(), reverse=True)))


def kloosterman_sum(a, b, c):
    """S(a, b; c) by direct summation (real by the x <-> -x pairing)."""
    if c < 1:
        raise ValueError("modulus must be >= 1")
    if c == 1:
        return 1.0
    total = 0.0
    for x in range(1, c):
        if math.gcd(x, c) == 1:
            xb = pow(x, -1, c)
            total += math.cos(2.0 * math.pi * ((a * x + b * xb) % c) / c)
    return total


def kl_normalized(a, b, c):
    return kloosterman_sum(a, b, c) / math.sqrt(c)


def _bluestein_dft_pos(g):
    """DFT with e(+ax/p) convention at every frequency, length p."""
    p = len(g)
    m = np.arange(p, dtype=np.int64)
    phase = np.pi * ((m * m) % (2 * p)) / p  # exact integer reduction first
    chirp = np.exp(1j * phase)
    size = 1 << (2 * p - 1).bit_length()
    u = np.zeros(size, dtype=np.complex128)
    u[:p] = g * chirp
    kern = np.zeros(size, dtype=np.complex128)
    kern[:p] = np.conj(chirp)
    kern[size - p + 1 :] = np.conj(chirp[1:][::-1])
    conv = np.fft.ifft(np.fft.fft(u) * np.fft.fft(kern))[:p]
    return chirp * conv


def kl_table(p):
    """Normalized Kloosterman sums Kl(a;p) for a = 0..p-1 (index 0 holds
    the degenerate value S(0,1;p)/sqrt(p) = -1/sqrt(p))."""
    if p < 3 or not is_prime(p):
        raise ValueError("kl_table requires an odd prime")
    inv = _kernels.inverse_table(p)
    g = np.exp(2j * np.pi * inv / p)
    g[0] = 0.0
    dft = _bluestein_dft_pos(g)
    if np.max(np.abs(dft.imag)) > 1e-6 * math.sqrt(p):
        raise IntegrityError("Kloosterman table has non-real leakage")
    return dft.real / math.sqrt(p)


def kl_scaling_discrepancy(p, pairs):
    """max |Kl(a,b;p) - Kl(ab;p)| over the given (a, b) with p not | b."""
    worst = 0.0
    for a, b in pairs:
        if b % p == 0:
            raise ValueError("requires p not dividing b")
        lhs = kl_normalized(a, b, p)
        rhs = kl_normalized(a * b, 1, p)
        worst = max(worst, abs(lhs - rhs))
    return worst


def apply_map(gamma, a, p):
    """Fractional linear action on P^1(F_p); a = p encodes infinity."""
    if gamma.det % p == 0:
        raise ValueError(f"determinant divisible by {p}")
    if a == p:  # infinity -> a/c
        num, den = gamma.a % p, gamma.c % p
    else:
        num = (gamma.a * a + gamma.b) % p
        den = (gamma.c * a + gamma.d) % p
    if den == 0:
        return p
    return (num * pow(den, -1, p)) % p


def apply_map_vec(gamma, avec, p, inv=None):
    """Vectorized action on finite points avec (0..p-1); infinity -> p."""
    if gamma.det % p == 0:
        raise ValueError(f"determinant divisible by {p}")
    if inv is None:
        inv = _kernels.inverse_table(p)
    num = (gamma.a % p) * avec + (gamma.b % p)
    den = (gamma.c % p) * avec + (gamma.d % p)
    num %= p
    den %= p
    out = (num * inv[den]) % p
    return np.where(den == 0, p, out)


@lru_cache(maxsize=None)
def st_mult(mu):
    """Sato-Tate moment of (2 cos theta)^mu: Catalan(mu/2) for even mu."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if mu % 2:
        return 0
    h = mu // 2
    return math.comb(mu, h) // (h + 1)


def st_mult_quadrature(mu, nodes=240):
    """Gauss-Legendre evaluation of (2/pi) int_0^pi (2cos t)^mu sin^2 t dt."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * np.pi * (x + 1.0)
    return float(np.pi / 2.0 * (2.0 / np.pi) * np.sum(w * (2 * np.cos(t)) ** mu * np.sin(t) ** 2))


def a_constant(cfg):
    """Product of Sato-Tate moments; positive iff mirror configuration."""
    out = 1
    for m in cfg.mults:
        out *= st_mult(m)
    return out


@dataclass(frozen=True)
class ConfigSumResult:
    value: float
    excluded: int
    config: Configuration
    a_const: int
    p: int

    @property
    def main_term(self):
        return self.a_const * self.p

    @property
    def deviation_ratio(self):
        """|S - A p| / sqrt(p): the deviation in square-root-of-p units."""
        return abs(self.value - self.main_term) / math.sqrt(self.p)


def configuration_sum(maps, p, table=None):
    """S(kappa, beta, p) = sum over a in F_p with every beta_i . a away
    from {0, infinity} of prod_i Kl(beta_i . a; p)."""
    if len(maps) > 12:
        raise ValueError("kappa capped at 12")
    if table is None:
        table = kl_table(p)
    inv = _kernels.inverse_table(p)
    # canonical processing order: permutation invariance holds exactly
    ordered = sorted(maps, key=lambda m: m.reduced(p))
    avec = np.arange(p, dtype=np.int64)
    prod = np.ones(p, dtype=np.float64)
    alive = np.ones(p, dtype=bool)
    for gamma in ordered:
        img = apply_map_vec(gamma, avec, p, inv)
        alive &= (img != 0) & (img != p)
        prod *= table[np.where(img >= p, 0, img)]
    value = float(np.sum(prod[alive]))
    cfg = configuration_of(maps, p)
    return ConfigSumResult(value, int(p - np.sum(alive)), cfg, a_constant(cfg), p)


def sato_tate_angles(p, table=None):
    """Angles arccos(Kl(a;p)/2) for a in F_p^x; Weil bound enforced."""
    if table is None:
        table = kl_table(p)
    vals = table[1:]
    if np.max(np.abs(vals)) > 2.0 + 1e-9:
        raise IntegrityError("Weil bound violated in Kloosterman table")
    return np.arccos(np.clip(vals / 2.0, -1.0, 1.0))


def sato_tate_cdf(theta):
    """CDF of the Sato-Tate measure (2/pi) sin^2 on [0, pi]."""
    theta = np.clip(np.asarray(theta, dtype=np.float64), 0.0, np.pi)
    out = theta / np.pi - np.sin(2.0 * theta) / (2.0 * np.pi)
    return out if out.ndim else float(out)


def random_map(p, rng, span=9):
    """Random small-entry map with det non-zero mod p."""
    while True:
        a, b, c, d = (int(rng.integers(-span, span + 1)) for _ in range(4))
        m = a * d - b * c
        if m != 0 and m % p != 0:
            return ProjectiveMap(a, b, c, d)


def random_tuple(p, kappa, mirror, rng, span=9):
    """A kappa-tuple of maps whose configuration is (non-)mirror as asked."""
    if mirror and kappa % 2:
        raise ValueError("mirror tuples need even total multiplicity")
    while True:
        mults = []
        left = kappa
        while left > 0:
            step = 2 if mirror else 1
            hi = left if not mirror else left // 2 * 2
            m = int(rng.integers(1, hi // step + 1)) * step
            mults.append(m)
            left -= m
        if mirror or any(m % 2 for m in mults):
            break
    distinct = []
    seen = set()
    while len(distinct) < len(mults):
        g = random_map(p, rng, span)
        r = g.reduced(p)
        if r not in seen:
            seen.add(r)
            distinct.append(g)
    maps = []
    for g, m in zip(distinct, mults):
        maps.extend([g] * m)
    return maps
