"""Arithmetic coefficient tables: divisor function and Hecke eigenvalues.

The cusp-form side is the weight-12 level-1 form with integer coefficients
tau(n), generated exactly: the cube of the eta-type product has the sparse
expansion prod(1-q^n)^3 = sum (-1)^m (2m+1) q^{m(m+1)/2}, and three exact
squarings (NTT over CRT moduli, never floating point) give prod(1-q^n)^24,
whose shifted coefficients are tau(n).  Exactness is load-bearing: the
Hecke three-term relation and the |rho(n)| <= d(n) bound are checked as
integer identities.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, cache
from ._kernels import CapacityError
from .arith import factorize, primes_up_to

WEIGHT = 12

# Desk-scale capacity caps (memory budget; see sieve/table errors).
DIVISOR_SIEVE_CAP = 10_000_000
CUSP_TABLE_CAP = 8_000_000
DEFAULT_CUSP_N_MAX = 200_000
DEFAULT_RAW_CAP = 200_000

# Reported tail-bound constant for sum_{n>N} d(n)^2 n^{-s} <= C N^{1-s} log^3 N.
DIRICHLET_TAIL_C = 10.0

RANKIN_RESIDUAL_THRESHOLD = 0.05


@dataclass(frozen=True)
class CoefficientTable:
    """Values tau_*(n) for 1 <= n <= n_max plus the sign-extension rule.

    kind "d": values[n] = d(n) (exact int64); negative arguments mirror.
    kind "f": values[n] = rho(n) = tau(n) * n^{-(k-1)/2}; zero for n < 0.
    raw holds exact integer tau(n) for n <= raw_len (kind "f" only).
    """

    kind: str
    n_max: int
    values: np.ndarray
    weight: int = 0
    raw: tuple = field(default=(), repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def raw_len(self):
        return len(self.raw)

    def value(self, n):
        n = int(n)
        if n == 0:
            raise ValueError("tau_*(0) is undefined")
        if n < 0:
            if self.kind == "f":
                return 0.0
            n = -n
        if n > self.n_max:
            raise CapacityError(f"table covers n <= {self.n_max}, got {n}")
        v = self.values[n]
        return int(v) if self.kind == "d" else float(v)

    def values_signed(self, n):
        """Vectorized tau_*(n) for integer arrays with the sign rule."""
        n = np.asarray(n, dtype=np.int64)
        if np.any(n == 0) or np.any(np.abs(n) > self.n_max):
            raise CapacityError("argument outside table range")
        out = self.values[np.abs(n)].astype(np.float64)
        if self.kind == "f":
            out = np.where(n < 0, 0.0, out)
        return out

    def prime_power_value(self, p, alpha):
        """tau_*(p^alpha) without requiring p^alpha <= n_max.

        d(p^alpha) = alpha + 1; for the cusp form the Hecke recursion
        rho(p^(a+1)) = rho(p) rho(p^a) - rho(p^(a-1)) extends the table.
        """
        if alpha == 0:
            return 1.0
        if self.kind == "d":
            return float(alpha + 1)
        if p > self.n_max:
            raise CapacityError(f"need rho({p}) but table stops at {self.n_max}")
        r1 = float(self.values[p])
        prev, cur = 1.0, r1
        for _ in range(alpha - 1):
            prev, cur = cur, r1 * cur - prev
        return cur


def sieve_divisor(n_max):
    """Exact divisor-count table d(1..n_max)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > DIVISOR_SIEVE_CAP:
        raise CapacityError(
            f"divisor sieve capped at {DIVISOR_SIEVE_CAP}, got {n_max}"
        )
    return CoefficientTable("d", n_max, _kernels.divisor_sieve(n_max))


def _eta3(n_terms):
    """First n_terms coefficients of prod(1-q^n)^3 (dense, exact)."""
    out = np.zeros(n_terms, dtype=np.int64)
    m = 0
    while m * (m + 1) // 2 < n_terms:
        out[m * (m + 1) // 2] = (2 * m + 1) * (-1 if m & 1 else 1)
        m += 1
    return out


def _tau_digits(n_max):
    """Mixed-radix CRT digits of tau(1..n_max) plus the prime list.

    Each squaring stage picks just enough CRT moduli for a proven bound on
    the output coefficients (sum|a| * max|a|), so wraparound is impossible
    by construction; the bound check escalates the modulus count instead.
    """
    length = n_max
    ntt_size = 1 << (2 * length - 1).bit_length()
    poly = _eta3(length)
    sum_abs = int(np.sum(np.abs(poly)))
    max_abs = int(np.max(np.abs(poly)))
    digits = None
    plist = None
    for _ in range(3):
        bound = min(sum_abs * max_abs, length * max_abs * max_abs)
        chosen = _kernels.select_primes(ntt_size, bound)
        residues = []
        for p, g in chosen:
            if digits is None:
                r = np.mod(poly, p).astype(np.uint64)
            else:
                r = _kernels.centered_mod_q(digits, plist, p)
            buf = np.zeros(ntt_size, dtype=np.uint64)
            buf[:length] = r
            residues.append(_kernels.cyclic_square_mod(buf, p, g)[:length])
        plist = [p for p, _ in chosen]
        digits = _kernels.garner_digits(residues, plist)
        flo = np.abs(_kernels.digits_to_float(digits, plist))
        # Upper bounds with float-rounding margin; only used to size the
        # next modulus set, never to produce values.
        max_abs = int(np.max(flo) * (1.0 + 1e-9)) + 1
        sum_abs = int(np.sum(flo) * (1.0 + 1e-9)) + 1
        poly = None
    return digits, plist


def compute_tau(n_max):
    """Exact integers tau(1..n_max) (index 0 of the result is tau(1))."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > CUSP_TABLE_CAP:
        raise CapacityError(f"cusp-form table capped at {CUSP_TABLE_CAP}")
    if n_max == 1:
        return [1]
    digits, plist = _tau_digits(n_max)
    return [_kernels.digits_to_int(digits, plist, i) for i in range(n_max)]


def normalize_hecke(tau_seq, weight=WEIGHT):
    """rho(n) = tau(n) n^{-(k-1)/2} from exact tau integers."""
    if weight % 2 or weight != WEIGHT:
        raise ValueError("only the even weight 12 is supported")
    n_max = len(tau_seq)
    values = np.zeros(n_max + 1, dtype=np.float64)
    values[1:] = np.array([float(t) for t in tau_seq], dtype=np.float64)
    ns = np.arange(0, n_max + 1, dtype=np.float64)
    ns[0] = 1.0
    values *= ns ** (-(weight - 1) / 2.0)
    return CoefficientTable("f", n_max, values, weight, tuple(tau_seq))


def cusp_form_table(n_max=DEFAULT_CUSP_N_MAX, raw_cap=DEFAULT_RAW_CAP):
    """Cusp-form table with float rho everywhere, exact tau kept to raw_cap.

    Equivalent to normalize_hecke(compute_tau(n_max)) but avoids holding
    millions of big integers when only the normalized values are needed.
    """
    if n_max > CUSP_TABLE_CAP:
        raise CapacityError(f"cusp-form table capped at {CUSP_TABLE_CAP}")
    if n_max == 1:
        return normalize_hecke([1])
    digits, plist = _tau_digits(n_max)
    tau_f = _kernels.digits_to_float(digits, plist)
    values = np.zeros(n_max + 1, dtype=np.float64)
    values[1:] = tau_f
    ns = np.arange(0, n_max + 1, dtype=np.float64)
    ns[0] = 1.0
    values *= ns ** (-(WEIGHT - 1) / 2.0)
    raw = tuple(
        _kernels.digits_to_int(digits, plist, i)
        for i in range(min(raw_cap, n_max))
    )
    return CoefficientTable("f", n_max, values, WEIGHT, raw)


def load_or_build_table(kind, n_max, cache_dir=None, raw_cap=DEFAULT_RAW_CAP):
    """Table via the binary cache; rebuilt (and re-cached) on any mismatch."""
    weight = WEIGHT if kind == "f" else 0
    if cache_dir is not None:
        path = cache.cache_path(cache_dir, kind, weight, n_max)
        vals = cache.read_values(path, kind, weight, n_max)
        if vals is not None:
            return CoefficientTable(kind, n_max, vals, weight)
    table = sieve_divisor(n_max) if kind == "d" else cusp_form_table(n_max, raw_cap)
    if cache_dir is not None:
        cache.write_values(path, kind, weight, table.values)
    return table


def local_factor(a, table):
    """Multiplicative correction prod over p^alpha || |a| of
    (tau(p^alpha) - tau(p) tau(p^(alpha-1)) / (p+1)), with the sign rules:
    zero for a < 0 on the cusp-form side, even in a for the divisor side.
    """
    if a == 0:
        raise ValueError("a must be non-zero")
    if a < 0:
        if table.kind == "f":
            return 0.0
        a = -a
    out = 1.0
    for p, alpha in factorize(a):
        t_a = table.prime_power_value(p, alpha)
        t_1 = table.prime_power_value(p, 1)
        t_am1 = table.prime_power_value(p, alpha - 1)
        out *= t_a - t_1 * t_am1 / (p + 1.0)
    return out


@dataclass(frozen=True)
class EulerFactorResult:
    value: float
    tail_bound: float
    n_terms: int


def euler_factor_series(a, b, s, table, n_trunc=None):
    """sum_{n != 0} tau(an) tau(bn) |n|^{-s} via the Euler-product identity:
    F(s) times prod over p^nu || ab of (tau(p^nu) - tau(p)tau(p^(nu-1))/(p^s+1)),
    with F(s) summed directly and a monitored truncation tail.
    """
    if a == 0 or b == 0 or math.gcd(abs(a), abs(b)) != 1:
        raise ValueError("a, b must be coprime and non-zero")
    if s <= 1:
        raise ValueError("requires s > 1 on the real axis")
    if table.kind == "f" and a * b < 0:
        return EulerFactorResult(0.0, 0.0, 0)
    n_trunc = table.n_max if n_trunc is None else min(n_trunc, table.n_max)
    ns = np.arange(1, n_trunc + 1, dtype=np.float64)
    vals = table.values[1 : n_trunc + 1].astype(np.float64)
    base = float(np.sum(vals * vals * ns ** (-s)))
    if table.kind == "d":
        base *= 2.0
    tail = DIRICHLET_TAIL_C * n_trunc ** (1.0 - s) * math.log(n_trunc) ** 3
    if table.kind == "d":
        tail *= 2.0
    factor = 1.0
    for p, nu in factorize(abs(a * b)):
        t_nu = table.prime_power_value(p, nu)
        t_1 = table.prime_power_value(p, 1)
        t_num1 = table.prime_power_value(p, nu - 1)
        factor *= t_nu - t_1 * t_num1 / (float(p) ** s + 1.0)
    return EulerFactorResult(base * factor, abs(factor) * tail, n_trunc)


def truncated_dirichlet(a, b, s, n_terms, table):
    """Brute-force partial sum sum_{0 < |n| <= N} tau(an) tau(bn) |n|^{-s}."""
    if a == 0 or b == 0:
        raise ValueError("a, b must be non-zero")
    big = max(abs(a), abs(b)) * n_terms
    if big > table.n_max:
        raise CapacityError(f"needs coefficients to {big} > {table.n_max}")
    ns = np.arange(1, n_terms + 1, dtype=np.int64)
    pos = table.values_signed(a * ns) * table.values_signed(b * ns)
    neg = table.values_signed(-a * ns) * table.values_signed(-b * ns)
    return float(np.sum((pos + neg) * ns.astype(np.float64) ** (-s)))


@dataclass(frozen=True)
class RankinEstimate:
    value: float
    residual: float
    low_confidence: bool
    n_used: int


def rankin_constant(table, n_terms=None):
    """Least-squares slope of sum_{n<=M} rho(n)^2 ~ c_f * M over M in [N/2, N].

    This average is the artifact's numeric stand-in for the Rankin-Selberg
    residue (equivalently the Petersson-norm constant).
    """
    if table.kind != "f":
        raise ValueError("rankin_constant applies to the cusp-form kind")
    n_terms = table.n_max if n_terms is None else n_terms
    if n_terms < 10_000:
        raise ValueError("need n_terms >= 10^4 for a stable fit")
    if n_terms > table.n_max:
        raise CapacityError(f"table covers n <= {table.n_max}")
    vals = table.values[1 : n_terms + 1]
    prefix = np.cumsum(vals * vals)
    ms = np.arange(n_terms // 2, n_terms + 1, dtype=np.float64)
    am = prefix[n_terms // 2 - 1 : n_terms]
    c = float(np.sum(am * ms) / np.sum(ms * ms))
    residual = float(np.sqrt(np.mean((am / ms - c) ** 2)) / abs(c))
    return RankinEstimate(c, residual, residual > RANKIN_RESIDUAL_THRESHOLD, n_terms)


def hecke_exception_scan(table, n_limit=None):
    """Prime powers p^alpha <= n_limit with (p+1) tau(p^a) == tau(p) tau(p^(a-1)).

    Conjecturally empty for level 1; reported, never asserted.
    """
    raw = table.raw
    n_limit = len(raw) if n_limit is None else min(n_limit, len(raw))
    hits = []
    for p in primes_up_to(n_limit):
        p = int(p)
        alpha = 1
        power = p
        while power <= n_limit:
            t_a = raw[power - 1]
            t_1 = raw[p - 1]
            t_am1 = 1 if alpha == 1 else raw[p ** (alpha - 1) - 1]
            if (p + 1) * t_a == t_1 * t_am1:
                hits.append((p, alpha))
            alpha += 1
            power *= p
    return hits
