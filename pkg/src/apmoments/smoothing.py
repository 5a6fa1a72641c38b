"""Smooth weights and their Bessel-kernel transforms.

The cusp-form transform pairs w against J_11 (weight 12, so the i^k
prefactor is real), the divisor transform against Y_0 on the positive
axis and K_0 on the negative one.  All three are evaluated after the
variable change v = 4 pi sqrt(u |y|), which turns the kernels into
unit-frequency oscillations: Gauss-Kronrod handles the pre-asymptotic
stretch, Filon panels everything beyond.

Identity checks (norm preservation and cross products) and the decaying
tail certificate used by the dual-sum truncations live here too.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import besselfn
from .quadrature import adaptive_quadrature, filon_oscillatory

WEIGHT = 12
_J_ORDER = WEIGHT - 1

# v beyond which the amp/phase (Hankel) splitting is accurate to ~1e-11
_V_ASYM = {"J": 95.0, "Y0": 14.0}
_K0_DECAY_CUT = 50.0  # K0(v) < 1e-20 past this; tail is dead weight

TAIL_DECAY_A = 5  # certificate exponent: |W(y)| <= C * |y|^-5 for |y| >= 1


@dataclass(frozen=True)
class WeightProfile:
    """Smooth bump supported on [w0, w1]: exp(-1/((t-w0)(w1-t)))."""

    w0: float
    w1: float
    norm_sq: float

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        inside = (t > self.w0) & (t < self.w1)
        prod = np.where(inside, (t - self.w0) * (self.w1 - t), 1.0)
        with np.errstate(under="ignore"):
            out = np.where(inside, np.exp(-1.0 / prod), 0.0)
        return out if out.ndim else float(out)

    @property
    def norm(self):
        return math.sqrt(self.norm_sq)

    def integral_against(self, fn=None, abs_tol=1e-12):
        """Integral of w(t) * fn(t) over the support (fn=None: plain mass)."""
        if fn is None:
            f = self.__call__
        else:
            f = lambda t: self(t) * fn(t)
        val, _ = adaptive_quadrature(f, self.w0, self.w1, abs_tol)
        return val


def default_weight(w0=1.0, w1=2.0):
    if not (0.0 < w0 < w1):
        raise ValueError("need 0 < w0 < w1")
    bump = WeightProfile(w0, w1, 1.0)
    norm_sq, _ = adaptive_quadrature(
        lambda t: bump(t) ** 2, w0, w1, 1e-12
    )
    return WeightProfile(w0, w1, norm_sq)


# Built-in profiles; "disjoint" has w1 < 2*w0, making the dilate-by-2
# overlap integral vanish (the independent-covariance regime).
PROFILES = {
    "default": (1.0, 2.0),
    "narrow": (0.5, 1.0),
    "wide": (1.0, 3.0),
    "disjoint": (1.0, 1.9),
}


def named_profile(name):
    try:
        return default_weight(*PROFILES[name])
    except KeyError:
        raise ValueError(f"unknown profile {name!r}") from None


def _kernel_for(kind, y):
    if kind == "f":
        return ("J", 2.0 * np.pi)
    if kind == "d":
        return ("Y0", -2.0 * np.pi) if y > 0 else ("K0", 4.0)
    raise ValueError(f"unknown kind {kind!r}")


def _kernel_eval(ker, v):
    if ker == "J":
        return besselfn.jn(_J_ORDER, v)
    return besselfn.y0(v) if ker == "Y0" else besselfn.k0(v)


def _kernel_amp_phase(ker, v):
    if ker == "J":
        return besselfn.j_amp_phase(_J_ORDER, v)
    return besselfn.y0_amp_phase(v)


def transform_W(kind, y, profile, abs_tol=1e-9):
    """Bessel transform W_*(y) of the weight; exactly 0 for kind f, y < 0."""
    if y == 0:
        raise ValueError("transform undefined at y = 0")
    if kind == "f" and y < 0:
        return 0.0
    ay = abs(y)
    ker, pref = _kernel_for(kind, y)
    v0 = 4.0 * np.pi * math.sqrt(profile.w0 * ay)
    v1 = 4.0 * np.pi * math.sqrt(profile.w1 * ay)
    scale = 1.0 / (8.0 * np.pi**2 * ay)
    alpha = scale / 2.0  # u = alpha v^2

    def g(v):
        return profile(alpha * v * v) * v * scale

    tol = abs_tol / (2.0 * abs(pref))
    if ker == "K0":
        hi = min(v1, max(v0, _K0_DECAY_CUT))
        if hi <= v0:
            return 0.0
        val, _ = adaptive_quadrature(
            lambda v: g(v) * besselfn.k0(v), v0, hi, tol
        )
        return pref * val
    cut = _V_ASYM[ker]
    total = 0.0
    if v0 < cut:
        val, _ = adaptive_quadrature(
            lambda v: g(v) * _kernel_eval(ker, v), v0, min(v1, cut), tol
        )
        total += val
    if v1 > cut:
        lo = max(v0, cut)

        def fc(v):
            return g(v) * _kernel_amp_phase(ker, v)[0]

        def fs(v):
            return g(v) * _kernel_amp_phase(ker, v)[1]

        val, _ = filon_oscillatory(fc, fs, lo, v1, tol)
        total += val
    return pref * total


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def diff(self):
        return abs(self.lhs - self.rhs)


def _w_sq_integral(kind, sign, profile, y_max, abs_tol, w_tol):
    """Integral of W(sign * y)^2 over y in (0, y_max]."""

    def f(ys):
        return np.array(
            [transform_W(kind, sign * y, profile, w_tol) ** 2 for y in ys]
        )

    eps = 1e-12
    seeds = [eps * 2.0**k for k in range(0, 42) if eps * 2.0**k < y_max]
    val, _ = adaptive_quadrature(f, eps, y_max, abs_tol, seeds=seeds)
    # |W| <= C (1 + |log y|) near 0: the clipped sliver contributes O(eps log^2 eps)
    return val


def plancherel_check(kind, profile, abs_tol=1e-7):
    """Norm preservation ||W_*|| = ||w|| over the multiplicative reals."""
    y_max = _tail_cutoff(kind, profile, abs_tol / 4.0)
    lhs = _w_sq_integral(kind, +1, profile, y_max, abs_tol / 4.0, 1e-10)
    if kind == "d":
        lhs += _w_sq_integral(kind, -1, profile, y_max, abs_tol / 4.0, 1e-10)
    return IdentityCheck(lhs, profile.norm_sq)


def _tail_cutoff(kind, profile, budget):
    # certificate-based cutoff: integral of W^2 past y_max below budget
    c = tail_constant(kind, profile)
    a = TAIL_DECAY_A
    y_max = (c * c / ((2 * a - 1) * budget)) ** (1.0 / (2 * a - 1))
    return float(min(max(8.0, 1.25 * y_max), 512.0))


@lru_cache(maxsize=64)
def tail_constant(kind, profile):
    """Fitted C with |W_*(y)| <= C |y|^-A for |y| >= 1 (A = TAIL_DECAY_A).

    |W(y)| |y|^A rises to a hump (near y ~ 2000/(w1 - w0)-ish scales for
    these bumps) before the superpolynomial decay wins, so the fit samples
    a geometric grid through the hump; past ~10^4 the transform is below
    quadrature roundoff and would only pollute the fit.
    """
    best = 0.0
    y = 1.0
    while y <= 4096.0:
        for s in (+1.0, -1.0):
            wv = transform_W(kind, s * y, profile, 1e-11)
            best = max(best, abs(wv) * y**TAIL_DECAY_A)
        y *= 2.0
    return 2.0 * best


def cross_product_check(kind, m, n, profile, abs_tol=1e-7):
    """Transform cross products: int W(mt) W(nt) dt = int w(mt) w(nt) dt."""
    if m == 0 or n == 0:
        raise ValueError("m, n must be non-zero")
    w_tol = 1e-10
    scale = min(abs(m), abs(n))
    y_max = _tail_cutoff(kind, profile, abs_tol / 8.0) / scale

    def f(ts):
        return np.array(
            [
                transform_W(kind, m * t, profile, w_tol)
                * transform_W(kind, n * t, profile, w_tol)
                for t in ts
            ]
        )

    eps = 1e-12
    seeds = [eps * 2.0**k for k in range(0, 42) if eps * 2.0**k < y_max]
    lhs = 0.0
    for sign in (+1, -1):
        if kind == "f" and (sign * m < 0 or sign * n < 0):
            continue  # W_f vanishes on the negative axis
        val, _ = adaptive_quadrature(
            lambda t: f(sign * t), eps, y_max, abs_tol / 4.0, seeds=seeds
        )
        lhs += val
    # overlap integral of the dilated weights
    def interval(c):
        lo, hi = profile.w0 / c, profile.w1 / c
        return (min(lo, hi), max(lo, hi))

    lo = max(interval(m)[0], interval(n)[0])
    hi = min(interval(m)[1], interval(n)[1])
    if lo >= hi:
        rhs = 0.0
    else:
        rhs, _ = adaptive_quadrature(
            lambda t: profile(m * t) * profile(n * t), lo, hi, 1e-12
        )
    return IdentityCheck(lhs, rhs)


@dataclass(frozen=True)
class TransformTable:
    """Cached W_*(n/Y) for 0 < |n| <= n_max plus the tail certificate."""

    kind: str
    scale_y: float
    n_max: int
    profile: WeightProfile
    pos: np.ndarray  # pos[n] = W(n/Y), n = 1..n_max
    neg: np.ndarray  # neg[n] = W(-n/Y)
    tail_a: int
    tail_c: float

    def __post_init__(self):
        self.pos.setflags(write=False)
        self.neg.setflags(write=False)

    def lookup(self, n):
        """Vectorized W_*(n/Y) for non-zero integer n within range."""
        n = np.asarray(n, dtype=np.int64)
        if np.any(n == 0) or np.any(np.abs(n) > self.n_max):
            raise ValueError("transform table index out of range")
        out = np.where(n > 0, self.pos[np.abs(n)], self.neg[np.abs(n)])
        return out if out.ndim else float(out)

    def tail_envelope(self, y):
        y = np.abs(np.asarray(y, dtype=np.float64))
        out = self.tail_c * y ** (-float(self.tail_a))
        return out if out.ndim else float(out)


def _batch_column(kind, sign, ys, profile):
    """W(sign * y) for an increasing grid ys via shared Gauss-Legendre rules.

    The rule order tracks the oscillation count 4 pi (sqrt(w1) - sqrt(w0))
    sqrt(y) per block, so the many small-y columns of a long table do not
    pay for the worst column.
    """
    ker, pref = _kernel_for(kind, sign)
    span = math.sqrt(profile.w1) - math.sqrt(profile.w0)
    out = np.empty(len(ys))
    block = max(4096, len(ys) // 16)
    rules = {}
    for lo in range(0, len(ys), block):
        chunk = ys[lo : lo + block]
        phase = 4.0 * np.pi * span * math.sqrt(float(chunk[-1]))
        order = int(min(max(48, 1.3 * phase), 8192))
        order = 1 << (order - 1).bit_length()  # pooled rule sizes
        if order not in rules:
            x, wq = np.polynomial.legendre.leggauss(order)
            u = 0.5 * (profile.w1 - profile.w0) * x + 0.5 * (profile.w1 + profile.w0)
            rules[order] = (np.sqrt(u)[:, None], 0.5 * (profile.w1 - profile.w0) * wq * profile(u))
        root_u, q = rules[order]
        sub = max(1, 8_000_000 // order)
        for s0 in range(0, len(chunk), sub):
            part = chunk[s0 : s0 + sub]
            args = 4.0 * np.pi * root_u * np.sqrt(part)[None, :]
            out[lo + s0 : lo + s0 + len(part)] = pref * (q @ _kernel_eval(ker, args))
    return out


def build_transform_table(kind, scale_y, n_max, profile, abs_tol=1e-9):
    if scale_y <= 0:
        raise ValueError("scale Y must be positive")
    ys = np.arange(1, n_max + 1, dtype=np.float64) / scale_y
    pos = np.zeros(n_max + 1)
    neg = np.zeros(n_max + 1)
    pos[1:] = _batch_column(kind, +1, ys, profile)
    if kind == "d":
        neg[1:] = _batch_column(kind, -1, ys, profile)
    # spot-check the batch rule against the adaptive path
    rng = np.random.default_rng(12345)
    picks = np.unique(rng.integers(1, n_max + 1, size=min(12, n_max)))
    for n in picks:
        ref = transform_W(kind, n / scale_y, profile, abs_tol)
        if abs(pos[n] - ref) > max(20.0 * abs_tol, 1e-8):
            raise RuntimeError(
                f"batched transform drifted from adaptive value at n={n}"
            )
    return TransformTable(
        kind,
        scale_y,
        n_max,
        profile,
        pos,
        neg,
        TAIL_DECAY_A,
        tail_constant(kind, profile),
    )
