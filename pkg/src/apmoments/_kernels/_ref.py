"""Pure-numpy reference implementations of the hot kernels.

This backend is selected automatically when the compiled extension is not
available (or when APMOMENTS_PURE=1).  Everything here is exact integer or
IEEE-deterministic arithmetic; the compiled core must produce identical
results (see tests/test_kernels.py).

The NTT primes are all below 2**32 so that a single uint64 multiply never
overflows; the compiled core uses ~62-bit primes instead (it has 128-bit
intermediates available).
"""

import numpy as np

NAME = "numpy"

# (prime, primitive root, two-adic valuation of p-1), largest valuation first.
NTT_PRIMES = (
    (3221225473, 5, 30),
    (3489660929, 3, 28),
    (2013265921, 31, 27),
    (2281701377, 3, 27),
    (2483027969, 3, 26),
    (998244353, 3, 23),
)


def divisor_sieve(n_max):
    """Exact d(n) for 0 <= n <= n_max (d[0] = 0), via paired divisors."""
    d = np.zeros(n_max + 1, dtype=np.int64)
    i = 1
    while i * i <= n_max:
        d[i * i :: i] += 2
        d[i * i] -= 1
        i += 1
    return d


def inverse_table(p):
    """Modular inverses mod prime p: inv[x]*x = 1 (mod p) for 1 <= x < p."""
    inv = np.zeros(p, dtype=np.int64)
    if p > 1:
        inv[1] = 1
    v = inv  # local alias; the recurrence is inherently sequential
    for x in range(2, p):
        v[x] = (p - (p // x) * v[p % x]) % p
    return inv


def bin_residues(weights, p, n0):
    """Sums of weights[i] grouped by (n0 + i) mod p; returns length-p array."""
    n = len(weights)
    idx = (np.arange(n0, n0 + n, dtype=np.int64)) % p
    return np.bincount(idx, weights=weights, minlength=p)


def _root_powers(w, count, p):
    # w^0 .. w^(count-1) by doubling; w and all entries < p < 2**32.
    pw = np.ones(1, dtype=np.uint64)
    wk = int(w)
    while len(pw) < count:
        pw = np.concatenate([pw, (pw * np.uint64(wk)) % np.uint64(p)])
        wk = (wk * wk) % p
    return pw[:count]


def _bit_reverse_permutation(n):
    logn = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(logn):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _ntt(a, p, g, invert):
    n = len(a)
    up = np.uint64(p)
    a = a[_bit_reverse_permutation(n)]
    root = pow(g, (p - 1) // n, p)
    if invert:
        root = pow(root, p - 2, p)
    pw = _root_powers(root, max(n // 2, 1), p)
    length = 2
    while length <= n:
        half = length // 2
        w = pw[:: n // length][:half]
        b = a.reshape(-1, length)
        u = b[:, :half]
        v = (b[:, half:] * w) % up
        s = (u + v) % up
        d = (u + up - v) % up
        b[:, :half] = s
        b[:, half:] = d
        length *= 2
    if invert:
        a = (a * np.uint64(pow(n, p - 2, p))) % up
    return a


def cyclic_square_mod(a, p, g):
    """Exact cyclic self-convolution of a (len = power of two) mod prime p."""
    fa = _ntt(np.ascontiguousarray(a, dtype=np.uint64), p, g, False)
    fa = (fa * fa) % np.uint64(p)
    return _ntt(fa, p, g, True)


def garner_digits(residues, primes):
    """Mixed-radix digits of the CRT value: v = sum_j d_j * prod_{i<j} p_i."""
    digits = []
    for i, (pi, ri) in enumerate(zip(primes, residues)):
        upi = np.uint64(pi)
        acc = np.zeros_like(ri)
        w = 1
        for j in range(i):
            acc = (acc + digits[j] * np.uint64(w % pi)) % upi
            w = w * primes[j]
        inv = np.uint64(pow(w % pi, -1, pi))
        d = (((ri % upi) + upi - acc) % upi * inv) % upi
        digits.append(d)
    return digits


def digits_mod_q(digits, primes, q):
    """Value mod q reconstructed from mixed-radix digits (q < 2**32)."""
    uq = np.uint64(q)
    acc = np.zeros_like(digits[0])
    w = 1
    for d, pj in zip(digits, primes):
        acc = (acc + (d % uq) * np.uint64(w % q)) % uq
        w = w * pj
    return acc
