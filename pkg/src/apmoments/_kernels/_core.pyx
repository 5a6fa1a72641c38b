# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: divisor sieve, inverse tables, residue binning, and
the NTT over ~62-bit primes (128-bit intermediates via __int128).

Must match apmoments._kernels._ref results exactly; the reference backend
uses half-width primes instead because numpy has no 128-bit multiply.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef unsigned long long u64
ctypedef long long i64

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

NAME = "cython"

# (prime, primitive root, two-adic valuation of p-1); ~62-bit moduli.
NTT_PRIMES = (
    (4179340454199820289, 3, 57),
    (1945555039024054273, 5, 56),
    (2485986994308513793, 5, 55),
    (2053641430080946177, 7, 55),
)


cdef inline u64 mulmod(u64 a, u64 b, u64 p) nogil:
    return <u64> ((<u128> a * b) % p)


cdef u64 powmod(u64 base, u64 exp, u64 p) nogil:
    cdef u64 out = 1
    base %= p
    while exp:
        if exp & 1:
            out = mulmod(out, base, p)
        base = mulmod(base, base, p)
        exp >>= 1
    return out


def divisor_sieve(long long n_max):
    """Exact d(n) for 0 <= n <= n_max via paired divisors."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] d = np.zeros(n_max + 1, dtype=np.int64)
    cdef i64* dv = <i64*> cnp.PyArray_DATA(d)
    cdef i64 i = 1, j
    with nogil:
        while i * i <= n_max:
            dv[i * i] += 1
            j = i * (i + 1)
            while j <= n_max:
                dv[j] += 2
                j += i
            i += 1
    return d


def inverse_table(long long p):
    """Modular inverses mod prime p: inv[x] * x = 1 (mod p), inv[0] = 0."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] inv = np.zeros(p, dtype=np.int64)
    cdef i64* v = <i64*> cnp.PyArray_DATA(inv)
    cdef i64 x
    if p > 1:
        v[1] = 1
        with nogil:
            for x in range(2, p):
                v[x] = ((p - (p // x) * v[p % x]) % p + p) % p
    return inv


def bin_residues(cnp.ndarray[cnp.float64_t, ndim=1] weights, long long p, long long n0):
    """Sums of weights[i] grouped by (n0 + i) mod p."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(p, dtype=np.float64)
    cdef double* ov = <double*> cnp.PyArray_DATA(out)
    cdef double* wv = <double*> cnp.PyArray_DATA(weights)
    cdef i64 n = weights.shape[0]
    cdef i64 i, r
    with nogil:
        r = n0 % p
        for i in range(n):
            ov[r] += wv[i]
            r += 1
            if r == p:
                r = 0
    return out


cdef void _ntt_inplace(u64* a, u64* tw, i64 n, u64 p, u64 root) nogil:
    # iterative radix-2; tw is scratch for n/2 twiddle powers of root
    cdef i64 i, j, k, length, half, stride
    cdef u64 u, v
    # bit reversal
    j = 0
    for i in range(1, n):
        k = n >> 1
        while j & k:
            j ^= k
            k >>= 1
        j |= k
        if i < j:
            u = a[i]
            a[i] = a[j]
            a[j] = u
    tw[0] = 1
    for i in range(1, n >> 1):
        tw[i] = mulmod(tw[i - 1], root, p)
    length = 2
    while length <= n:
        half = length >> 1
        stride = n // length
        i = 0
        while i < n:
            for k in range(half):
                u = a[i + k]
                v = mulmod(a[i + k + half], tw[k * stride], p)
                a[i + k] = u + v if u + v < p else u + v - p
                a[i + k + half] = u - v + p if u < v else u - v
            i += length
        length <<= 1


def cyclic_square_mod(cnp.ndarray[cnp.uint64_t, ndim=1] a, p_in, g_in):
    """Exact cyclic self-convolution of a (len = power of two) mod prime p."""
    cdef u64 p = <u64> p_in
    cdef u64 g = <u64> g_in
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] buf = np.array(a, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] scratch = np.empty(
        max(buf.shape[0] >> 1, 1), dtype=np.uint64
    )
    cdef u64* bv = <u64*> cnp.PyArray_DATA(buf)
    cdef u64* tw = <u64*> cnp.PyArray_DATA(scratch)
    cdef i64 n = buf.shape[0]
    cdef u64 root = powmod(g, <u64> ((p - 1) // <u64> n), p)
    cdef u64 iroot = powmod(root, p - 2, p)
    cdef u64 ninv = powmod(<u64> n, p - 2, p)
    cdef i64 i
    with nogil:
        _ntt_inplace(bv, tw, n, p, root)
        for i in range(n):
            bv[i] = mulmod(bv[i], bv[i], p)
        _ntt_inplace(bv, tw, n, p, iroot)
        for i in range(n):
            bv[i] = mulmod(bv[i], ninv, p)
    return buf


def garner_digits(residues, primes):
    """Mixed-radix digits of the CRT value (matches _ref.garner_digits)."""
    cdef list digits = []
    cdef i64 n = residues[0].shape[0]
    cdef i64 i, j, idx
    cdef u64 pi, inv, acc
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] d, ri
    cdef u64[8] pj_mod
    cdef u64* dptr[8]
    cdef u64* rv
    cdef u64* dv
    if len(primes) > 8:
        raise ValueError("at most 8 CRT moduli supported")
    for i in range(len(primes)):
        pi = <u64> primes[i]
        ri = residues[i]
        d = np.zeros(n, dtype=np.uint64)
        w = 1
        for j in range(i):
            pj_mod[j] = <u64> (w % primes[i])
            dptr[j] = <u64*> cnp.PyArray_DATA(<cnp.ndarray> digits[j])
            w = w * primes[j]
        inv = powmod(<u64> (w % primes[i]), pi - 2, pi)
        rv = <u64*> cnp.PyArray_DATA(ri)
        dv = <u64*> cnp.PyArray_DATA(d)
        with nogil:
            for idx in range(n):
                acc = 0
                for j in range(i):
                    acc = (acc + mulmod(dptr[j][idx], pj_mod[j], pi)) % pi
                dv[idx] = mulmod((rv[idx] % pi) + pi - acc, inv, pi)
        digits.append(d)
    return digits


def digits_mod_q(digits, primes, q_in):
    """Value mod q reconstructed from mixed-radix digits."""
    cdef u64 q = <u64> q_in
    cdef i64 n = digits[0].shape[0]
    cdef i64 i, j
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.zeros(n, dtype=np.uint64)
    cdef u64* ov = <u64*> cnp.PyArray_DATA(out)
    cdef u64[8] wj_mod
    cdef u64* dptr[8]
    cdef i64 k = len(primes)
    if k > 8:
        raise ValueError("at most 8 CRT moduli supported")
    w = 1
    for j in range(k):
        wj_mod[j] = <u64> (w % q_in)
        dptr[j] = <u64*> cnp.PyArray_DATA(<cnp.ndarray> digits[j])
        w = w * primes[j]
    with nogil:
        for i in range(n):
            for j in range(k):
                ov[i] = (ov[i] + mulmod(dptr[j][i] % q, wj_mod[j], q)) % q
    return out
