"""Kernel backend selection plus shared multi-modular helpers.

The compiled Cython core is preferred when importable; APMOMENTS_PURE=1
forces the numpy reference backend.  Both backends expose the same surface
and must agree exactly (tests/test_kernels.py).
"""

import os

import numpy as np

if os.environ.get("APMOMENTS_PURE"):
    from . import _ref as _backend
else:
    try:
        from . import _core as _backend  # compiled extension
    except ImportError:
        from . import _ref as _backend

BACKEND = _backend.NAME
NTT_PRIMES = _backend.NTT_PRIMES

divisor_sieve = _backend.divisor_sieve
inverse_table = _backend.inverse_table
bin_residues = _backend.bin_residues
cyclic_square_mod = _backend.cyclic_square_mod
garner_digits = _backend.garner_digits
digits_mod_q = _backend.digits_mod_q


class CapacityError(Exception):
    """A kernel request exceeds the configured capacity (memory or moduli)."""


def select_primes(ntt_size, bound, primes=None):
    """Choose CRT primes whose product exceeds 4*bound (sign margin included).

    Only primes with 2-adic valuation supporting an NTT of length ntt_size
    qualify.  Raises CapacityError when the available list is insufficient;
    silent wraparound is never an option.
    """
    if primes is None:
        primes = NTT_PRIMES
    need = ntt_size.bit_length() - 1
    chosen = []
    prod = 1
    for p, g, v in primes:
        if v < need:
            continue
        chosen.append((p, g))
        prod *= p
        if prod > 4 * bound:
            return chosen
    raise CapacityError(
        f"coefficient bound {bound:.3g} exceeds CRT capacity of the "
        f"available moduli (ntt size {ntt_size})"
    )


def _float_parts(digits, primes):
    pprod = 1
    weights = []
    for p in primes:
        weights.append(float(pprod))
        pprod *= p
    pos = np.zeros(len(digits[0]), dtype=np.float64)
    comp = np.zeros_like(pos)
    for d, p, w in zip(digits, primes, weights):
        pos += d.astype(np.float64) * w
        # complement digit in exact integer arithmetic first: p - 1 and d
        # are not individually representable in float64 for ~62-bit moduli
        comp += (np.uint64(p - 1) - d).astype(np.float64) * w
    neg = pos > float(pprod) / 2.0
    return pos, comp, neg


def digits_to_float(digits, primes):
    """Centered CRT values as float64 from mixed-radix digits.

    Negative values are recovered through the digit complement so that no
    catastrophic cancellation against the full modulus product occurs; the
    sign decision is safe because select_primes keeps |value| < P/4.
    """
    pos, comp, neg = _float_parts(digits, primes)
    return np.where(neg, -(comp + 1.0), pos)


def centered_mod_q(digits, primes, q):
    """Residue mod q of the centered CRT value (signed coefficients)."""
    r = digits_mod_q(digits, primes, q)
    _, _, neg = _float_parts(digits, primes)
    pprod = 1
    for p in primes:
        pprod *= p
    corr = np.uint64((q - pprod % q) % q)
    return np.where(neg, (r + corr) % np.uint64(q), r)


def digits_to_int(digits, primes, index):
    """Exact centered CRT value at one position, as a Python integer."""
    v = 0
    pprod = 1
    for d, p in zip(digits, primes):
        v += int(d[index]) * pprod
        pprod *= p
    if 2 * v > pprod:
        v -= pprod
    return v
