#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Primitives run in-process against both backend modules; the end-to-end
coefficient build runs in subprocesses so the import-time backend
selection (APMOMENTS_PURE) applies.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from apmoments._kernels import _ref

try:
    from apmoments._kernels import _core
except ImportError:
    _core = None


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_primitives(quick):
    n_sieve = 1_000_000 if quick else 10_000_000
    p_inv = 99_991 if quick else 1_299_709
    n_bin = 1_000_000 if quick else 6_000_000
    ntt_log = 18 if quick else 21
    rng = np.random.default_rng(0)
    weights = rng.normal(size=n_bin)
    ntt_in = {
        b.NAME: rng.integers(0, b.NTT_PRIMES[0][0], size=1 << ntt_log).astype(
            np.uint64
        )
        % b.NTT_PRIMES[0][0]
        for b in backends()
    }
    rows = []
    for backend in backends():
        t_sieve, _ = timed(backend.divisor_sieve, n_sieve)
        t_inv, _ = timed(backend.inverse_table, p_inv)
        t_bin, _ = timed(backend.bin_residues, weights, 9973, 1)
        p, g, _v = backend.NTT_PRIMES[0]
        t_ntt, _ = timed(backend.cyclic_square_mod, ntt_in[backend.NAME], p, g)
        rows.append((backend.NAME, t_sieve, t_inv, t_bin, t_ntt))
    print(f"\nprimitives (sieve n={n_sieve:g}, inv p={p_inv}, "
          f"bin n={n_bin:g}, ntt 2^{ntt_log}):")
    print(f"{'backend':10s} {'sieve':>9s} {'inverse':>9s} {'binning':>9s} {'ntt':>9s}")
    for name, *ts in rows:
        print(f"{name:10s} " + " ".join(f"{t*1e3:8.1f}ms" for t in ts))
    by = {r[0]: r[1:] for r in rows}
    if "cython" in by and "numpy" in by:
        speedups = [n / c for n, c in zip(by["numpy"], by["cython"])]
        print("speedup    " + " ".join(f"{s:8.1f}x " for s in speedups))
    sys.stdout.flush()


def backends():
    return [b for b in (_core, _ref) if b is not None]


def bench_tau(quick):
    n_max = 100_000 if quick else 400_000
    print(f"\nend-to-end exact coefficient build (cusp form, n_max={n_max:g}):")
    sys.stdout.flush()
    code = (
        "import time, apmoments.coeffs as c; t0=time.time(); "
        f"c.cusp_form_table({n_max}, raw_cap=10); "
        "import apmoments; print(f'{apmoments.BACKEND}: {time.time()-t0:.2f}s')"
    )
    for env_extra in ({}, {"APMOMENTS_PURE": "1"}):
        if not env_extra and _core is None:
            continue
        env = dict(os.environ, **env_extra)
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller sizes")
    args = ap.parse_args()
    if _core is None:
        print("compiled core not available; benchmarking fallback only")
    bench_primitives(args.quick)
    bench_tau(args.quick)


if __name__ == "__main__":
    main()
