"""Time every hot kernel under numba and under the numpy fallback.

    python benchmarks/bench_kernels.py [--x 10000000] [--repeat 3]

The numba timing excludes the first (compiling) call.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from sipl import kernels
from sipl.prime_engine import build_table, primes_up_to
from sipl.windows import length_thresholds


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--x", type=int, default=10_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    x = args.x

    base = primes_up_to(math.isqrt(2 * x)).astype(np.int64)
    n_odd = x // 2
    table = build_table(2, x + 64)
    thr = length_thresholds(1.0, x)
    g = 17
    roles = np.zeros(41, dtype=np.int8)
    roles[0] = 2
    roles[[1, 5, 7]] = 1
    small = primes_up_to(100)
    n_lo, n_hi = x // 100 + 1, x // 50
    values = np.arange(3, x, 7, dtype=np.int64)

    cases = {
        "sieve_odd_segment": (
            lambda: kernels._sieve_odd_segment_np(1, n_odd, base),
            lambda: kernels._sieve_odd_segment_nb(1, n_odd, base),
        ),
        "census_hist": (
            lambda: kernels._census_hist_np(table.primes, 2, x, thr, len(thr)),
            lambda: kernels._census_hist_nb(table.primes, 2, x, thr, len(thr), 64),
        ),
        "lookup_primes": (
            lambda: kernels._lookup_np(table.bits, table.odd_base, values),
            lambda: kernels._lookup_nb(table.bits, table.odd_base, values),
        ),
        "scan_structure": (
            lambda: kernels._scan_structure_np(g, n_lo, n_hi, roles, small),
            lambda: kernels._scan_structure_nb(g, n_lo, n_hi, roles, small),
        ),
    }
    print(f"x = {x:,}  numba available: {kernels.NUMBA_AVAILABLE}")
    print(f"{'kernel':<20}{'numpy s':>12}{'numba s':>12}{'speedup':>10}  agree")
    for name, (np_fn, nb_fn) in cases.items():
        nb_fn()  # compile
        t_np, r_np = best_of(np_fn, args.repeat)
        t_nb, r_nb = best_of(nb_fn, args.repeat)
        agree = np.array_equal(np.asarray(r_np), np.asarray(r_nb))
        print(f"{name:<20}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
