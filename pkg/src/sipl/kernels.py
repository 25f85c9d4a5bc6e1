"""Hot numeric loops, with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``SIPL_NO_NUMBA=1`` to force
the numpy implementations (useful for debugging and for the cross-backend
tests). Both backends expose identical signatures and return identical
results; ``benchmarks/bench_kernels.py`` times them side by side.

Usage::

    from sipl import kernels
    mask = kernels.sieve_odd_segment(1_000_001, 50, base_primes)
"""
from __future__ import annotations

import os

import numpy as np

# the bundled TBB is too old for numba; skip straight to OpenMP / workqueue
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

try:
    from numba import njit, prange

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return decorator

    prange = range


def _env_disabled() -> bool:
    return os.environ.get("SIPL_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = NUMBA_AVAILABLE and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"

# =============================================================================
# Segmented sieve over odd integers
# =============================================================================


def _sieve_odd_segment_np(seg_lo, n_odd, base_primes):
    # entry i stands for seg_lo + 2*i; seg_lo is odd
    mask = np.ones(n_odd, dtype=np.bool_)
    seg_hi = seg_lo + 2 * (n_odd - 1)
    for p in base_primes:
        p = int(p)
        if p == 2:
            continue
        p2 = p * p
        if p2 > seg_hi:
            break
        start = max(p2, ((seg_lo + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start > seg_hi:
            continue
        mask[(start - seg_lo) // 2 :: p] = False
    return mask


@njit(cache=True)
def _sieve_odd_segment_nb(seg_lo, n_odd, base_primes):
    mask = np.ones(n_odd, dtype=np.bool_)
    seg_hi = seg_lo + 2 * (n_odd - 1)
    for t in range(base_primes.shape[0]):
        p = base_primes[t]
        if p == 2:
            continue
        p2 = p * p
        if p2 > seg_hi:
            break
        start = ((seg_lo + p - 1) // p) * p
        if start < p2:
            start = p2
        if start % 2 == 0:
            start += p
        i = (start - seg_lo) // 2
        while i < n_odd:
            mask[i] = False
            i += p
    return mask


def sieve_odd_segment(seg_lo: int, n_odd: int, base_primes: np.ndarray) -> np.ndarray:
    """Primality mask for the odd integers ``seg_lo, seg_lo+2, ...`` (``n_odd`` of them).

    ``seg_lo`` must be odd and ``base_primes`` must contain every prime up to
    the square root of the last entry. The value 1 is reported as "prime" and
    must be masked by the caller.
    """
    if seg_lo % 2 == 0:
        raise ValueError("seg_lo must be odd")
    if USE_NUMBA:
        return _sieve_odd_segment_nb(np.int64(seg_lo), np.int64(n_odd), base_primes.astype(np.int64))
    return _sieve_odd_segment_np(seg_lo, n_odd, base_primes)


# =============================================================================
# Census: histogram of prime counts in [n, n + L(n)]
# =============================================================================


def _census_hist_np(primes, n_lo, n_hi, thresholds, max_m, chunk=1 << 21):
    hist = np.zeros(max_m + 1, dtype=np.int64)
    for a in range(n_lo, n_hi + 1, chunk):
        ns = np.arange(a, min(a + chunk, n_hi + 1), dtype=np.int64)
        lengths = np.searchsorted(thresholds, ns, side="right") - 1
        right = ns + lengths
        counts = np.searchsorted(primes, right, side="right") - np.searchsorted(primes, ns, side="left")
        hist += np.bincount(counts, minlength=max_m + 1)[: max_m + 1]
    return hist


@njit(cache=True, parallel=True)
def _census_hist_nb(primes, n_lo, n_hi, thresholds, max_m, n_chunks):
    total = n_hi - n_lo + 1
    per = (total + n_chunks - 1) // n_chunks
    local = np.zeros((n_chunks, max_m + 1), dtype=np.int64)
    for c in prange(n_chunks):
        a = n_lo + c * per
        b = min(a + per - 1, n_hi)
        if a > b:
            continue
        # window length index: largest t with thresholds[t] <= a
        t = np.searchsorted(thresholds, a, side="right") - 1
        i = np.searchsorted(primes, a, side="left")
        j = np.searchsorted(primes, a + t, side="right")
        nt = thresholds.shape[0]
        np_ = primes.shape[0]
        for n in range(a, b + 1):
            while t + 1 < nt and thresholds[t + 1] <= n:
                t += 1
            while i < np_ and primes[i] < n:
                i += 1
            r = n + t
            while j < np_ and primes[j] <= r:
                j += 1
            local[c, j - i] += 1
    hist = np.zeros(max_m + 1, dtype=np.int64)
    for c in range(n_chunks):
        for m in range(max_m + 1):
            hist[m] += local[c, m]
    return hist


def census_hist(
    primes: np.ndarray,
    n_lo: int,
    n_hi: int,
    thresholds: np.ndarray,
    n_chunks: int = 64,
) -> np.ndarray:
    """Histogram over ``n in [n_lo, n_hi]`` of ``#primes in [n, n + L(n)]``.

    ``L(n)`` is the largest ``t`` with ``thresholds[t] <= n``; ``thresholds``
    is ascending with ``thresholds[0] <= n_lo``. ``primes`` must hold every
    prime in ``[n_lo, n_hi + L(n_hi)]``.
    """
    max_m = len(thresholds)  # a window of L+1 integers holds at most L+1 primes
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    thresholds = np.ascontiguousarray(thresholds, dtype=np.int64)
    if USE_NUMBA:
        n_chunks = max(1, min(n_chunks, n_hi - n_lo + 1))
        hist = _census_hist_nb(primes, np.int64(n_lo), np.int64(n_hi), thresholds, max_m, n_chunks)
    else:
        hist = _census_hist_np(primes, n_lo, n_hi, thresholds, max_m)
    return hist


# =============================================================================
# Membership lookups against a packed odd bitset
# =============================================================================


def _lookup_np(bits, base, values):
    values = np.asarray(values, dtype=np.int64)
    out = values == 2
    odd = (values & 1) == 1
    idx = (values[odd] - base) >> 1
    out[odd] = ((bits[idx >> 3] >> (idx & 7).astype(np.uint8)) & 1).astype(np.bool_)
    return out


@njit(cache=True)
def _lookup_nb(bits, base, values):
    out = np.zeros(values.shape[0], dtype=np.bool_)
    for t in range(values.shape[0]):
        v = values[t]
        if v == 2:
            out[t] = True
        elif v & 1:
            idx = (v - base) >> 1
            out[t] = (bits[idx >> 3] >> (idx & 7)) & 1
    return out


def lookup_primes(bits: np.ndarray, base: int, values: np.ndarray) -> np.ndarray:
    """Vectorised primality lookup in a little-endian packed odd bitset.

    ``base`` is the odd integer stored at bit 0; every queried value must lie
    inside the stored range (the caller checks bounds).
    """
    values = np.ascontiguousarray(values, dtype=np.int64)
    if USE_NUMBA:
        return _lookup_nb(bits, np.int64(base), values)
    return _lookup_np(bits, base, values)


# =============================================================================
# Window scanner: small-prime structure of g*n + h
# =============================================================================


def _scan_structure_np(g, n_lo, n_hi, roles, small_primes):
    n_rows = n_hi - n_lo + 1
    width = roles.shape[0]
    ns = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    has_small = np.zeros((n_rows, width), dtype=np.bool_)
    rows = np.arange(n_rows)
    for p in small_primes:
        p = int(p)
        # smallest h >= 0 with g*n + h = 0 (mod p)
        h0 = (-(g % p) * (ns % p)) % p
        for j in range(0, width, p):
            h = h0 + j
            ok = h < width
            has_small[rows[ok], h[ok]] = True
    tuple_cols = roles == 1
    free_cols = roles == 0
    tuple_ok = ~has_small[:, tuple_cols].any(axis=1)
    free_ok = has_small[:, free_cols].all(axis=1)
    return tuple_ok & free_ok


@njit(cache=True)
def _scan_structure_nb(g, n_lo, n_hi, roles, small_primes):
    n_rows = n_hi - n_lo + 1
    width = roles.shape[0]
    out = np.zeros(n_rows, dtype=np.bool_)
    has_small = np.zeros(width, dtype=np.bool_)
    for r in range(n_rows):
        n = n_lo + r
        for h in range(width):
            has_small[h] = False
        for t in range(small_primes.shape[0]):
            p = small_primes[t]
            h = (-(g % p) * (n % p)) % p
            while h < width:
                has_small[h] = True
                h += p
        ok = True
        for h in range(width):
            role = roles[h]
            if role == 1 and has_small[h]:
                ok = False
                break
            if role == 0 and not has_small[h]:
                ok = False
                break
        out[r] = ok
    return out


def scan_structure(
    g: int, n_lo: int, n_hi: int, roles: np.ndarray, small_primes: np.ndarray
) -> np.ndarray:
    """Rough/non-rough pattern test for ``g*n + h``, ``n in [n_lo, n_hi]``.

    ``roles[h]`` is 1 for tuple offsets (must have no factor in
    ``small_primes``), 0 for offsets that must have such a factor, and any
    other value for offsets that are ignored. Returns one boolean per n.
    """
    roles = np.ascontiguousarray(roles, dtype=np.int8)
    small_primes = np.ascontiguousarray(small_primes, dtype=np.int64)
    if USE_NUMBA:
        return _scan_structure_nb(np.int64(g), np.int64(n_lo), np.int64(n_hi), roles, small_primes)
    return _scan_structure_np(g, n_lo, n_hi, roles, small_primes)
