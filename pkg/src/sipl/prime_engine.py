"""Segmented prime tables, factorisation and the basic multiplicative functions."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import InvalidRangeError, OutOfRangeError, RangeTooLargeError

SEGMENT_ODD_BITS = 1 << 22
DEFAULT_MEMORY_BUDGET_MB = 2048
# cofactor after trial division up to this bound is 1 or prime for n <= bound**2
FACTOR_TRIAL_BOUND = 10**6


def memory_budget_mb() -> float:
    raw = os.environ.get("SIPL_MEMORY_BUDGET_MB")
    return float(raw) if raw else float(DEFAULT_MEMORY_BUDGET_MB)


def simple_sieve(limit: int) -> np.ndarray:
    """All primes ``<= limit`` as an int64 array (plain Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


@lru_cache(maxsize=8)
def _cached_primes(limit: int) -> np.ndarray:
    primes = simple_sieve(limit)
    primes.setflags(write=False)
    return primes


def primes_up_to(limit: int) -> np.ndarray:
    """Cached primes ``<= limit``; rounded up internally so nearby limits share a cache entry."""
    bucket = max(1024, 1 << max(0, int(limit)).bit_length())
    primes = _cached_primes(bucket)
    return primes[: np.searchsorted(primes, limit, side="right")]


# =============================================================================
# PrimeTable
# =============================================================================


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Immutable primality store for the closed range ``[lo, hi]``.

    Membership is a little-endian packed bitset with one bit per odd integer
    starting at ``odd_base``; ``primes`` is the sorted array of the primes in
    range, used for counting.
    """

    lo: int
    hi: int
    odd_base: int
    bits: np.ndarray = field(repr=False)
    primes: np.ndarray = field(repr=False)
    base_primes: np.ndarray = field(repr=False)

    def covers(self, a: int, b: int) -> bool:
        return self.lo <= a and b <= self.hi

    def _check(self, a: int, b: int) -> None:
        if not self.covers(a, b):
            raise OutOfRangeError(f"[{a}, {b}] is not inside the table range [{self.lo}, {self.hi}]")

    def is_prime(self, n: int) -> bool:
        self._check(n, n)
        if n == 2:
            return True
        if n < 2 or n % 2 == 0:
            return False
        idx = (n - self.odd_base) >> 1
        return bool((self.bits[idx >> 3] >> (idx & 7)) & 1)

    def is_prime_array(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.int64)
        if values.size == 0:
            return np.zeros(0, dtype=bool)
        self._check(int(values.min()), int(values.max()))
        out = np.zeros(values.shape, dtype=bool)
        ok = values >= 2
        out[ok] = kernels.lookup_primes(self.bits, self.odd_base, values[ok])
        return out

    def primes_between(self, a: int, b: int) -> np.ndarray:
        self._check(a, b)
        i = np.searchsorted(self.primes, a, side="left")
        j = np.searchsorted(self.primes, b, side="right")
        return self.primes[i:j]

    def count(self, a: int, b: int) -> int:
        self._check(a, b)
        if a > b:
            return 0
        return int(np.searchsorted(self.primes, b, side="right") - np.searchsorted(self.primes, a, side="left"))

    def __len__(self) -> int:
        return int(self.primes.shape[0])


def _estimated_bytes(lo: int, hi: int) -> float:
    span = hi - lo + 1
    bitset = span / 16
    n_primes = span / max(1.0, math.log(max(hi, 3)) - 1.1) + 64
    # packed bits, prime array, and one unpacked working segment
    return bitset + 8 * n_primes + SEGMENT_ODD_BITS


def build_table(
    lo: int,
    hi: int,
    *,
    segment_bits: int = SEGMENT_ODD_BITS,
    budget_mb: float | None = None,
) -> PrimeTable:
    """Segmented sieve of ``[lo, hi]``.

    ``lo = 1`` is accepted (1 is simply not prime) so that counts starting
    at 1 can be served.
    """
    lo, hi = int(lo), int(hi)
    if lo < 1:
        raise InvalidRangeError(f"lo must be >= 1, got {lo}")
    if lo > hi:
        raise InvalidRangeError(f"lo={lo} > hi={hi}")
    budget = memory_budget_mb() if budget_mb is None else budget_mb
    need = _estimated_bytes(lo, hi) / 2**20
    if need > budget:
        raise RangeTooLargeError(
            f"segment [{lo}, {hi}] needs ~{need:.0f} MB, over the {budget:.0f} MB budget (SIPL_MEMORY_BUDGET_MB)"
        )

    base_primes = primes_up_to(math.isqrt(hi)).copy()
    odd_base = lo if lo % 2 else lo + 1
    n_odd_total = max(0, (hi - odd_base) // 2 + 1)
    masks = []
    for start in range(0, n_odd_total, segment_bits):
        n_odd = min(segment_bits, n_odd_total - start)
        seg_lo = odd_base + 2 * start
        mask = kernels.sieve_odd_segment(seg_lo, n_odd, base_primes)
        # the sieve does not clear base primes themselves, but does report 1
        if seg_lo == 1:
            mask[0] = False
        masks.append(mask)
    odd_mask = np.concatenate(masks) if masks else np.zeros(0, dtype=bool)

    odd_primes = odd_base + 2 * np.flatnonzero(odd_mask).astype(np.int64)
    if lo <= 2 <= hi:
        primes = np.concatenate([np.array([2], dtype=np.int64), odd_primes])
    else:
        primes = odd_primes
    bits = np.packbits(odd_mask, bitorder="little")
    for arr in (bits, primes, base_primes):
        arr.setflags(write=False)
    return PrimeTable(lo=lo, hi=hi, odd_base=odd_base, bits=bits, primes=primes, base_primes=base_primes)


def count_primes_in(table: PrimeTable, a: int, b: int) -> int:
    """``|[a, b] ∩ P|`` for a closed interval inside the table."""
    return table.count(a, b)


# =============================================================================
# Factorisation and arithmetic functions
# =============================================================================


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def value(self) -> int:
        out = 1
        for p, e in self.factors:
            out *= p**e
        return out


@lru_cache(maxsize=1 << 16)
def factorize(n: int) -> Factorization:
    """Deterministic trial-division factorisation.

    Fast up to 10**12 (divisors up to 10**6 come from a cached sieve); larger
    inputs keep trial dividing with a 6k+-1 wheel and slow down accordingly.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    factors: list[tuple[int, int]] = []
    m = n
    bound = math.isqrt(m)
    for p in primes_up_to(min(bound, FACTOR_TRIAL_BOUND)):
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
    if m > 1 and m > FACTOR_TRIAL_BOUND**2:
        f = FACTOR_TRIAL_BOUND - FACTOR_TRIAL_BOUND % 6 + 5  # f = 5 (mod 6), f+2 = 1 (mod 6)
        while f * f <= m:
            for q in (f, f + 2):
                if m % q == 0:
                    e = 0
                    while m % q == 0:
                        m //= q
                        e += 1
                    factors.append((q, e))
            f += 6
    if m > 1:
        factors.append((m, 1))
    return Factorization(n=n, factors=tuple(factors))


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    f = factorize(n).factors
    return len(f) == 1 and f[0][1] == 1


def distinct_prime_factors(n: int) -> tuple[int, ...]:
    return factorize(n).primes


def is_rough(n: int, y: int, B: int = 1) -> bool:
    """True iff every prime factor ``p`` of ``n`` has ``p > y`` or ``p | B``."""
    if n < 1 or y < 1 or B < 1:
        raise ValueError("is_rough needs n, y, B >= 1")
    m = n
    for p in primes_up_to(min(y, math.isqrt(n) + 1)):
        p = int(p)
        if m % p == 0:
            if B % p:
                return False
            while m % p == 0:
                m //= p
    # what is left has no prime factor <= min(y, sqrt n), so it is 1, a prime, or
    # a product of primes all > y when y < sqrt(n)
    if m > 1 and m <= y and B % m:
        return False
    return True


class ArithmeticFunctions(NamedTuple):
    mu: int
    phi: int
    omega: int


def arithmetic_functions(n: int) -> ArithmeticFunctions:
    """Exact Moebius, Euler totient and number of distinct prime factors."""
    f = factorize(n)
    mu = 0 if any(e > 1 for _, e in f.factors) else (-1) ** len(f.factors)
    phi = 1
    for p, e in f.factors:
        phi *= (p - 1) * p ** (e - 1)
    return ArithmeticFunctions(mu=mu, phi=phi, omega=len(f.factors))


def mobius(n: int) -> int:
    return arithmetic_functions(n).mu


def totient(n: int) -> int:
    return arithmetic_functions(n).phi


def omega(n: int) -> int:
    return arithmetic_functions(n).omega


def prime_pi(n: int) -> int:
    """Number of primes ``<= n`` (small n only; uses the cached sieve)."""
    return int(primes_up_to(n).shape[0]) if n >= 2 else 0
