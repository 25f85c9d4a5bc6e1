"""Admissible offset tuples, the greedy residue sieve, and the choice of multiplier g."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InsufficientSurvivorsError, NoCandidateError
from .prime_engine import is_prime, primes_up_to


@dataclass(frozen=True)
class TupleH:
    """Sorted distinct offsets ``0 < h_1 < ... < h_k < window``."""

    offsets: tuple[int, ...]
    window: int

    def __post_init__(self):
        offs = tuple(int(h) for h in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if not offs:
            raise ValueError("a tuple needs at least one offset")
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError(f"offsets must be strictly increasing: {offs}")
        if offs[0] <= 0 or offs[-1] >= self.window:
            raise ValueError(f"offsets must lie in (0, {self.window}): {offs}")

    @classmethod
    def of(cls, offsets: Iterable[int], window: int | None = None) -> "TupleH":
        offs = tuple(sorted(int(h) for h in offsets))
        return cls(offs, window if window is not None else (offs[-1] + 1 if offs else 1))

    @property
    def k(self) -> int:
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class LinearSystem:
    """The forms ``g*n + h_i`` together with the exceptional modulus ``B``."""

    g: int
    B: int
    tuple: TupleH
    x_scale: int

    def check(self) -> list[str]:
        """Names of violated invariants (empty when the system is well formed)."""
        problems = []
        if not is_squarefree(self.g):
            problems.append("g not squarefree")
        if math.gcd(self.g, self.B) != 1:
            problems.append("gcd(g, B) != 1")
        log_x = math.log(self.x_scale)
        if not (log_x < self.g <= 2 * log_x):
            problems.append("g outside (log x, 2 log x]")
        return problems


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    for p in primes_up_to(math.isqrt(n)):
        p = int(p)
        if n % (p * p) == 0:
            return False
    return True


def _offsets(t) -> tuple[int, ...]:
    return t.offsets if isinstance(t, TupleH) else tuple(t)


def is_admissible(t: TupleH | Sequence[int]) -> bool:
    """No prime ``p <= k`` sees every residue class occupied by the offsets."""
    offs = _offsets(t)
    k = len(offs)
    for p in primes_up_to(k):
        p = int(p)
        if len({h % p for h in offs}) == p:
            return False
    return True


def greedy_survivors(W: int, k: int) -> list[int]:
    """Greedy residue sieve of ``[1, W-1]`` over the primes ``p <= k``.

    For each prime in increasing order the least populated residue class is
    removed; ties go to the smallest residue.
    """
    if W < 2 or k < 1:
        raise ValueError("greedy_survivors needs W >= 2 and k >= 1")
    survivors = list(range(1, W))
    for p in primes_up_to(k):
        p = int(p)
        sizes = [0] * p
        for h in survivors:
            sizes[h % p] += 1
        drop = min(range(p), key=lambda r: (sizes[r], r))
        survivors = [h for h in survivors if h % p != drop]
    return survivors


def survivor_bound(W: int, k: int) -> Fraction:
    """``W * prod_{p <= k} (1 - 1/p)`` exactly."""
    out = Fraction(W)
    for p in primes_up_to(k):
        out *= Fraction(int(p) - 1, int(p))
    return out


def choose_g(x: int, B: int = 1) -> int:
    """Smallest prime ``g`` with ``log x < g <= 2 log x`` and ``g != B``."""
    if x < 8:
        raise NoCandidateError(f"x={x} is too small to choose g (need x >= 8)")
    log_x = math.log(x)
    g = math.floor(log_x) + 1
    while g <= 2 * log_x:
        if g != B and is_prime(g):
            return g
        g += 1
    raise NoCandidateError(f"no prime other than B={B} in ({log_x:.4f}, {2 * log_x:.4f}]")


@dataclass(frozen=True)
class TupleCount:
    binomial: int
    power_bound: Fraction


def tuple_count_bound(survivor_count: int, k: int) -> TupleCount:
    """Admissible ``k``-subsets of a greedy survivor set, and the ``k^-k (s-k)^k`` floor."""
    if survivor_count < k:
        raise InsufficientSurvivorsError(f"{survivor_count} survivors cannot host a {k}-tuple")
    return TupleCount(
        binomial=math.comb(survivor_count, k),
        power_bound=Fraction(survivor_count - k, 1) ** k / Fraction(k) ** k,
    )


def greedy_tuple(W: int, k: int) -> TupleH | None:
    """The first ``k`` greedy survivors of ``[1, W-1]`` as a tuple, or None if too few survive."""
    if W < 2:
        return None
    s = greedy_survivors(W, k)
    if len(s) < k:
        return None
    return TupleH(tuple(s[:k]), W)
