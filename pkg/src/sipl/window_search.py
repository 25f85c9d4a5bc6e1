"""Scanner for windows whose primes sit only at tuple offsets, and the sliding walk to exactly m primes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .admissible import LinearSystem, is_admissible
from .errors import CertificationFailure, DuplicateStartError, ParameterInconsistencyError
from .prime_engine import PrimeTable, build_table, is_prime, is_rough, primes_up_to
from .sieve_bounds import SieveParams
from .windows import window_length

SCAN_CHUNK = 1 << 15


@dataclass(frozen=True)
class GoodWindow:
    n: int
    sys: LinearSystem
    W: int
    prime_offsets: tuple[int, ...]
    m_target: int

    @property
    def start(self) -> int:
        return self.sys.g * self.n

    @property
    def end(self) -> int:
        return self.start + self.W


@dataclass(frozen=True)
class SlideResult:
    start_n: int
    j_star: int
    N_star: int
    count: int
    trace: tuple[tuple[int, int], ...]


class ScanResult(list):
    """List of ``GoodWindow`` in ascending n, plus precondition flags."""

    def __init__(self, windows=(), flags=()):
        super().__init__(windows)
        self.flags = list(flags)


def _check_width(sys: LinearSystem, W: int) -> None:
    if W < sys.tuple.offsets[-1]:
        raise ParameterInconsistencyError(
            f"scan width W={W} is below the largest offset h_k={sys.tuple.offsets[-1]}"
        )


def _small_primes(y: int, B: int) -> np.ndarray:
    ps = primes_up_to(y)
    return ps[B % ps != 0] if B > 1 else ps


def _roles(sys: LinearSystem, W: int) -> np.ndarray:
    # 1: tuple offset (must be rough); 0: must carry a small prime; 2: ignored
    roles = np.full(W + 1, 2, dtype=np.int8)
    for h in range(1, W + 1):
        if math.gcd(h, sys.g) == 1:
            roles[h] = 0
    for h in sys.tuple:
        roles[h] = 1
    return roles


def disjointness_flags(sys: LinearSystem, params: SieveParams) -> list[str]:
    flags = []
    if params.lambda_ >= 0.2:
        flags.append("lambda>=1/5: windows are not guaranteed disjoint")
    if params.scan_width >= sys.g:
        flags.append(f"W={params.scan_width} >= g={sys.g}: consecutive windows overlap")
    return flags


def check_conditions(
    n: int, sys: LinearSystem, params: SieveParams, m: int
) -> tuple[bool, GoodWindow | None]:
    """Test the three conditions for a single n directly (no kernels)."""
    W = params.scan_width
    _check_width(sys, W)
    y, B, g = params.y, sys.B, sys.g
    base = g * n
    for h in sys.tuple:
        if not is_rough(base + h, y, B):
            return False, None
    offsets = set(sys.tuple.offsets)
    for h in range(1, W + 1):
        if h in offsets or math.gcd(h, g) > 1:
            continue
        if is_rough(base + h, y, B):
            return False, None
    prime_offsets = tuple(h for h in sys.tuple if is_prime(base + h))
    if len(prime_offsets) < m:
        return False, None
    return True, GoodWindow(n=n, sys=sys, W=W, prime_offsets=prime_offsets, m_target=m)


def scan_table(sys: LinearSystem, params: SieveParams) -> PrimeTable:
    """A table large enough for the scan over ``(x, 2x]`` and the sliding walks after it."""
    x, g, W = params.x, sys.g, params.scan_width
    return build_table(max(2, g * (x + 1)), 2 * g * x + 2 * W + 2)


def scan_good_n(
    sys: LinearSystem,
    params: SieveParams,
    m: int,
    table: PrimeTable | None = None,
) -> ScanResult:
    """Every n in ``(x, 2x]`` meeting the three conditions, ascending."""
    W = params.scan_width
    _check_width(sys, W)
    if not is_admissible(sys.tuple):
        raise ParameterInconsistencyError(f"tuple {sys.tuple.offsets} is not admissible")
    x, g = params.x, sys.g
    if table is None:
        table = scan_table(sys, params)
    roles = _roles(sys, W)
    small = _small_primes(params.y, sys.B)
    offsets = np.asarray(sys.tuple.offsets, dtype=np.int64)

    windows = []
    for lo in range(x + 1, 2 * x + 1, SCAN_CHUNK):
        hi = min(lo + SCAN_CHUNK - 1, 2 * x)
        ok = kernels.scan_structure(g, lo, hi, roles, small)
        cand = lo + np.flatnonzero(ok).astype(np.int64)
        if cand.size == 0:
            continue
        forms = g * cand[:, None] + offsets[None, :]
        prime = table.is_prime_array(forms.ravel()).reshape(forms.shape)
        counts = prime.sum(axis=1)
        for i in np.flatnonzero(counts >= m):
            windows.append(
                GoodWindow(
                    n=int(cand[i]),
                    sys=sys,
                    W=W,
                    prime_offsets=tuple(int(h) for h in offsets[prime[i]]),
                    m_target=m,
                )
            )
    return ScanResult(windows, disjointness_flags(sys, params))


def slide_to_exact_m(n: int, sys: LinearSystem, lam: float, m: int, table: PrimeTable) -> SlideResult:
    """Walk ``I_j = [g n + j, g n + j + floor(lam log(g n + j))]`` for ``j = 0..floor(lam log(g n))``.

    Returns the first j whose interval holds exactly m primes.
    """
    N0 = sys.g * n
    j_max = window_length(N0, lam)
    trace = []
    hit = None
    for j in range(j_max + 1):
        N = N0 + j
        c = table.count(N, N + window_length(N, lam))
        trace.append((j, c))
        if hit is None and c == m:
            hit = j
    if hit is None:
        raise CertificationFailure(
            f"no j in 0..{j_max} gives exactly {m} primes for n={n} (trace {trace})"
        )
    return SlideResult(start_n=n, j_star=hit, N_star=N0 + hit, count=m, trace=tuple(trace))


def exact_m_census_floor(results: list[SlideResult], x: int) -> int:
    """Number of distinct exact-m interval starts; each must be ``<= 5 x log x``."""
    seen: set[int] = set()
    bound = 5 * x * math.log(x)
    for r in results:
        if r.N_star in seen:
            raise DuplicateStartError(f"N*={r.N_star} produced twice; windows were not disjoint")
        if r.N_star > bound:
            raise CertificationFailure(f"N*={r.N_star} exceeds 5 x log x = {bound:.1f}")
        seen.add(r.N_star)
    return len(seen)
