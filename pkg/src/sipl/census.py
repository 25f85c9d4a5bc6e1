"""Census of short intervals by prime count, Poisson comparison, and progression checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .admissible import LinearSystem
from .errors import DomainError, OutOfRangeError
from .prime_engine import PrimeTable, build_table, totient
from .sieve_bounds import freiberg_epsilon, iterated_logs
from .windows import length_thresholds, window_length


@dataclass
class CensusHistogram:
    x: int
    lam: float
    counts: dict[int, int]
    total: int

    @property
    def max_m(self) -> int:
        return max((m for m, c in self.counts.items() if c), default=0)

    def fraction(self, m: int) -> float:
        return self.counts.get(m, 0) / self.total if self.total else 0.0


def census_table(x: int, lam: float) -> PrimeTable:
    return build_table(2, x + window_length(x, lam))


def run_census(x: int, lam: float, table: PrimeTable | None = None) -> CensusHistogram:
    """Histogram of ``|[n, n + floor(lam log n)] ∩ P|`` over ``2 <= n <= x``."""
    if x < 3:
        raise DomainError("run_census needs x >= 3")
    if lam <= 0:
        raise DomainError("lambda must be positive")
    hi = x + window_length(x, lam)
    if table is None:
        table = census_table(x, lam)
    elif not table.covers(2, hi):
        raise OutOfRangeError(f"table must cover [2, {hi}]")
    thresholds = length_thresholds(lam, x)
    hist = kernels.census_hist(table.primes, 2, x, thresholds)
    top = int(np.flatnonzero(hist).max()) if hist.any() else 0
    counts = {m: int(hist[m]) for m in range(top + 1)}
    return CensusHistogram(x=x, lam=lam, counts=counts, total=x - 1)


def poisson_prediction(lam: float, m: int) -> float:
    """``lam^m e^-lam / m!``."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if m < 0:
        raise DomainError("m must be >= 0")
    return math.exp(m * math.log(lam) - lam - math.lgamma(m + 1))


@dataclass(frozen=True)
class PoissonRow:
    m: int
    count: int
    fraction: float
    poisson: float
    abs_dev: float
    rel_dev: float


@dataclass
class PoissonReport:
    rows: list[PoissonRow]
    tv_distance: float


def compare_to_poisson(h: CensusHistogram) -> PoissonReport:
    rows = []
    tv = 0.0
    covered = 0.0
    for m in range(h.max_m + 1):
        frac = h.fraction(m)
        pois = poisson_prediction(h.lam, m)
        covered += pois
        dev = abs(frac - pois)
        tv += dev
        rows.append(
            PoissonRow(
                m=m,
                count=h.counts.get(m, 0),
                fraction=frac,
                poisson=pois,
                abs_dev=dev,
                rel_dev=dev / pois if pois > 0 else math.inf,
            )
        )
    # the empirical law has no mass beyond max_m; the Poisson tail counts in full
    tv += max(0.0, 1.0 - covered)
    return PoissonReport(rows=rows, tv_distance=tv / 2)


# =============================================================================
# Primes along g*n + h, n in (x, 2x]
# =============================================================================


def _progression_hits(g: int, h: int, x: int, table: PrimeTable) -> np.ndarray:
    """The n in ``(x, 2x]`` with ``g n + h`` prime."""
    lo, hi = g * (x + 1) + h, 2 * g * x + h
    if not table.covers(lo, hi):
        raise OutOfRangeError(f"table must cover [{lo}, {hi}] for g={g}, h={h}")
    ns = np.arange(x + 1, 2 * x + 1, dtype=np.int64)
    return ns[table.is_prime_array(g * ns + h)]


def progression_table(sys: LinearSystem, x: int) -> PrimeTable:
    offs = sys.tuple.offsets
    return build_table(sys.g * (x + 1) + offs[0], 2 * sys.g * x + offs[-1])


@dataclass(frozen=True)
class DensityRow:
    h: int
    count: int
    lhs: float
    lhs_exact: Fraction
    rhs: float
    passed: bool
    degenerate: bool


def prime_density_check(sys: LinearSystem, x: int, table: PrimeTable) -> list[DensityRow]:
    """``(phi(B)/B)(phi(g)/g) #{x < n <= 2x : g n + h prime}`` against ``x / (2 log x)``, per offset."""
    g, B = sys.g, sys.B
    weight = Fraction(totient(B), B) * Fraction(totient(g), g)
    rhs = x / (2 * math.log(x))
    rows = []
    for h in sys.tuple:
        count = int(_progression_hits(g, h, x, table).size)
        lhs = weight * count
        rows.append(
            DensityRow(
                h=h,
                count=count,
                lhs=float(lhs),
                lhs_exact=lhs,
                rhs=rhs,
                passed=float(lhs) > rhs,
                degenerate=math.gcd(g, h) > 1,
            )
        )
    return rows


@dataclass
class DefectReport:
    h: int
    defect: float
    defect_exact: Fraction
    main_term: int
    Q: int
    flagged_q: list[int] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.defect / self.main_term if self.main_term else math.nan


def _defect_one(g, h, B, Q, hits, route):
    main = int(hits.size)
    phi_g = totient(g)
    total = Fraction(0)
    flagged = []
    for q in range(1, Q + 1):
        if math.gcd(q, B) != 1:
            continue
        if q > 1 and math.gcd(q, g) > 1:
            flagged.append(q)
        expected = Fraction(phi_g * main, totient(g * q))
        if route == "bincount":
            per_class = np.bincount(hits % q, minlength=q)
        worst = Fraction(0)
        for a in range(q):
            if math.gcd(g * a + h, q) != 1:
                continue
            if route == "bincount":
                c = int(per_class[a])
            else:
                c = int(np.count_nonzero(hits % q == a))
            worst = max(worst, abs(c - expected))
        total += worst
    return total, main, flagged


def equidistribution_defect(
    sys: LinearSystem,
    x: int,
    Q: int,
    table: PrimeTable,
    *,
    route: str = "direct",
) -> list[DefectReport]:
    """Level-of-distribution defect for each form ``g n + h_i``, moduli ``q <= Q``.

    Moduli sharing a factor with g are processed as written and listed in
    ``flagged_q``.
    """
    if Q < 1:
        raise DomainError("Q must be >= 1")
    if route not in {"direct", "bincount"}:
        raise ValueError(f"unknown route {route!r}")
    reports = []
    for h in sys.tuple:
        hits = _progression_hits(sys.g, h, x, table)
        total, main, flagged = _defect_one(sys.g, h, sys.B, Q, hits, route)
        reports.append(DefectReport(h=h, defect=float(total), defect_exact=total, main_term=main, Q=Q, flagged_q=flagged))
    return reports


def freiberg_floor(x) -> float:
    """``(1 - eps(x)) log x``, the log of ``x^(1 - eps(x))``."""
    log_x = iterated_logs(x)[0]
    return (1 - freiberg_epsilon(x)) * log_x
