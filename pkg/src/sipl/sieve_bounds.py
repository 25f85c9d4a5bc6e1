"""Exact divisor-sum arithmetic and closed-form bound evaluators.

Identity-bearing sums are computed with ``fractions.Fraction``; bound
evaluators work in log-space and report underflow/overflow explicitly
instead of returning a silent 0 or inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .admissible import LinearSystem, TupleH, is_admissible, is_squarefree
from .errors import DomainError, NonAdmissibleError
from .prime_engine import arithmetic_functions, factorize, primes_up_to

# log of the smallest positive normal double; exp() of anything below underflows
LOG_FLOAT_MIN = math.log(2.2250738585072014e-308)
LOG_FLOAT_MAX = math.log(1.7976931348623157e308)

# =============================================================================
# Parameters
# =============================================================================


@dataclass(frozen=True)
class SieveParams:
    """Parameter schedule. Unspecified absolute constants default to 1."""

    k: int
    m: int
    x: int
    lam: float | None = None
    c: float = 0.5
    c0: float = 1.0
    c_lambda: float = 1.0
    B: int = 1
    y_override: int | None = None
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 2:
            raise DomainError("SieveParams needs k >= 2 (rho and the lambda cap involve 1/log k)")
        if self.m < 0:
            raise DomainError("m must be >= 0")
        if self.x < 3:
            raise DomainError("x must be >= 3")
        if not 0 < self.c < 1:
            raise DomainError("c must lie in (0, 1)")
        if self.c0 <= 0 or self.c_lambda <= 0:
            raise DomainError("c0 and c_lambda must be positive")
        if self.lam is not None and self.lam <= 0:
            raise DomainError("lambda must be positive")
        if self.B < 1:
            raise DomainError("B must be >= 1")

    def const(self, name: str) -> float:
        return float(self.constants.get(name, 1.0))

    @property
    def eta(self) -> float:
        return self.c / (500 * self.k**2)

    @property
    def R_exponent(self) -> Fraction:
        return Fraction(1, 24)

    @property
    def log_R(self) -> float:
        return math.log(self.x) / 24

    @property
    def rho(self) -> float:
        return self.c0 / (self.k**3 * math.log(self.k))

    @property
    def lambda_cap(self) -> float:
        return self.c_lambda / (self.k**4 * math.log(self.k) ** 2)

    @property
    def lambda_(self) -> float:
        return self.lambda_cap if self.lam is None else float(self.lam)

    @property
    def rho_lower(self) -> float:
        lx = math.log(self.x)
        return self.k * math.log(lx) ** 2 / lx if lx > 1 else math.inf

    @property
    def proposition_valid(self) -> bool:
        return self.rho_lower <= self.rho <= 1 / 80

    @property
    def lambda_ok(self) -> bool:
        return self.lambda_ <= self.lambda_cap

    @property
    def y(self) -> int:
        """Smoothness cut ``floor(x^rho)`` unless overridden."""
        if self.y_override is not None:
            return int(self.y_override)
        return max(1, math.floor(math.exp(self.rho * math.log(self.x))))

    @property
    def scan_width(self) -> int:
        return math.floor(5 * self.lambda_ * math.log(self.x))

    @property
    def tuple_window(self) -> int:
        return math.floor(self.lambda_ * math.log(self.x))


# =============================================================================
# Delta_L and n / phi(n)
# =============================================================================


@dataclass(frozen=True)
class DeltaL:
    """``g^(k+1) * prod |h - h_i|`` kept in factored-friendly form."""

    g: int
    tuple: TupleH
    h: int

    @property
    def value(self) -> int:
        out = self.g ** (self.tuple.k + 1)
        for hi in self.tuple:
            out *= abs(self.h - hi)
        return out

    def distinct_primes(self) -> frozenset[int]:
        if self.h in self.tuple.offsets:
            return frozenset()
        ps = set(factorize(self.g).primes)
        for hi in self.tuple:
            ps.update(factorize(abs(self.h - hi)).primes)
        return frozenset(ps)


def _ratio_from_primes(primes: Iterable[int]) -> Fraction:
    out = Fraction(1)
    for p in primes:
        out *= Fraction(p, p - 1)
    return out


def delta_over_phi(n) -> Fraction:
    """``n / phi(n) = prod_{p | n} p/(p-1)`` exactly.

    ``n`` may be an int or a ``DeltaL`` (whose prime support is read off its
    small factors, so the huge product is never factored).
    """
    if isinstance(n, DeltaL):
        if n.h in n.tuple.offsets:
            raise DomainError("Delta_L vanishes when h is a tuple offset")
        return _ratio_from_primes(n.distinct_primes())
    n = int(n)
    if n < 1:
        raise DomainError("delta_over_phi needs n >= 1")
    return _ratio_from_primes(factorize(n).primes)


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorize(n).factors:
        out = [d * p**j for d in out for j in range(e + 1)]
    return sorted(out)


def divisor_identity_check(n: int) -> bool:
    """Does ``sum_{d | n} mu(d)^2/phi(d)`` equal ``n/phi(n)``? (always; an oracle)."""
    if not 1 <= n <= 10**7:
        raise DomainError("divisor_identity_check needs 1 <= n <= 10**7")
    total = Fraction(0)
    for d in divisors(n):
        af = arithmetic_functions(d)
        if af.mu:
            total += Fraction(1, af.phi)
    return total == Fraction(n, arithmetic_functions(n).phi)


# =============================================================================
# Root counts
# =============================================================================


def _roots_mod(offsets: Sequence[int], d: int) -> int:
    hs = [h % d for h in offsets]
    count = 0
    for c in range(d):
        prod = 1
        for h in hs:
            prod = prod * (c - h) % d
            if prod == 0:
                break
        if prod == 0:
            count += 1
    return count


def root_count(t: TupleH | Sequence[int], d: int) -> int:
    """Number of residues ``c mod d`` with ``prod (c - h_i) = 0 (mod d)``.

    Computed prime power by prime power and multiplied (CRT).
    """
    if d < 1:
        raise DomainError("root_count needs d >= 1")
    offsets = t.offsets if isinstance(t, TupleH) else tuple(t)
    out = 1
    for p, e in factorize(d).factors:
        if e == 1:
            out *= len({h % p for h in offsets})
        else:
            out *= _roots_mod(offsets, p**e)
    return out


# =============================================================================
# Divisor-weighted sums over window offsets
# =============================================================================


@dataclass(frozen=True)
class Lemma31Result:
    value: Fraction
    terms: int
    ratio: float  # value / (W log k)


def _lemma31_terms(g: int, offsets: tuple[int, ...], W: int):
    taken = set(offsets)
    for h in range(1, W + 1):
        if h in taken or math.gcd(h, g) != 1:
            continue
        yield h


def lemma31_sum(sys: LinearSystem, W: int) -> Lemma31Result:
    """``sum_{h <= W, (h,g)=1, h not in H} Delta_L / phi(Delta_L)``, exact."""
    if W < 2:
        raise DomainError("lemma31_sum needs W >= 2")
    g, t = sys.g, sys.tuple
    g_primes = set(factorize(g).primes)
    total = Fraction(0)
    n_terms = 0
    for h in _lemma31_terms(g, t.offsets, W):
        ps = set(g_primes)
        for hi in t:
            ps.update(factorize(abs(h - hi)).primes)
        total += _ratio_from_primes(sorted(ps))
        n_terms += 1
    k = t.k
    ratio = float(total) / (W * math.log(k)) if k >= 2 else math.inf
    return Lemma31Result(value=total, terms=n_terms, ratio=ratio)


def lemma31_sum_divisor_route(sys: LinearSystem, W: int) -> Fraction:
    """Same sum via ``(g/phi(g)) * sum_{d | Delta, (d,g)=1} mu^2(d)/phi(d)``.

    Enumerates the squarefree divisors explicitly; exponential in the number
    of distinct primes of Delta, so only for small instances.
    """
    g, t = sys.g, sys.tuple
    prefactor = Fraction(g, arithmetic_functions(g).phi)
    total = Fraction(0)
    for h in _lemma31_terms(g, t.offsets, W):
        delta = DeltaL(g, t, h)
        support = sorted(p for p in delta.distinct_primes() if g % p)
        inner = Fraction(0)
        for r in range(len(support) + 1):
            for combo in combinations(support, r):
                d = math.prod(combo)
                af = arithmetic_functions(d)
                inner += Fraction(af.mu**2, af.phi)
        total += prefactor * inner
    return total


def mertens_rho_product(t: TupleH, limit: float) -> float:
    """``prod_{p <= limit} (1 + rho(p) / (p (p - 1)))``."""
    out = 1.0
    for p in primes_up_to(int(limit)):
        p = int(p)
        out *= 1 + root_count(t, p) / (p * (p - 1))
    return out


def congruence_count(c: int, d: int, g: int, t: TupleH | Sequence[int], W: int) -> int:
    """``#{h <= W : h not in H, (h, g) = 1, h = c (mod d)}``."""
    if not 1 <= c <= d:
        raise DomainError("congruence_count needs 1 <= c <= d")
    if math.gcd(d, g) != 1:
        raise DomainError("congruence_count needs gcd(d, g) = 1")
    taken = set(t.offsets if isinstance(t, TupleH) else t)
    start = c % d or d
    return sum(1 for h in range(start, W + 1, d) if h not in taken and math.gcd(h, g) == 1)


def _squarefree_divisors_of(g: int) -> list[tuple[int, int]]:
    """(e, omega(e)) for every divisor e of squarefree g."""
    primes = factorize(g).primes
    out = []
    for r in range(len(primes) + 1):
        for combo in combinations(primes, r):
            out.append((math.prod(combo), r))
    return out


def _require_squarefree(g: int) -> None:
    if not is_squarefree(g):
        raise DomainError(f"g={g} must be squarefree")


def selberg_J(g: int, D: int) -> Fraction:
    """``sum_{e <= sqrt D, p | e => p | g} mu^2(e)/phi(e)``."""
    _require_squarefree(g)
    if D < 1:
        raise DomainError("D must be >= 1")
    total = Fraction(0)
    for e, _ in _squarefree_divisors_of(g):
        if e * e <= D:
            total += Fraction(1, arithmetic_functions(e).phi)
    return total


def selberg_error_sum(g: int, D: int) -> int:
    """``sum_{e <= D, p | e => p | g} 3^omega(e) mu^2(e)``."""
    _require_squarefree(g)
    if D < 1:
        raise DomainError("D must be >= 1")
    return sum(3**w for e, w in _squarefree_divisors_of(g) if e <= D)


# =============================================================================
# Singular series
# =============================================================================


@dataclass(frozen=True)
class SingularSeries:
    value: float
    value_logsum: float
    factors: int


def singular_series(t: TupleH | Sequence[int], B: int = 1, p_limit: int | None = None) -> SingularSeries:
    """Truncated product ``prod_{p <= p_limit, p !| B} (1 - rho(p)/p) (1 - 1/p)^-k``.

    The standard Hardy-Littlewood form; returned both as a straight product
    and as ``exp(sum log)``.
    """
    offsets = t.offsets if isinstance(t, TupleH) else tuple(t)
    k = len(offsets)
    if p_limit is None:
        p_limit = max(k, 2)
    if p_limit < k:
        raise DomainError("p_limit must be >= k")
    if not is_admissible(offsets):
        raise NonAdmissibleError(f"{offsets} is not admissible; the singular series vanishes")
    direct = 1.0
    log_sum = 0.0
    n = 0
    for p in primes_up_to(p_limit):
        p = int(p)
        if B % p == 0:
            continue
        nu = len({h % p for h in offsets})
        f = (1 - nu / p) * (1 - 1 / p) ** (-k)
        direct *= f
        log_sum += math.log1p(-nu / p) - k * math.log1p(-1 / p)
        n += 1
    return SingularSeries(value=direct, value_logsum=math.exp(log_sum), factors=n)


# =============================================================================
# Closed-form bounds
# =============================================================================


def iterated_logs(x) -> tuple[float, float, float, float]:
    """``log x, log log x, log log log x, log log log log x``; DomainError once one is <= 0."""
    out = []
    v = x
    for _ in range(4):
        if v <= 0:
            raise DomainError(f"x={x} too small: an iterated logarithm is undefined")
        v = math.log(v)
        out.append(v)
    if out[3] <= 0:
        raise DomainError(f"x={x} too small: log log log log x <= 0 (need x > e^e^e ~ 3.81e6)")
    return out[0], out[1], out[2], out[3]


def freiberg_epsilon(x) -> float:
    """``(log log log log x)^2 / log log log x``; x may be an arbitrarily large int."""
    _, _, l3, l4 = iterated_logs(x)
    return l4 * l4 / l3


def _log_exp_term(log_value: float, name: str, flags: list[str]) -> float:
    if log_value < LOG_FLOAT_MIN:
        flags.append(f"{name}:underflow")
    elif log_value > LOG_FLOAT_MAX:
        flags.append(f"{name}:overflow")
    return log_value


def _safe_exp(v: float, name: str, flags: list[str]) -> float:
    if v > LOG_FLOAT_MAX:
        flags.append(f"{name}:overflow")
        return math.inf
    return math.exp(v)


@dataclass
class BoundReport:
    k: int
    m: int
    log_x: float
    log_I_k_lower: float
    log_J_k_lower: float
    epsilon: float
    log_freiberg_floor: float
    log_measure_floor: float  # log of x exp(-C7 k^5)
    log_exact_m_floor: float  # log of (X / log X) exp(-C7 k^5)
    envelope_exponent: float
    log_lambda_schedule: float
    lambda_schedule_ok: bool
    log_m_constant: float  # log of exp(-C8 exp(240 m))
    log_k_schedule_power: float
    log_k_schedule_linear: float
    eta: float
    rho: float
    lambda_cap: float
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def bound_evaluators(params: SieveParams, omega_prime: int = 0) -> BoundReport:
    """Evaluate every closed-form bound for ``params`` in log-space."""
    k, m = params.k, params.m
    flags: list[str] = []
    log_x, log2_x, _, _ = iterated_logs(params.x)
    eps = freiberg_epsilon(params.x)
    C, C7, C8 = params.const("C"), params.const("C7"), params.const("C8")

    log_I = -k * math.log(2 * k * math.log(k))
    log_J = math.log(math.log(k) / k) + log_I
    log_floor_313 = log_x - C7 * k**5
    log_floor_53 = log_x - log2_x - C7 * k**5
    for name, v in (("I_k", log_I), ("J_k", log_J), ("measure_floor", log_floor_313), ("exact_m_floor", log_floor_53)):
        _log_exp_term(v, name, flags)

    log_R = log_x / 24
    if log_R <= 1:
        flags.append("envelope:log_R<=1")
        envelope = math.nan
    else:
        envelope = 2 * k * math.log(log_R) + omega_prime * math.log(4)

    lam = params.lambda_
    if m == 0:
        log_sched = -math.inf
    else:
        log_sched = math.log(lam) + 2 * math.log(48 * m) + 192 * m
    sched_ok = log_sched <= 0

    inner = math.log(C8) + 240 * m
    log_m_const = -_safe_exp(inner, "m_constant", flags)
    if log_m_const < LOG_FLOAT_MIN:
        flags.append("m_constant:underflow")

    return BoundReport(
        k=k,
        m=m,
        log_x=log_x,
        log_I_k_lower=log_I,
        log_J_k_lower=log_J,
        epsilon=eps,
        log_freiberg_floor=(1 - eps) * log_x,
        log_measure_floor=log_floor_313,
        log_exact_m_floor=log_floor_53,
        envelope_exponent=envelope,
        log_lambda_schedule=log_sched,
        lambda_schedule_ok=sched_ok,
        log_m_constant=log_m_const,
        log_k_schedule_power=math.log(C) + float(m) ** 48,
        log_k_schedule_linear=48.0 * m,
        eta=params.eta,
        rho=params.rho,
        lambda_cap=params.lambda_cap,
        flags=flags,
    )
