"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``Cn PASS|FAIL ...`` line past pytest's capture so
the summary is visible without ``-s``. Run alone with::

    pytest tests/test_acceptance.py -v
"""
import math
import random
import time
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from oracles import naive_census, naive_root_count, naive_scan, td_prime_mask
from sipl.admissible import LinearSystem, TupleH, choose_g, greedy_survivors, greedy_tuple, is_admissible, is_squarefree
from sipl.census import prime_density_check, progression_table, run_census
from sipl.prime_engine import arithmetic_functions, build_table, prime_pi, primes_up_to
from sipl.sieve_bounds import (
    SieveParams,
    bound_evaluators,
    congruence_count,
    divisor_identity_check,
    freiberg_epsilon,
    root_count,
    selberg_error_sum,
    selberg_J,
)
from sipl.window_search import scan_good_n, scan_table, slide_to_exact_m
from sipl.windows import window_length

# independent 40-digit mpmath evaluations
LOG_I2_LOWER = -2.039562881076452583644
EPS_1E100 = 0.1639068207529224195250
EPS_1E100_STATED = 0.16397


@pytest.fixture
def report(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{name} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"{name}: {detail}"

    return emit


def test_c01_census_oracle(report):
    t0 = time.perf_counter()
    h = run_census(10**6, 1.0)
    elapsed = time.perf_counter() - t0
    expected = {m: c for m, c in naive_census(10**6, 1.0).items() if c}
    got = {m: c for m, c in h.counts.items() if c}
    report("C1", got == expected and elapsed < 60, f"census(1e6, 1.0)={got} oracle match={got == expected} {elapsed:.2f}s")


def test_c02_poisson_band(report):
    t0 = time.perf_counter()
    h = run_census(10**8, 1.0)
    elapsed = time.perf_counter() - t0
    targets = {0: math.exp(-1), 1: math.exp(-1), 2: math.exp(-1) / 2}
    devs = {m: abs(h.fraction(m) - v) for m, v in targets.items()}
    ok = all(d <= 0.08 for d in devs.values()) and elapsed < 600
    detail = " ".join(f"m={m}: {h.fraction(m):.4f} dev={d:.4f}" for m, d in devs.items())
    report("C2", ok, f"x=1e8 {detail} {elapsed:.1f}s")


def test_c03_divisor_identity(report):
    bad = [n for n in range(1, 10**4 + 1) if not divisor_identity_check(n)]
    report("C3", not bad, f"n<=1e4 failures={bad[:5]}")


def test_c04_rho(report):
    rng = random.Random(4)
    tuples = [(2, 6, 8), (1, 3, 7, 9, 13)] + [tuple(sorted(rng.sample(range(1, 400), rng.randint(1, 12)))) for _ in range(4)]
    failures = []
    for t in tuples:
        rho = {d: root_count(t, d) for d in range(1, 201)}
        for d in range(1, 201):
            if rho[d] != naive_root_count(t, d):
                failures.append(("enum", t, d))
        for a in range(1, 201):
            for b in range(a, 201):
                if math.gcd(a, b) == 1 and root_count(t, a * b) != rho[a] * rho[b]:
                    failures.append(("mult", t, a, b))
        for p in primes_up_to(2000):
            p = int(p)
            c = np.arange(p, dtype=np.int64)
            prod = np.ones(p, dtype=np.int64)
            for h in t:
                prod = prod * ((c - h) % p) % p
            roots = int(np.count_nonzero(prod == 0))
            distinct = len({h % p for h in t})
            if not (root_count(t, p) == roots == distinct):
                failures.append(("prime", t, p))
    report("C4", not failures, f"{len(tuples)} tuples, d<=200 pairs, p<=2000 failures={failures[:3]}")


def test_c05_selberg(report):
    failures = []
    checked = 0
    for g in range(1, 10**4 + 1):
        if not is_squarefree(g):
            continue
        f = arithmetic_functions(g)
        floor = Fraction(g, f.phi)
        for D in {g * g, g * g + 7 * g, 4 * g * g}:
            if selberg_J(g, D) < floor:
                failures.append(("J", g, D))
        for D in (1, g, g * g):
            if selberg_error_sum(g, D) > 4**f.omega:
                failures.append(("E", g, D))
        checked += 1
    report("C5", not failures, f"squarefree g<=1e4 checked={checked} failures={failures[:3]}")


def test_c06_congruence_count(report):
    rng = random.Random(6)
    W = 500
    worst = 0.0
    failures = []
    n_inst = 200
    for _ in range(n_inst):
        x = int(math.exp(rng.uniform(5, 60)))
        lx = math.log(x)
        cands = [int(p) for p in primes_up_to(int(2 * lx)) if p > lx]
        g = rng.choice(cands)
        k = rng.randint(1, 10)
        t = sorted(rng.sample(range(1, W + 1), k))
        d = rng.choice([q for q in range(1, math.isqrt(W) + 1) if math.gcd(q, g) == 1])
        c = rng.randint(1, d)
        got = congruence_count(c, d, g, t, W)
        bound = 10 * (1 - 1 / g) * W / d + k
        worst = max(worst, got / bound)
        if got > bound:
            failures.append((g, d, c, k))
    report("C6", not failures and n_inst >= 50, f"{n_inst} instances at W=500, worst count/bound={worst:.3f}")


def test_c07_step_lemma_and_slides(report):
    rng = random.Random(7)
    table = build_table(10**6, 2 * 10**6 + 100)
    worst_jump = -10
    for _ in range(10**4):
        n = rng.randint(10**6, 2 * 10**6)
        j_max = window_length(n, 1.0)
        counts = [table.count(n + j, n + j + window_length(n + j, 1.0)) for j in range(j_max + 1)]
        worst_jump = max([worst_jump] + [b - a for a, b in zip(counts, counts[1:])])

    x, lam, k, y = 10**6, 0.6, 3, 100
    params = SieveParams(k=k, m=0, x=x, lam=lam, y_override=y)
    sys_ = LinearSystem(choose_g(x), 1, greedy_tuple(params.tuple_window, k), x)
    stab = scan_table(sys_, params)
    windows = scan_good_n(sys_, params, 0, table=stab)
    slides = fails = 0
    for w in windows:
        for m in range(len(w.prime_offsets) + 1):
            slides += 1
            try:
                r = slide_to_exact_m(w.n, sys_, lam, m, stab)
                N = r.N_star
                if stab.count(N, N + window_length(N, lam)) != m:
                    fails += 1
            except Exception:
                fails += 1
    ok = worst_jump <= 1 and fails == 0 and slides > 0
    report(
        "C7",
        ok,
        f"max step over 1e4 traces={worst_jump}; tuple={sys_.tuple.offsets} windows={len(windows)} slides={slides} failures={fails}",
    )


@pytest.mark.parametrize("x", [10**4, 10**5])
def test_c08_scanner(x, report):
    lam, k, y = 0.19, 3, 7
    params = SieveParams(k=k, m=1, x=x, lam=lam, y_override=y)
    sys_ = LinearSystem(choose_g(x), 1, greedy_tuple(params.scan_width + 1, k), x)
    table = scan_table(sys_, params)
    agree = True
    n_windows = 0
    for m in range(k + 1):
        res = scan_good_n(sys_, params, m, table=table)
        expected = naive_scan(x, sys_.g, sys_.tuple.offsets, params.scan_width, y, 1, m)
        if [w.n for w in res] != expected:
            agree = False
        if m == 1:
            n_windows = len(res)
            offsets_ok = all(
                {int(p) - w.start for p in table.primes_between(w.start, w.end)} <= set(sys_.tuple.offsets) for w in res
            )
            disjoint = all(a.end < b.start for a, b in zip(res, res[1:]))
    ok = agree and offsets_ok and disjoint and n_windows > 0
    report(
        "C8",
        ok,
        f"x={x} g={sys_.g} tuple={sys_.tuple.offsets} W={params.scan_width} windows={n_windows} "
        f"oracle={agree} offsets_only={offsets_ok} disjoint={disjoint}",
    )


def test_c09_density(report):
    x = 10**6
    sys_ = LinearSystem(17, 1, TupleH.of([2, 6, 8]), x)
    rows = prime_density_check(sys_, x, progression_table(sys_, x))
    ok = all(r.passed for r in rows)
    report("C9", ok, " ".join(f"h={r.h}: {r.lhs:.1f} > {r.rhs:.1f}" for r in rows))


def test_c10_greedy(report):
    short = []
    for W in (10**2, 10**3, 10**4):
        for k in (2, 3, 5, 10, 30):
            s = greedy_survivors(W, k)
            prod = math.prod(Fraction(p - 1, p) for p in range(2, k + 1) if all(p % q for q in range(2, p)))
            need = math.floor((W - 1) * prod) - prime_pi(k)
            if len(s) < need:
                short.append((W, k, len(s), need))
    bad = []
    for W in range(2, 61):
        for k in range(1, 5):
            for combo in combinations(greedy_survivors(W, k), k):
                if not is_admissible(combo):
                    bad.append((W, k, combo))
    report("C10", not short and not bad, f"size shortfalls={short} non-admissible subsets={bad[:3]}")


def test_c11_bounds(report):
    rep = bound_evaluators(SieveParams(k=2, m=0, x=10**100))
    i2 = math.exp(rep.log_I_k_lower)
    target = (4 * math.log(2)) ** -2
    i2_ok = abs(i2 - target) <= 1e-12 * target and abs(rep.log_I_k_lower - LOG_I2_LOWER) <= 1e-12 * abs(LOG_I2_LOWER)
    eps = freiberg_epsilon(10**100)
    eps_ok = abs(eps - EPS_1E100) <= 5e-5
    report(
        "C11",
        i2_ok and eps_ok,
        f"I_2 lower={i2:.15g} (target {target:.15g}); eps(1e100)={eps:.10f} vs re-derived {EPS_1E100:.10f} "
        f"(stated {EPS_1E100_STATED}, off by {abs(eps - EPS_1E100_STATED):.2e})",
    )


def test_td_mask_sanity():
    # guards the oracle used by C1 and C8
    assert int(td_prime_mask(0, 10**4).sum()) == 1229
