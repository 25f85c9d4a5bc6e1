import math

import numpy as np
import pytest

from oracles import naive_census, td_is_prime
from sipl.admissible import LinearSystem, TupleH
from sipl.census import (
    compare_to_poisson,
    equidistribution_defect,
    freiberg_floor,
    poisson_prediction,
    prime_density_check,
    progression_table,
    run_census,
)
from sipl.errors import DomainError, OutOfRangeError
from sipl.prime_engine import build_table, prime_pi
from sipl.sieve_bounds import freiberg_epsilon


def test_census_x10_by_hand():
    # n=2..10 with windows of length floor(log n): only [8, 10] misses every prime
    h = run_census(10, 1.0)
    assert h.counts == {0: 1, 1: 8}
    assert h.total == 9


def test_census_tiny_lambda_counts_primes():
    x = 10**5
    h = run_census(x, 1e-9)
    # every window is the single point n
    assert h.counts[1] == prime_pi(x)
    assert h.counts[0] == x - 1 - prime_pi(x)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [3, 100, 9_999, 10**5])
def test_census_matches_naive(x, lam):
    h = run_census(x, lam)
    expected = naive_census(x, lam)
    assert {m: c for m, c in h.counts.items() if c} == {m: c for m, c in expected.items() if c}
    assert sum(h.counts.values()) == h.total == x - 1


def test_census_with_supplied_table():
    table = build_table(2, 2000)
    assert run_census(1000, 1.0, table=table).counts == run_census(1000, 1.0).counts
    with pytest.raises(OutOfRangeError):
        run_census(10**4, 1.0, table=table)


def test_census_errors():
    with pytest.raises(DomainError):
        run_census(2, 1.0)
    with pytest.raises(DomainError):
        run_census(100, 0.0)


def test_mean_count_close_to_lambda():
    x = 10**6
    h = run_census(x, 1.0)
    mean = sum(m * c for m, c in h.counts.items()) / h.total
    assert abs(mean - 1.0) < 0.05


def test_poisson_prediction_values():
    assert poisson_prediction(1.0, 0) == pytest.approx(0.36787944117144233, rel=1e-14)
    assert poisson_prediction(2.0, 3) == pytest.approx(4 / 3 * math.exp(-2), rel=1e-14)
    assert abs(poisson_prediction(2.0, 3) - 0.180447) < 5e-7
    assert sum(poisson_prediction(1.5, m) for m in range(60)) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DomainError):
        poisson_prediction(0, 1)
    with pytest.raises(DomainError):
        poisson_prediction(1, -1)


def test_compare_to_poisson_report():
    h = run_census(10**5, 1.0)
    rep = compare_to_poisson(h)
    assert [r.m for r in rep.rows] == list(range(h.max_m + 1))
    for r in rep.rows:
        assert r.abs_dev == pytest.approx(abs(r.fraction - r.poisson))
    assert 0 <= rep.tv_distance <= 1
    tail = 1 - sum(r.poisson for r in rep.rows)
    assert rep.tv_distance == pytest.approx((sum(r.abs_dev for r in rep.rows) + tail) / 2)


def test_compare_to_poisson_smallest_x():
    h = run_census(3, 1.0)
    # n=2: [2,2]; n=3: [3,4]
    assert h.counts == {0: 0, 1: 2}
    rep = compare_to_poisson(h)
    assert rep.rows[1].fraction == 1.0


def test_prime_density_lhs_matches_loop():
    sys = LinearSystem(17, 1, TupleH.of([2, 6, 8]), 2 * 10**4)
    x = 2 * 10**4
    rows = prime_density_check(sys, x, progression_table(sys, x))
    for row in rows:
        count = sum(td_is_prime(17 * n + row.h) for n in range(x + 1, 2 * x + 1))
        assert row.count == count
        assert row.lhs == pytest.approx(16 / 17 * count)
        assert row.rhs == pytest.approx(x / (2 * math.log(x)))
        assert row.passed == (row.lhs > row.rhs)
        assert not row.degenerate


def test_prime_density_degenerate_offset():
    sys = LinearSystem(7, 1, TupleH.of([7, 9]), 1000)
    rows = prime_density_check(sys, 1000, progression_table(sys, 1000))
    assert rows[0].degenerate and rows[0].count == 0
    assert not rows[0].passed


def test_density_table_must_cover():
    sys = LinearSystem(17, 1, TupleH.of([2, 6]), 1000)
    with pytest.raises(OutOfRangeError):
        prime_density_check(sys, 1000, build_table(2, 100))


def test_defect_trivial_modulus_is_zero():
    sys = LinearSystem(13, 1, TupleH.of([2]), 10**4)
    table = progression_table(sys, 10**4)
    (rep,) = equidistribution_defect(sys, 10**4, 1, table)
    assert rep.defect == 0
    assert rep.flagged_q == []


def test_defect_routes_agree_and_naive():
    x, g = 10**5, 13
    sys = LinearSystem(g, 1, TupleH.of([2, 6]), x)
    table = progression_table(sys, x)
    direct = equidistribution_defect(sys, x, 6, table)
    binned = equidistribution_defect(sys, x, 6, table, route="bincount")
    assert [r.defect_exact for r in direct] == [r.defect_exact for r in binned]
    rep = direct[0]
    hits = [n for n in range(x + 1, 2 * x + 1) if table.is_prime(g * n + 2)]
    assert rep.main_term == len(hits)
    total = 0
    for q in range(1, 7):
        phi_gq = sum(1 for a in range(1, g * q + 1) if math.gcd(a, g * q) == 1)
        expected = 12 * len(hits) / phi_gq
        worst = max(
            abs(sum(1 for n in hits if n % q == a) - expected)
            for a in range(q)
            if math.gcd(g * a + 2, q) == 1
        )
        total += worst
    assert rep.defect == pytest.approx(total, rel=1e-12)


def test_defect_worked_value():
    sys = LinearSystem(13, 1, TupleH.of([2]), 10**5)
    (rep,) = equidistribution_defect(sys, 10**5, 4, progression_table(sys, 10**5))
    assert rep.main_term == 7508
    assert rep.defect == 41


def test_defect_flags_moduli_sharing_g():
    sys = LinearSystem(5, 1, TupleH.of([2]), 2000)
    (rep,) = equidistribution_defect(sys, 2000, 12, progression_table(sys, 2000))
    assert rep.flagged_q == [5, 10]
    with pytest.raises(DomainError):
        equidistribution_defect(sys, 2000, 0, progression_table(sys, 2000))


def test_freiberg_floor():
    x = 10**100
    assert freiberg_floor(x) == pytest.approx((1 - freiberg_epsilon(x)) * 100 * math.log(10))
    assert np.isfinite(freiberg_floor(10**10000))
