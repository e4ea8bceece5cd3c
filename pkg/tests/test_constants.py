from __future__ import annotations

import math
from fractions import Fraction

import mpmath
from mpmath.libmp import to_rational
import pytest
from hypothesis import given, settings, strategies as st

from boundedgaps.constants import (
    ZhangParams,
    c_k,
    delta_lower_ok,
    delta_upper_ok,
    level_condition,
    level_exponent_margin,
    loss_term,
    pipeline,
    search_min_k,
    search_min_square_k,
)
from boundedgaps.errors import InvalidArgument, NotFound
from boundedgaps.interval import Interval, exp_interval, sqrt_interval

K = 175561
S = 4494
DELTA = Fraction(1, 418)

iv = mpmath.iv


def iv_frac(q: Fraction):
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def oracle_lower_margin(delta: Fraction, k: int, s: int):
    iv.prec = 200
    rhs = 1 / iv.sqrt(iv.mpf(k)) + iv.mpf(1) / k + (1 + 2 * iv_frac(delta)) * s * iv.exp(-iv.mpf(k) / s)
    return iv_frac(delta) - rhs


def oracle_c_k(theta: Fraction, s: int, k: int):
    iv.prec = 200
    loss = 2 * s * iv.exp(-iv.mpf(k) / s)
    den = 1 + 2 / iv.sqrt(iv.mpf(k)) + iv.mpf(2) / k
    return 2 * iv_frac(theta) * (1 - loss) / den - 1


def overlaps(ours: Interval, theirs) -> bool:
    lo, hi = (Fraction(*to_rational(end)) for end in theirs._mpi_)
    return ours.lo <= hi and lo <= ours.hi


@pytest.mark.parametrize("x", [Fraction(0), Fraction(-39), Fraction(1, 3), Fraction(-175561, 4494),
                               Fraction(7, 2), Fraction(-1000)])
def test_exp_interval_encloses(x):
    e = exp_interval(x)
    mpmath.mp.dps = 80
    true = mpmath.exp(mpmath.mpf(x.numerator) / x.denominator)
    assert e.lo <= Fraction(str(true)) * (1 + Fraction(1, 10**60)) or e.lo == 0
    assert Fraction(str(true)) * (1 - Fraction(1, 10**60)) <= e.hi
    if x > -100:
        assert e.width <= abs(e.hi) * Fraction(1, 10**40)


@pytest.mark.parametrize("n", [2, 10, 175561, 175560, 10**12 + 39])
def test_sqrt_interval(n):
    r = sqrt_interval(n)
    assert r.lo * r.lo <= n <= r.hi * r.hi
    assert r.width < Fraction(1, 10**40)


def test_sqrt_of_square_exact():
    assert sqrt_interval(175561) == Interval.exact(419)


def test_interval_arithmetic_rules():
    a = Interval(Fraction(-1), Fraction(2))
    b = Interval(Fraction(3), Fraction(4))
    assert (a * b) == Interval(Fraction(-4), Fraction(8))
    assert (a - b) == Interval(Fraction(-5), Fraction(-1))
    assert (1 / b) == Interval(Fraction(1, 4), Fraction(1, 3))
    with pytest.raises(Exception):
        a.reciprocal()
    with pytest.raises(InvalidArgument):
        Interval(Fraction(2), Fraction(1))


def test_c_k_default_positive_and_against_oracle():
    theta = Fraction(105, 209)
    ours = c_k(theta, S, K)
    assert ours.lo > 0
    oracle = oracle_c_k(theta, S, K)
    assert overlaps(ours, oracle)
    assert ours.lo == pytest.approx(2.71e-8, rel=0.01)


def test_c_k_half_negative():
    for k, s in [(10, 2), (1000, 50), (K, S)]:
        assert c_k(Fraction(1, 2), s, k).hi < 0


def test_c_k_validation():
    with pytest.raises(InvalidArgument):
        c_k(Fraction(1, 2), 0.5, 10)


def test_loss_term_default():
    loss = loss_term(K, S)
    assert loss.hi < Fraction(1, 10**13)
    assert float(loss.hi) == pytest.approx(9.72e-14, rel=0.01)


def test_delta_upper_examples():
    up = delta_upper_ok(DELTA, S)
    assert up.ok and float(up.margin.lo) == pytest.approx(0.004486, rel=1e-3)
    assert up.margin.lo == Fraction(1, 144) * (1 - Fraction(43, S)) - DELTA
    for s in (50, 4494, 10**9):
        assert not delta_upper_ok(Fraction(1, 144), s)
    flagged = delta_upper_ok(Fraction(1, 10**6), 43)
    assert not flagged.ok and flagged.flagged


def test_delta_lower_default_margin():
    low = delta_lower_ok(DELTA, K, S)
    assert low.ok
    oracle = oracle_lower_margin(DELTA, K, S)
    assert overlaps(low.margin, oracle)
    exact_part = Fraction(1, 418) - Fraction(1, 419) - Fraction(1, K)
    assert low.margin.hi < exact_part
    assert float(exact_part - low.margin.lo) < 1e-12
    assert float(low.margin.lo) == pytest.approx(1.3627e-8, rel=1e-3)


def test_delta_lower_failures():
    assert not delta_lower_ok(Fraction(1, 419), K, S)
    assert not delta_lower_ok(DELTA, K - 2, S)


def test_delta_lower_eventually_true():
    assert delta_lower_ok(Fraction(1, 10), 10**6, 20).ok
    with pytest.raises(InvalidArgument):
        delta_lower_ok(DELTA, 0, S)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10**7), st.integers(2, 5000), st.fractions(Fraction(1, 1000), Fraction(1, 3)))
def test_delta_lower_margin_against_mpmath(k, s, delta):
    ours = delta_lower_ok(delta, k, s).margin
    assert overlaps(ours, oracle_lower_margin(delta, k, s))


def test_level_condition_examples():
    N = 1e6
    got = level_condition(2.0, N**0.5, N, Fraction(1, 100))
    lhs = 86 / 207 * math.log(2) + 0.5 * math.log(N)
    rhs = (104 / 207 - 0.01) * math.log(N)
    assert got == (lhs <= rhs)
    edge = N ** (104 / 207 - 0.01) * (1 - 1e-9)
    assert level_condition(1.0 + 1e-12, edge, N, Fraction(1, 100))
    assert not level_condition(1e12, 1e6, 1e12, Fraction(1, 10**6))
    with pytest.raises(InvalidArgument):
        level_condition(1.0, 2.0, 3.0, Fraction(0))


def test_level_exponent_slack():
    slack = level_exponent_margin(DELTA, S)
    assert slack < 0
    assert float(slack) == pytest.approx(-1.08e-7, rel=0.01)
    assert level_exponent_margin(Fraction(1, 1000), S) > 0


def test_search_min_k_default():
    k = search_min_k(DELTA, S)
    assert k == 175560 <= K
    assert delta_lower_ok(DELTA, k, S) and not delta_lower_ok(DELTA, k - 1, S)
    assert search_min_square_k(DELTA, S) == K


def test_search_small():
    k = search_min_k(Fraction(1, 2), 10)
    assert k == 42
    scan = next(j for j in range(1, 200) if delta_lower_ok(Fraction(1, 2), j, 10))
    assert scan == k


def test_search_not_found():
    with pytest.raises(NotFound):
        search_min_k(Fraction(0), 10)
    with pytest.raises(NotFound):
        search_min_k(Fraction(-1, 3), 10)


def test_c_k_monotone():
    s = 50
    thetas = [Fraction(1, 2) + Fraction(j, 200) for j in range(1, 8)]
    vals = [c_k(t, s, 5000).mid for t in thetas]
    assert vals == sorted(vals)
    ks = [200, 500, 1000, 5000, 20000, 10**5]
    vals = [c_k(Fraction(26, 50), s, k).mid for k in ks]
    assert vals == sorted(vals)


def test_pipeline_default():
    rows = {r.name: r for r in pipeline()}
    for name in ("delta_upper", "delta_lower", "c_k_positive", "loss_below_1e-13"):
        assert rows[name].ok
    assert not rows["level_exponent"].ok and rows["level_exponent"].note == "informational"


def test_params_validation():
    p = ZhangParams.default()
    assert p.k == K and p.l == 209 and p.theta == Fraction(105, 209)
    with pytest.raises(InvalidArgument):
        ZhangParams(k=K, l=1, s=Fraction(S), theta=Fraction(1, 2), delta=DELTA, eps=Fraction(0))
