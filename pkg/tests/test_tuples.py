from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundedgaps.arith import factorize, primes_up_to, sieve_primes
from boundedgaps.errors import InvalidArgument, TableTooSmall
from boundedgaps.tuples import (
    AdmissibleTuple,
    build_consecutive_prime_tuple,
    det_H,
    delta_primes,
    is_admissible,
    omega,
    singular_series_partials,
    tuple_constants,
)

H026 = AdmissibleTuple.of([0, 2, 6])


def roots_mod(H: AdmissibleTuple, d: int) -> int:
    return sum(1 for x in range(d) if math.prod(x - h for h in H.elements) % d == 0)


def admissible_brute(H: AdmissibleTuple) -> bool:
    return all(len({h % p for h in H.elements}) < p for p in primes_up_to(max(H.k, 2)) if p <= H.k)


def test_omega_examples():
    assert omega(AdmissibleTuple.of([0]), 7) == 1
    assert omega(H026, 5) == 3
    assert omega(H026, 15) == 6
    with pytest.raises(InvalidArgument):
        omega(H026, 12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 200), min_size=1, max_size=8, unique=True),
       st.sampled_from([2, 3, 5, 6, 7, 10, 11, 13, 15, 21, 30, 35, 42, 105]))
def test_omega_matches_root_count(values, d):
    H = AdmissibleTuple.of(values)
    assert omega(H, d) == roots_mod(H, d)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=1, max_size=6, unique=True),
       st.sampled_from([(2, 3), (3, 5), (5, 7), (6, 35), (10, 21), (7, 11)]))
def test_omega_multiplicative(values, pair):
    H = AdmissibleTuple.of(values)
    d1, d2 = pair
    assert omega(H, d1 * d2) == omega(H, d1) * omega(H, d2)


def test_admissibility_examples():
    assert is_admissible(H026)
    assert not is_admissible(AdmissibleTuple.of([0, 2, 4]))
    assert is_admissible(AdmissibleTuple.of([0]))


def test_tuple_validation():
    with pytest.raises(InvalidArgument):
        AdmissibleTuple((3, 1))
    with pytest.raises(InvalidArgument):
        AdmissibleTuple(())


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(1, 400), min_size=1, max_size=12, unique=True))
def test_admissibility_matches_definition(values):
    H = AdmissibleTuple.of(values)
    assert is_admissible(H) == admissible_brute(H)


def test_admissibility_shortcut_on_large_tuples():
    rng = np.random.default_rng(5)
    table = sieve_primes(20_000)
    for k in (70, 90, 130):
        H = build_consecutive_prime_tuple(k, table)
        assert is_admissible(H) and admissible_brute(H)
        # A shift that covers every class mod 2 breaks admissibility.
        broken = AdmissibleTuple.of(list(H.elements[:-1]) + [H.elements[-1] + 1])
        assert not is_admissible(broken) and not admissible_brute(broken)
    for _ in range(40):
        els = (2 * rng.choice(np.arange(1, 1500), size=80, replace=False) + 1).tolist()
        H = AdmissibleTuple.of(els)
        assert is_admissible(H) == admissible_brute(H)


def test_consecutive_prime_tuple_small():
    t = sieve_primes(1000)
    H = build_consecutive_prime_tuple(5, t)
    assert H.elements == (7, 11, 13, 17, 19) and H.diameter == 12
    one = build_consecutive_prime_tuple(1, t)
    assert one.elements == (2,) and one.diameter == 0


def test_consecutive_prime_tuple_k175561(table):
    H = build_consecutive_prime_tuple(175561, table)
    assert (H.elements[0], H.elements[-1], H.diameter) == (175573, 2624371, 2448798)
    assert H.k == 175561


def test_consecutive_prime_tuple_table_too_small():
    with pytest.raises(TableTooSmall):
        build_consecutive_prime_tuple(500, sieve_primes(1000))


def test_consecutive_tuples_admissible_and_pi_identity():
    t = sieve_primes(5000)
    for k in range(1, 101):
        H = build_consecutive_prime_tuple(k, t)
        assert is_admissible(H)
        assert t.pi(H.elements[-1]) == k + t.pi(k)


def test_constants_pair():
    c = tuple_constants(AdmissibleTuple.of([0, 2]), 1000)
    assert c.delta == 2 and c.gamma_H == Fraction(1, 2)
    assert det_H(AdmissibleTuple.of([0, 2])) == 2


def test_constants_singleton():
    c = tuple_constants(AdmissibleTuple.of([0]), 10)
    assert c.delta == 1 and c.gamma_H == 1


def test_constants_reject_inadmissible():
    with pytest.raises(InvalidArgument):
        tuple_constants(AdmissibleTuple.of([0, 2, 4]), 100)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 60), min_size=2, max_size=8, unique=True))
def test_small_primes_divide_det(values):
    H = AdmissibleTuple.of(values)
    if not is_admissible(H):
        return
    d = det_H(H)
    assert all(d % p == 0 for p in primes_up_to(H.k) if p <= H.k)
    c = tuple_constants(H, max(H.k, 50))
    rad = set(factorize(d).primes) | {p for p in primes_up_to(H.k) if p <= H.k}
    assert set(c.delta_primes) == rad
    assert c.gamma_H == math.prod(Fraction(p - omega(H, p), p) for p in c.delta_primes)


def test_delta_primes_without_det():
    H = AdmissibleTuple.of([0, 4, 6, 10, 12, 16])
    assert set(delta_primes(H)) == set(factorize(det_H(H)).primes) | {2, 3, 5}


def test_singular_series_partials_decrease_then_converge():
    primes, partials = singular_series_partials(H026, 10_000)
    tail = partials[primes > 6]
    # Factors (1 - 3/p)(1 - 1/p)^-3 are below 1 for p > 3, so the products fall.
    assert np.all(np.diff(tail) < 0)
    ca = tuple_constants(H026, 1000)
    b = tuple_constants(H026, 10_000).singular_series
    assert abs(ca.singular_series - b) <= ca.singular_series * ca.truncation_bound
    assert b > 0


def test_truncation_bound_reported():
    c = tuple_constants(H026, 1000)
    assert c.truncation_bound == pytest.approx(9 / 1000)
