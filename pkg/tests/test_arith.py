from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundedgaps.arith import (
    PrimeTable,
    crt_combine,
    divisors,
    euler_phi,
    factorize,
    is_z_smooth_squarefree,
    mobius,
    mod_inverse,
    multiplicative_suite,
    nth_prime,
    sieve_primes,
    smallest_prime_factors,
    squarefree_coprime_upto,
    tau_k,
    von_mangoldt,
)
from boundedgaps.errors import GcdFailure, InvalidArgument, TableTooSmall


def is_prime_trial(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def tau_brute(n: int, k: int) -> int:
    if k == 1:
        return 1
    return sum(tau_brute(n // d, k - 1) for d in range(1, n + 1) if n % d == 0)


def test_small_sieve():
    t = sieve_primes(10)
    assert t.primes.tolist() == [2, 3, 5, 7]
    assert t.pi(10) == 4


def test_sieve_rejects_tiny_limit():
    with pytest.raises(InvalidArgument):
        sieve_primes(1)


def test_pi_175561(table):
    assert table.pi(175561) == 15953


def test_sampled_primality_against_trial_division(table):
    rng = np.random.default_rng(1)
    sample = rng.integers(0, table.limit + 1, size=30_000)
    assert all(table.is_prime(int(n)) == is_prime_trial(int(n)) for n in sample)


def test_pi_on_sampled_prefixes(table):
    flags = [is_prime_trial(n) for n in range(60_001)]
    counts = np.cumsum(flags)
    rng = np.random.default_rng(2)
    for x in rng.integers(0, 60_001, size=40).tolist():
        assert table.pi(x) == int(counts[x])


def test_checkpoints_recomputable(table):
    assert table.verify_checkpoints()


def test_segmented_matches_plain_sieve():
    t = sieve_primes(700_001)
    plain = np.ones(700_002, dtype=bool)
    plain[:2] = False
    for p in range(2, 837):
        if plain[p]:
            plain[p * p :: p] = False
    assert np.array_equal(t.mask, plain)


@pytest.mark.parametrize("n,p", [(1, 2), (2, 3), (10, 29), (15954, 175573), (191514, 2624371)])
def test_nth_prime(table, n, p):
    assert nth_prime(n, table) == p


def test_nth_prime_out_of_range():
    with pytest.raises(TableTooSmall) as exc:
        nth_prime(100, sieve_primes(100))
    assert exc.value.required_limit >= 541


def test_is_prime_outside_table_raises():
    with pytest.raises(TableTooSmall):
        sieve_primes(100).is_prime(101)


def test_multiplicative_suite_examples():
    one = multiplicative_suite(1)
    assert (one.mobius, one.phi, one.is_squarefree, one.radical) == (1, 1, True, 1)
    ten = multiplicative_suite(10)
    assert (ten.mobius, ten.phi) == (1, 4)
    twelve = multiplicative_suite(12)
    assert (twelve.mobius, twelve.phi, twelve.is_squarefree, twelve.radical) == (0, 4, False, 6)


def test_tau_examples():
    assert tau_k(1, 3) == 1
    assert tau_k(12, 3) == 18
    assert tau_k(6, 2) == 4
    assert tau_k(97, 1) == 1


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_tau_against_enumeration(k):
    for n in list(range(1, 200)) + [720, 1024, 9240]:
        assert tau_k(n, k) == tau_brute(n, k)


def test_tau_ordered_triples_of_12():
    triples = [t for t in itertools.product(range(1, 13), repeat=3) if t[0] * t[1] * t[2] == 12]
    assert len(triples) == tau_k(12, 3)


def test_von_mangoldt():
    assert von_mangoldt(1) == 0.0
    assert von_mangoldt(8) == pytest.approx(math.log(2))
    assert von_mangoldt(12) == 0.0
    assert von_mangoldt(97) == pytest.approx(math.log(97))


def test_mobius_sum_over_divisors():
    spf = smallest_prime_factors(100_000)
    mu = np.zeros(100_001, dtype=np.int64)
    mu[1] = 1
    for n in range(2, 100_001):
        p = spf[n]
        m = n // p
        mu[n] = 0 if m % p == 0 else -mu[m]
    total = np.zeros(100_001, dtype=np.int64)
    for d in range(1, 100_001):
        if mu[d]:
            total[d::d] += mu[d]
    assert total[1] == 1 and not total[2:].any()
    assert all(mobius(n) == mu[n] for n in range(1, 3000))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_phi_multiplicative(a, b):
    if math.gcd(a, b) == 1:
        assert euler_phi(a * b) == euler_phi(a) * euler_phi(b)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**12))
def test_factorization_product(n):
    fac = factorize(n)
    assert math.prod(p**e for p, e in fac.factors) == n
    ps = [p for p, _ in fac.factors]
    assert ps == sorted(set(ps)) and all(is_prime_trial(p) for p in ps if p < 10**6)


def test_factorized_integer_validation():
    from boundedgaps.arith import FactoredInteger

    with pytest.raises(InvalidArgument):
        FactoredInteger(12, ((3, 1), (2, 2)))
    with pytest.raises(InvalidArgument):
        FactoredInteger(13, ((2, 2), (3, 1)))


def test_inverse_and_crt():
    assert mod_inverse(3, 7) == 5
    assert crt_combine([(2, 3), (3, 5)]) == (8, 15)
    with pytest.raises(GcdFailure) as exc:
        mod_inverse(4, 6)
    assert exc.value.gcd == 2
    with pytest.raises(GcdFailure):
        crt_combine([(1, 4), (1, 6)])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([2, 3, 5, 7, 11, 13, 17, 19, 23]), min_size=1, max_size=5,
                unique=True), st.data())
def test_crt_matches_components(moduli, data):
    pairs = [(data.draw(st.integers(0, q - 1)), q) for q in moduli]
    a, Q = crt_combine(pairs)
    assert Q == math.prod(moduli)
    assert all(a % q == r for r, q in pairs)


def test_smooth_squarefree():
    assert is_z_smooth_squarefree(1, 2)
    assert is_z_smooth_squarefree(30, 7)
    assert not is_z_smooth_squarefree(14, 7)
    assert not is_z_smooth_squarefree(12, 100)


def test_divisors_sorted():
    assert divisors(30) == [1, 2, 3, 5, 6, 10, 15, 30]


def test_squarefree_coprime_upto():
    got = squarefree_coprime_upto(40, excluded=(2, 3), prime_bound=12)
    assert [d for d, _ in got] == [1, 5, 7, 11, 35]
    assert dict(got)[35] == (5, 7)


def test_table_is_frozen(table):
    assert isinstance(table, PrimeTable)
    with pytest.raises(Exception):
        table.limit = 5
