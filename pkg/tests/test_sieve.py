from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from boundedgaps.arith import factorize, mobius, tau_k
from boundedgaps.errors import InvalidArgument
from boundedgaps.sieve import (
    G_sums,
    G_sums_diagonal,
    SieveConfig,
    SieveWeights,
    compute_Y,
    compute_Y_h,
    compute_lambda,
    compute_rho,
    gamma_kl,
    loss_bound,
    mu_kl,
    mu_lower_bound_holds,
    nice_l,
    ratio_target,
    restricted_loss_check,
    support,
)


def brute_support(config: SieveConfig) -> list[int]:
    out = []
    for d in range(1, math.ceil(config.sqrt_D)):
        if d >= config.sqrt_D or mobius(d) == 0 or math.gcd(d, config.delta) != 1:
            continue
        if all(p < config.z for p in factorize(d).primes):
            out.append(d)
    return out


def brute_h(d: int, k: int) -> float:
    return math.prod(k / (p - k) for p in factorize(d).primes)


def brute_rho(config: SieveConfig) -> dict[int, float]:
    k, l = config.k, config.l
    supp = brute_support(config)
    L = math.log(config.sqrt_D)
    Y = sum(brute_h(b, k) * (L - math.log(b)) ** l for b in supp)
    return {d: mobius(d) * d / (Y * tau_k(d, k))
            * sum(brute_h(b, k) * (L - math.log(b)) ** l for b in supp if b % d == 0)
            for d in supp}


def test_config_validation():
    with pytest.raises(InvalidArgument):
        SieveConfig(k=1, l=0, D=100.0)
    with pytest.raises(InvalidArgument):
        SieveConfig(k=3, l=0, D=100.0, delta=2)
    with pytest.raises(InvalidArgument):
        SieveConfig(k=3, l=0, D=100.0, delta=12)
    with pytest.raises(InvalidArgument):
        SieveConfig(k=3, l=0, D=0.5)
    c = SieveConfig.from_sqrt_D(3, 1, 100.0, s=2.0)
    assert c.delta == 6
    assert c.z == pytest.approx(c.D ** 0.25, rel=1e-12)


def test_Y_single_term():
    c = SieveConfig.from_sqrt_D(3, 2, 1.9)
    assert support(c) == [(1, ())]
    assert compute_Y(c) == pytest.approx(math.log(1.9) ** 2)


@pytest.mark.parametrize("k,l,root,s", [(3, 1, 100.0, 1.0), (2, 0, 300.0, 1.0), (4, 2, 500.0, 2.0)])
def test_Y_forms_against_direct_sum(k, l, root, s):
    c = SieveConfig.from_sqrt_D(k, l, root, s=s)
    L = math.log(root)
    oracle = math.fsum(brute_h(d, k) * (L - math.log(d)) ** l for d in brute_support(c))
    assert compute_Y(c) == pytest.approx(oracle, rel=1e-12)
    assert compute_Y_h(c) == pytest.approx(oracle, rel=1e-9)


def test_Y_shrinks_with_z():
    values = [compute_Y(SieveConfig.from_sqrt_D(3, 1, 1000.0, s=s)) for s in (1.0, 1.5, 2.0, 3.0)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_unrestricted_matches_s_one():
    a = SieveConfig.from_sqrt_D(3, 1, 300.0, s=1.0)
    b = SieveConfig.from_sqrt_D(3, 1, 300.0, s=None)
    assert support(a) == support(b)
    assert compute_Y(a) == compute_Y(b)


def test_rho_matches_formula():
    c = SieveConfig.from_sqrt_D(3, 1, 30.0)
    w = compute_rho(c)
    oracle = brute_rho(c)
    assert set(w.rho) == set(oracle)
    for d, v in oracle.items():
        assert w.rho[d] == pytest.approx(v, rel=1e-12, abs=1e-15)
    assert w.rho[1] == pytest.approx(1.0)
    assert all(abs(v) <= 1 + 1e-12 for v in w.rho.values())
    assert 31 not in w.rho


def test_lambda_examples():
    c = SieveConfig.from_sqrt_D(3, 1, 60.0)
    w = compute_lambda(compute_rho(c))
    assert w.lam[1] == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    keys = list(w.lam)
    for d in rng.choice(keys, size=min(60, len(keys)), replace=False).tolist():
        assert abs(w.lam[d]) <= tau_k(d, 3) + 1e-12


def test_lambda_square_identity():
    c = SieveConfig.from_sqrt_D(3, 1, 40.0)
    w = compute_lambda(compute_rho(c))
    n_max = 10_000
    lam_sum = np.zeros(n_max + 1)
    rho_sum = np.zeros(n_max + 1)
    for d, v in w.lam.items():
        lam_sum[d::d] += v
    for d, v in w.rho.items():
        rho_sum[d::d] += v
    assert np.allclose(lam_sum[1:], rho_sum[1:] ** 2, atol=1e-9)
    assert lam_sum[1:].min() > -1e-9


def test_trivial_sieve():
    c = SieveConfig.from_sqrt_D(3, 0, 10.0)
    g = G_sums(c, SieveWeights.trivial())
    assert g.G == 1.0
    assert g.G_prime == pytest.approx(c.delta_ratio)
    assert c.delta_ratio == pytest.approx(3.0)


@pytest.mark.parametrize("k,l,root,s", [(2, 0, 100.0, 1.0), (3, 1, 100.0, 1.0), (4, 2, 80.0, 1.5)])
def test_G_routes_agree(k, l, root, s):
    c = SieveConfig.from_sqrt_D(k, l, root, s=s)
    direct = G_sums(c, compute_lambda(compute_rho(c)))
    diag = G_sums_diagonal(c)
    assert direct.G == pytest.approx(diag.G, rel=1e-9)
    assert direct.G_prime == pytest.approx(diag.G_prime, rel=1e-9)


def test_G_needs_lambda():
    c = SieveConfig.from_sqrt_D(3, 1, 30.0)
    with pytest.raises(InvalidArgument):
        G_sums(c, compute_rho(c))


def test_restricted_Y_below_full():
    full = compute_Y(SieveConfig.from_sqrt_D(3, 1, 500.0, s=1.0))
    half = compute_Y(SieveConfig.from_sqrt_D(3, 1, 500.0, s=2.0))
    assert half <= full


def test_ratio_target_values():
    assert ratio_target(3, 1) == Fraction(1, 4)
    assert ratio_target(3, 0) == Fraction(1, 4)
    assert mu_kl(3, 1) == ratio_target(3, 1) * 3


def test_loss_bound_examples():
    assert loss_bound(4, 2.0) == pytest.approx(0.75)
    tail = 2 * 4494 * math.exp(175561 * math.log1p(-1 / 4494))
    assert tail < 1e-13
    report = restricted_loss_check(SieveConfig.from_sqrt_D(4, 1, 300.0, s=2.0))
    assert report.bound == pytest.approx(0.75)
    assert report.ratio > 0 and not report.vacuous
    assert report.margin == pytest.approx(report.ratio - report.bound)
    assert restricted_loss_check(SieveConfig.from_sqrt_D(2, 0, 100.0, s=20.0)).vacuous


def test_loss_check_needs_s_two():
    with pytest.raises(InvalidArgument):
        restricted_loss_check(SieveConfig.from_sqrt_D(3, 1, 100.0, s=1.0))


def test_mu_and_gamma():
    for k in range(2, 30):
        assert mu_kl(k, 0) == Fraction(k, k + 1) < 1
    assert mu_kl(3, 1) == Fraction(3, 4)
    assert gamma_kl(3, 0) == 6
    assert gamma_kl(2, 1) == Fraction(2 * 2 * 3, 4)


@pytest.mark.parametrize("k", [9, 25, 175561])
def test_nice_l(k):
    l = nice_l(k)
    r = math.isqrt(k)
    assert r <= 2 * l + 1 < r + 2
    assert mu_lower_bound_holds(k)
    assert mu_kl(k, l) >= Fraction(2) / (1 + Fraction(2, r) + Fraction(2, k))


def test_nice_l_non_square():
    for k in (10, 50, 1000):
        l = nice_l(k)
        assert math.sqrt(k) <= 2 * l + 1 < math.sqrt(k) + 2
    with pytest.raises(InvalidArgument):
        mu_lower_bound_holds(10)


def test_G_s_reported_against_G_1():
    c1 = SieveConfig.from_sqrt_D(3, 1, 200.0, s=1.0)
    c2 = replace(c1, s=2.0)
    g1, g2 = G_sums_diagonal(c1), G_sums_diagonal(c2)
    assert g2.Y <= g1.Y
    assert math.isfinite(g2.G) and math.isfinite(g1.G)
