"""Selberg Λ²-sieve weights of GPY shape and the associated sieve sums.

Weights are supported on squarefree ``d < sqrt(D)`` coprime to Δ whose
prime factors lie below ``z = D**(1/(2s))``. Two routes to ``G`` and ``G'``
are provided: direct summation over the lcm-convolved ``λ_d`` and the
diagonalized forms that never build ``λ``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

from .arith import factorize, primes_up_to, squarefree_coprime_upto, tau_k
from .errors import InvalidArgument

SQRT_D_CAP = 10**7


def primorial(x: int) -> int:
    return math.prod(p for p in primes_up_to(max(x, 2)) if p <= x)


@dataclass(frozen=True)
class SieveConfig:
    """Parameters of a restricted Λ²-sieve.

    ``s=None`` means no smoothness restriction. ``delta`` defaults to the
    product of the primes up to ``k``.
    """

    k: int
    l: int
    D: float
    s: float | None = 1.0
    delta: int | None = None

    def __post_init__(self) -> None:
        if self.k < 2 or self.l < 0:
            raise InvalidArgument("need k >= 2 and l >= 0")
        if not self.D > 1:
            raise InvalidArgument("D must exceed 1")
        if self.s is not None and self.s < 1:
            raise InvalidArgument("s must be at least 1")
        if math.sqrt(self.D) > SQRT_D_CAP:
            raise InvalidArgument("sqrt(D) beyond enumeration cap")
        delta = primorial(self.k) if self.delta is None else int(self.delta)
        fac = factorize(delta)
        if not fac.is_squarefree:
            raise InvalidArgument("delta must be squarefree")
        if any(delta % p for p in primes_up_to(self.k) if p <= self.k):
            raise InvalidArgument("every prime up to k must divide delta")
        object.__setattr__(self, "delta", delta)

    @classmethod
    def from_sqrt_D(cls, k: int, l: int, sqrt_D: float, s: float | None = 1.0,
                    delta: int | None = None) -> "SieveConfig":
        return cls(k=k, l=l, D=float(sqrt_D) ** 2, s=s, delta=delta)

    @property
    def sqrt_D(self) -> float:
        return math.sqrt(self.D)

    @property
    def z(self) -> float:
        return math.inf if self.s is None else self.D ** (1.0 / (2.0 * self.s))

    @property
    def delta_primes(self) -> tuple[int, ...]:
        return factorize(self.delta).primes

    @property
    def delta_ratio(self) -> float:
        """``Δ/φ(Δ)``."""
        return math.prod(p / (p - 1) for p in self.delta_primes)


def support(config: SieveConfig) -> list[tuple[int, tuple[int, ...]]]:
    """Squarefree ``d < sqrt(D)`` coprime to Δ with prime factors below ``z``."""
    bound = math.ceil(config.sqrt_D)
    rows = squarefree_coprime_upto(bound, config.delta_primes, config.z)
    out = [(d, ps) for d, ps in rows if d < config.sqrt_D]
    for _, ps in out:
        if ps and ps[0] <= config.k:
            raise AssertionError("prime <= k survived the support filter")
    return out


def _f(primes: Iterable[int], k: int) -> int:
    return math.prod(p - k for p in primes)


def _phi(primes: Iterable[int]) -> int:
    return math.prod(p - 1 for p in primes)


def compute_Y(config: SieveConfig) -> float:
    """Normalizer as ``sum tau_k(d)/f(d) * log(sqrt(D)/d)**l`` with ``f(p) = p - k``."""
    log_root = math.log(config.sqrt_D)
    terms = []
    for d, ps in support(config):
        terms.append(tau_k(d, config.k) / _f(ps, config.k) * (log_root - math.log(d)) ** config.l)
    return math.fsum(terms)


def compute_Y_h(config: SieveConfig) -> float:
    """Normalizer as ``sum h(m) log(sqrt(D)/m)**l`` with ``h(p) = k/(p-k)``.

    The products are generated depth-first over admissible primes, so this
    route shares no enumeration or factoring code with :func:`compute_Y`.
    """
    k, l = config.k, config.l
    root = config.sqrt_D
    log_root = math.log(root)
    bad = set(config.delta_primes)
    plist = [p for p in primes_up_to(max(2, math.ceil(root))) if p < root and p < config.z
             and p not in bad]
    terms: list[float] = []

    def walk(start: int, m: int, hm: float) -> None:
        terms.append(hm * (log_root - math.log(m)) ** l)
        for i in range(start, len(plist)):
            p = plist[i]
            if m * p >= root:
                break
            walk(i + 1, m * p, hm * k / (p - k))

    walk(0, 1, 1.0)
    return math.fsum(terms)


@dataclass(frozen=True)
class SieveWeights:
    """``rho`` and ``lam`` map ``d`` to weights; ``primes`` holds each key's prime factors."""

    rho: dict[int, float]
    Y: float
    lam: dict[int, float] | None = None
    primes: dict[int, tuple[int, ...]] = field(default_factory=dict, repr=False)

    @classmethod
    def trivial(cls) -> "SieveWeights":
        return cls(rho={1: 1.0}, Y=1.0, lam={1: 1.0}, primes={1: ()})


def _squarefree_divisors(ps: tuple[int, ...]) -> list[tuple[int, int]]:
    """``(d, omega(d))`` over divisors of the product of ``ps``."""
    out = [(1, 0)]
    for p in ps:
        out += [(d * p, w + 1) for d, w in out]
    return out


def compute_rho(config: SieveConfig) -> SieveWeights:
    k, l = config.k, config.l
    log_root = math.log(config.sqrt_D)
    supp = support(config)
    partial: dict[int, list[float]] = {d: [] for d, _ in supp}
    y_terms = []
    for b, ps in supp:
        term = k ** len(ps) / _f(ps, k) * (log_root - math.log(b)) ** l
        y_terms.append(term)
        for d, _ in _squarefree_divisors(ps):
            partial[d].append(term)
    Y = math.fsum(y_terms)
    rho = {}
    primes = {}
    for d, ps in supp:
        w = len(ps)
        rho[d] = (-1) ** w * d / (Y * k**w) * math.fsum(partial[d])
        primes[d] = ps
    return SieveWeights(rho=rho, Y=Y, primes=primes)


def compute_lambda(weights: SieveWeights) -> SieveWeights:
    """``λ_d = sum over [d1, d2] = d of ρ_{d1} ρ_{d2}``."""
    items = sorted(weights.rho.items())
    pset = {d: frozenset(weights.primes[d] if d in weights.primes else factorize(d).primes)
            for d, _ in items}
    acc: dict[int, list[float]] = {}
    primes = dict(weights.primes)
    for d1, r1 in items:
        for d2, r2 in items:
            d = d1 // math.gcd(d1, d2) * d2
            acc.setdefault(d, []).append(r1 * r2)
            if d not in primes:
                primes[d] = tuple(sorted(pset[d1] | pset[d2]))
    lam = {d: math.fsum(v) for d, v in sorted(acc.items())}
    return replace(weights, lam=lam, primes=primes)


@dataclass(frozen=True)
class GSums:
    G: float
    G_prime: float
    Y: float | None = None


def G_sums(config: SieveConfig, weights: SieveWeights) -> GSums:
    """``G`` and ``G'`` summed directly over ``λ``."""
    if weights.lam is None:
        raise InvalidArgument("lambda weights not computed")
    k = config.k
    g_terms = []
    gp_terms = []
    for d, lam in weights.lam.items():
        ps = weights.primes.get(d) or factorize(d).primes
        w = len(ps)
        g_terms.append(lam * k**w / d)
        gp_terms.append(lam * (k - 1) ** w / _phi(ps))
    return GSums(G=math.fsum(g_terms), G_prime=config.delta_ratio * math.fsum(gp_terms),
                 Y=weights.Y)


def G_sums_diagonal(config: SieveConfig) -> GSums:
    """``G`` and ``G'`` from their diagonal forms, without building ``λ``.

    ``Y^2 G = sum tau_k(d)/f(d) L(d)^{2l}`` and ``Y^2 G'`` is the weighted sum
    of squared inner sums over ``n < sqrt(D)/d`` coprime to ``d``.
    """
    k, l = config.k, config.l
    root = config.sqrt_D
    log_root = math.log(root)
    supp = support(config)
    y_terms, g_terms, gp_terms = [], [], []
    for d, ps in supp:
        hd = k ** len(ps) / _f(ps, k)
        L = log_root - math.log(d)
        y_terms.append(hd * L**l)
        g_terms.append(hd * L ** (2 * l))
        inner = []
        for n, qs in supp:
            if n * d >= root:
                break
            if math.gcd(n, d) == 1:
                inner.append((L - math.log(n)) ** l / _phi(qs))
        s_inner = math.fsum(inner)
        gp_terms.append((d / _phi(ps)) ** 2 * (k - 1) ** len(ps) / _f(ps, k) * s_inner * s_inner)
    Y = math.fsum(y_terms)
    return GSums(G=math.fsum(g_terms) / Y**2,
                 G_prime=config.delta_ratio * math.fsum(gp_terms) / Y**2, Y=Y)


def ratio_target(k: int, l: int) -> Fraction:
    """Limit of ``G'/(G log D)``: ``(2l+1)/((l+1)(k+2l+1))``."""
    return Fraction(2 * l + 1, (l + 1) * (k + 2 * l + 1))


def loss_bound(k: int, s: float) -> float:
    """``1 - 2s(1 - 1/s)^k``, the lower bound for ``G_s'/G'``."""
    return 1.0 - 2.0 * s * math.exp(k * math.log1p(-1.0 / s))


@dataclass(frozen=True)
class LossReport:
    k: int
    l: int
    s: float
    ratio: float
    bound: float
    margin: float
    vacuous: bool


def restricted_loss_check(config: SieveConfig) -> LossReport:
    """Compare ``G_s'/G_1'`` with ``1 - 2s(1 - 1/s)^k``. Informational only."""
    if config.s is None or config.s < 2:
        raise InvalidArgument("restricted loss needs s >= 2")
    restricted = G_sums_diagonal(config).G_prime
    full = G_sums_diagonal(replace(config, s=1.0)).G_prime
    ratio = restricted / full
    bound = loss_bound(config.k, config.s)
    return LossReport(k=config.k, l=config.l, s=config.s, ratio=ratio, bound=bound,
                      margin=ratio - bound, vacuous=bound <= 0)


def mu_kl(k: int, l: int) -> Fraction:
    return Fraction(k * (2 * l + 1), (l + 1) * (k + 2 * l + 1))


def gamma_kl(k: int, l: int) -> Fraction:
    return Fraction(math.factorial(k) * math.comb(2 * l, l) * math.comb(l + k, l),
                    math.comb(2 * l + k, l))


def nice_l(k: int) -> int:
    """The integer ``l`` with ``sqrt(k) <= 2l + 1 < sqrt(k) + 2``."""
    t = math.isqrt(k)
    if t * t < k:
        t += 1
    if t % 2 == 0:
        t += 1
    return (t - 1) // 2


def mu_lower_bound_holds(k: int) -> bool:
    """Exact check of ``mu(k, nice_l(k)) >= 2/(1 + 2/sqrt(k) + 2/k)`` for square ``k``."""
    r = math.isqrt(k)
    if r * r != k:
        raise InvalidArgument("exact check implemented for perfect squares")
    bound = Fraction(2) / (1 + Fraction(2, r) + Fraction(2, k))
    return mu_kl(k, nice_l(k)) >= bound
