"""Heath-Brown's identity as a finite computation, and the exponent classifier.

The identity expresses ``Λ(n)`` for ``n <= 2 M^K`` as

    -sum_{J<=K} (-1)^J C(K,J) sum_{l_1..l_J m_1..m_J = n} log(l_1) prod μ(m_j) ψ(m_j/M)

with a smooth cutoff ``ψ`` equal to 1 on ``[-1, 1]`` and 0 outside ``(-2, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .arith import divisors, mobius, tau_k
from .errors import InvalidArgument, LemmaViolation, TooLarge

ENUMERATION_CAP = 10**7
C3_SLACK = 1e-12


def _g(t: float) -> float:
    """Smooth step on ``[0, 1]`` from 0 to 1."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = math.exp(-1.0 / t)
    b = math.exp(-1.0 / (1.0 - t))
    return a / (a + b)


def psi(u: float) -> float:
    """The cutoff: 1 on ``|u| <= 1``, 0 on ``|u| >= 2``, smooth in between."""
    x = abs(u)
    if x <= 1.0:
        return 1.0
    if x >= 2.0:
        return 0.0
    return _g(2.0 - x)


def _check_range(n: int, K: int, M: float) -> None:
    if n < 1:
        raise InvalidArgument("n must be positive")
    if not 1 <= K <= 5:
        raise InvalidArgument("K must lie in 1..5")
    if n > 2 * M**K:
        raise InvalidArgument(f"n={n} exceeds 2 M^K = {2 * M**K}")


def heath_brown_rhs(n: int, K: int, M: float) -> float:
    """Right side of the identity by recursive divisor descent.

    Each ordered factorization is reached by choosing the first factor as a
    divisor of the remaining cofactor; partial sums over the tail of the
    factorization are memoized per cofactor.
    """
    _check_range(n, K, M)
    divs = divisors(n)
    sub = {m: [d for d in divs if m % d == 0] for m in divs}
    mu_psi = {d: mobius(d) * psi(d / M) for d in divs}
    logs = {d: math.log(d) for d in divs}
    total = []
    for J in range(1, K + 1):
        # Factor slots in order: log, J-1 ones, then J copies of μψ.
        kinds = ["log"] + ["one"] * (J - 1) + ["mu"] * J

        @lru_cache(maxsize=None)
        def tail(i: int, m: int) -> float:
            kind = kinds[i]
            if i == len(kinds) - 1:
                return logs[m] if kind == "log" else (1.0 if kind == "one" else mu_psi[m])
            acc = []
            for d in sub[m]:
                w = logs[d] if kind == "log" else (1.0 if kind == "one" else mu_psi[d])
                if w != 0.0:
                    acc.append(w * tail(i + 1, m // d))
            return math.fsum(acc)

        total.append(-((-1) ** J) * math.comb(K, J) * tail(0, n))
    return math.fsum(total)


def ordered_factorizations(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ordered tuples of ``parts`` positive integers with product ``n``."""
    if parts == 1:
        yield (n,)
        return
    for d in divisors(n):
        for rest in ordered_factorizations(n // d, parts - 1):
            yield (d,) + rest


def heath_brown_rhs_enumerated(n: int, K: int, M: float,
                               cap: int = ENUMERATION_CAP) -> float:
    """Same sum by literal enumeration of every ordered ``2J``-factorization."""
    _check_range(n, K, M)
    count = sum(tau_k(n, 2 * J) for J in range(1, K + 1))
    if count > cap:
        raise TooLarge(f"{count} factorizations exceed cap {cap}")
    total = []
    for J in range(1, K + 1):
        terms = []
        for f in ordered_factorizations(n, 2 * J):
            w = math.log(f[0])
            for m in f[J:]:
                w *= mobius(m) * psi(m / M)
            terms.append(w)
        total.append(-((-1) ** J) * math.comb(K, J) * math.fsum(terms))
    return math.fsum(total)


@dataclass(frozen=True)
class ExponentTuple:
    nu: tuple[float, ...]
    eta: float

    def __post_init__(self) -> None:
        nu = tuple(float(v) for v in self.nu)
        if not nu or any(v <= 0 for v in nu):
            raise InvalidArgument("exponents must be positive")
        if any(b > a for a, b in zip(nu, nu[1:])):
            raise InvalidArgument("exponents must be non-increasing")
        if abs(math.fsum(nu) - 1.0) > 1e-12:
            raise InvalidArgument("exponents must sum to 1")
        if not 0 < self.eta < 1 / 40:
            raise InvalidArgument("eta must lie in (0, 1/40)")
        object.__setattr__(self, "nu", nu)

    @classmethod
    def normalized(cls, values: Sequence[float], eta: float) -> "ExponentTuple":
        v = np.sort(np.asarray(values, dtype=np.float64))[::-1]
        v = v / math.fsum(v)
        return cls(tuple(v.tolist()), eta)


@dataclass(frozen=True)
class Classification:
    case: str
    witness: tuple[int, ...] | None = None
    subsum: float | None = None


@lru_cache(maxsize=32)
def _subset_masks(r: int) -> np.ndarray:
    idx = np.arange(1 << r, dtype=np.int64)
    return ((idx[:, None] >> np.arange(r)) & 1).astype(np.float64)


def _subset_in_window(nu: Sequence[float], lo: float, hi: float) -> tuple[int, ...] | None:
    """Indices of some subset with sum in ``(lo, hi)``, or ``None``."""
    r = len(nu)
    arr = np.asarray(nu, dtype=np.float64)
    if r <= 20:
        sums = _subset_masks(r) @ arr
        hit = np.flatnonzero((sums > lo) & (sums < hi))
        if hit.size == 0:
            return None
        mask = int(hit[0])
        return tuple(i for i in range(r) if mask >> i & 1)
    half = r // 2
    left, right = arr[:half], arr[half:]
    ls = _subset_masks(half) @ left
    rs = _subset_masks(r - half) @ right
    order = np.argsort(rs, kind="stable")
    rs_sorted = rs[order]
    for lm, lv in enumerate(ls):
        j = int(np.searchsorted(rs_sorted, lo - lv, side="right"))
        if j < rs_sorted.size and lv + rs_sorted[j] < hi and lv + rs_sorted[j] > lo:
            rm = int(order[j])
            return tuple(i for i in range(half) if lm >> i & 1) + tuple(
                half + i for i in range(r - half) if rm >> i & 1)
    return None


def classify_exponents(t: ExponentTuple) -> Classification:
    """First applicable case among C1, C2, C3; C3 is verified, never assumed."""
    nu, eta = t.nu, t.eta
    if nu[0] > 5 / 8 - eta:
        return Classification("C1")
    lo, hi = 3 / 8 + eta, 5 / 8 - eta
    wit = _subset_in_window(nu, lo, hi)
    if wit is not None:
        return Classification("C2", wit, math.fsum(nu[i] for i in wit))
    if len(nu) < 3:
        raise LemmaViolation("no case applies and r < 3", t)
    ok_third = nu[2] >= 1 / 4 - 2 * eta - C3_SLACK
    ok_sum = nu[0] + nu[1] + 1.25 * nu[2] >= 65 / 64 - 13 / 8 * eta - C3_SLACK
    if not (ok_third and ok_sum):
        raise LemmaViolation("no case applies", t)
    return Classification("C3")


def random_exponent_tuple(rng: np.random.Generator, r_max: int = 10) -> ExponentTuple:
    """Random sorted normalized tuple; a third of draws cluster near three equal parts."""
    r = int(rng.integers(1, r_max + 1))
    eta = float(rng.uniform(0.0, 1 / 40))
    while eta == 0.0:
        eta = float(rng.uniform(0.0, 1 / 40))
    mode = int(rng.integers(0, 3))
    if mode == 0 or r < 3:
        v = rng.random(r) + 1e-9
    elif mode == 1:
        v = rng.dirichlet(np.full(r, float(rng.choice([0.2, 1.0, 5.0])))) + 1e-9
    else:
        heavy = 1.0 / 3 + rng.normal(0.0, 0.03, size=3)
        light = rng.random(r - 3) * 0.05
        v = np.abs(np.concatenate([heavy, light])) + 1e-9
    return ExponentTuple.normalized(v, eta)


@dataclass(frozen=True)
class ArrangedOrdinates:
    ordered: tuple[float, ...]
    ratio: float
    flagged: bool


def arrange_ordinates(ys: Sequence[float], N: float) -> ArrangedOrdinates:
    """Sort non-increasing and report ``prod / N``; flag it outside ``[2^-11, 2^10]``."""
    if any(y < 0.5 for y in ys):
        raise InvalidArgument("ordinates must be at least 1/2")
    ordered = tuple(sorted((float(y) for y in ys), reverse=True))
    ratio = math.exp(math.fsum(math.log(y) for y in ordered) - math.log(N))
    return ArrangedOrdinates(ordered, ratio, not (2.0**-11 <= ratio <= 2.0**10))
