"""Prime tables and elementary multiplicative functions.

Everything here is exact integer arithmetic except :func:`von_mangoldt`,
which returns a float logarithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import GcdFailure, InvalidArgument, TableTooSmall

CHECKPOINT_STRIDE = 1024
_SEGMENT = 1 << 18


def _simple_sieve(limit: int) -> np.ndarray:
    """Boolean primality mask on ``0..limit`` by the plain Eratosthenes sieve."""
    mask = np.ones(limit + 1, dtype=bool)
    mask[: min(2, limit + 1)] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


@dataclass(frozen=True)
class PrimeTable:
    """Primality bits and prime-counting checkpoints up to ``limit``.

    ``bits`` is the primality mask packed eight flags per byte (numpy
    ``packbits`` order). ``pi_checkpoints[j]`` counts primes below
    ``j * CHECKPOINT_STRIDE``.
    """

    limit: int
    bits: np.ndarray = field(repr=False)
    pi_checkpoints: np.ndarray = field(repr=False)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "PrimeTable":
        mask = np.asarray(mask, dtype=bool)
        limit = mask.size - 1
        blocks = -(-mask.size // CHECKPOINT_STRIDE)
        padded = np.zeros(blocks * CHECKPOINT_STRIDE, dtype=np.int64)
        padded[: mask.size] = mask
        counts = padded.reshape(blocks, CHECKPOINT_STRIDE).sum(axis=1)
        checkpoints = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        return cls(limit=limit, bits=np.packbits(mask), pi_checkpoints=checkpoints)

    @cached_property
    def mask(self) -> np.ndarray:
        """Unpacked boolean mask indexed ``0..limit``."""
        return np.unpackbits(self.bits, count=self.limit + 1).astype(bool)

    @cached_property
    def primes(self) -> np.ndarray:
        """All primes up to ``limit`` in increasing order."""
        return np.flatnonzero(self.mask).astype(np.int64)

    def is_prime(self, n: int) -> bool:
        if n < 0 or n > self.limit:
            raise TableTooSmall(f"{n} outside table", max(n, 2))
        return bool((self.bits[n >> 3] >> (7 - (n & 7))) & 1)

    def pi(self, x: float) -> int:
        """Number of primes ``<= x``."""
        if x < 2:
            return 0
        n = int(math.floor(x))
        if n > self.limit:
            raise TableTooSmall(f"pi({n}) beyond table", n)
        block = n // CHECKPOINT_STRIDE
        start = block * CHECKPOINT_STRIDE
        return int(self.pi_checkpoints[block]) + int(self.mask[start : n + 1].sum())

    def verify_checkpoints(self) -> bool:
        """Recompute the checkpoints from the bits and compare."""
        return bool(np.array_equal(PrimeTable.from_mask(self.mask).pi_checkpoints,
                                   self.pi_checkpoints))


def sieve_primes(limit: int) -> PrimeTable:
    """Segmented sieve of Eratosthenes up to ``limit`` inclusive."""
    if limit < 2:
        raise InvalidArgument("limit must be at least 2")
    root = math.isqrt(limit)
    base = np.flatnonzero(_simple_sieve(root)).tolist()
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for lo in range(0, limit + 1, _SEGMENT):
        hi = min(lo + _SEGMENT, limit + 1)
        seg = mask[lo:hi]
        for p in base:
            if p * p >= hi:
                break
            first = max(p * p, -(-lo // p) * p)
            seg[first - lo :: p] = False
    return PrimeTable.from_mask(mask)


def nth_prime_upper_estimate(n: int) -> int:
    """Rosser-type upper bound for ``p_n``, used to size tables."""
    if n < 6:
        return 13
    ln = math.log(n)
    return int(n * (ln + math.log(ln))) + 1


def nth_prime(n: int, table: PrimeTable) -> int:
    """The ``n``-th prime with ``p_1 = 2``."""
    if n < 1:
        raise InvalidArgument("n must be positive")
    cps = table.pi_checkpoints
    if n > int(cps[-1]):
        raise TableTooSmall(f"p_{n} beyond table", nth_prime_upper_estimate(n))
    block = int(np.searchsorted(cps, n, side="left")) - 1
    start = block * CHECKPOINT_STRIDE
    stop = min(start + CHECKPOINT_STRIDE, table.limit + 1)
    local = np.flatnonzero(table.mask[start:stop])
    return start + int(local[n - int(cps[block]) - 1])


@dataclass(frozen=True)
class FactoredInteger:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise InvalidArgument(f"bad factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise InvalidArgument(f"factors do not multiply to {self.value}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)


@lru_cache(maxsize=8)
def primes_up_to(bound: int) -> tuple[int, ...]:
    return tuple(np.flatnonzero(_simple_sieve(max(bound, 2))).tolist())


def factorize(n: int) -> FactoredInteger:
    """Trial division by primes up to ``sqrt(n)``."""
    if n < 1:
        raise InvalidArgument("n must be positive")
    root = math.isqrt(n)
    bound = 1 << max(10, root.bit_length())
    factors = []
    m = n
    for p in primes_up_to(bound):
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
    if m > 1:
        factors.append((m, 1))
    return FactoredInteger(n, tuple(factors))


@dataclass(frozen=True)
class MultiplicativeSuite:
    mobius: int
    phi: int
    is_squarefree: bool
    radical: int


def multiplicative_suite(n: int) -> MultiplicativeSuite:
    fac = factorize(n)
    phi = 1
    rad = 1
    for p, e in fac.factors:
        phi *= (p - 1) * p ** (e - 1)
        rad *= p
    sqf = fac.is_squarefree
    mob = (-1) ** len(fac.factors) if sqf else 0
    return MultiplicativeSuite(mobius=mob, phi=phi, is_squarefree=sqf, radical=rad)


def mobius(n: int) -> int:
    return multiplicative_suite(n).mobius


def euler_phi(n: int) -> int:
    return multiplicative_suite(n).phi


def tau_k(n: int, k: int) -> int:
    """Number of ordered ``k``-factorizations of ``n``."""
    if n < 1 or k < 1:
        raise InvalidArgument("n and k must be positive")
    out = 1
    for _, e in factorize(n).factors:
        out *= math.comb(e + k - 1, k - 1)
    return out


def von_mangoldt(n: int) -> float:
    if n < 2:
        return 0.0
    fac = factorize(n).factors
    return math.log(fac[0][0]) if len(fac) == 1 else 0.0


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of ``n``."""
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def mod_inverse(a: int, q: int) -> int:
    if q < 1:
        raise InvalidArgument("modulus must be positive")
    g = math.gcd(a, q)
    if g != 1:
        raise GcdFailure(f"{a} is not invertible mod {q}", g)
    return pow(a, -1, q) if q > 1 else 0


def crt_combine(residues: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Combine ``(a_i, q_i)`` pairs into ``(a, prod q_i)``."""
    a, q = 0, 1
    for ai, qi in residues:
        g = math.gcd(q, qi)
        if g != 1:
            raise GcdFailure(f"moduli {q} and {qi} are not coprime", g)
        t = ((ai - a) * pow(q, -1, qi)) % qi if qi > 1 else 0
        a, q = a + q * t, q * qi
        a %= q
    return a, q


def is_z_smooth_squarefree(n: int, z: float) -> bool:
    """True iff ``n`` is squarefree with every prime factor below ``z``."""
    if z < 2:
        raise InvalidArgument("z must be at least 2")
    fac = factorize(n)
    return fac.is_squarefree and all(p < z for p, _ in fac.factors)


def smallest_prime_factors(limit: int) -> np.ndarray:
    """``spf[n]`` for ``0 <= n <= limit`` (``spf[0] = spf[1] = 0``)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if p * p > limit:
            break
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    return spf


def prime_factors_from_spf(n: int, spf: np.ndarray) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def squarefree_coprime_upto(
    bound: int, excluded: Sequence[int] = (), prime_bound: float = math.inf
) -> list[tuple[int, tuple[int, ...]]]:
    """Squarefree ``d < bound`` with prime factors outside ``excluded`` and below ``prime_bound``.

    Returns ``(d, primes)`` pairs sorted by ``d``.
    """
    if bound <= 1:
        return []
    spf = smallest_prime_factors(max(bound - 1, 1))
    bad = set(excluded)
    out = [(1, ())]
    for d in range(2, bound):
        fac = prime_factors_from_spf(d, spf)
        if any(e > 1 or p in bad or p >= prime_bound for p, e in fac):
            continue
        out.append((d, tuple(p for p, _ in fac)))
    return out
