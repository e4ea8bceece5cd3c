"""Admissible tuples, root counts and the singular-series constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable

import numpy as np

from .arith import (PrimeTable, factorize, nth_prime, nth_prime_upper_estimate, primes_up_to,
                    smallest_prime_factors)
from .errors import InvalidArgument, TableTooSmall

DET_LIMIT = 50
# Largest element for which the smallest-prime-factor shortcut is used.
SPF_SHORTCUT_LIMIT = 5 * 10**7


@dataclass(frozen=True)
class AdmissibleTuple:
    """A strictly increasing set of shifts ``h_1 < ... < h_k``.

    The name follows usage; admissibility itself is tested by
    :func:`is_admissible`.
    """

    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        els = tuple(int(h) for h in self.elements)
        if not els:
            raise InvalidArgument("tuple must be non-empty")
        if any(b <= a for a, b in zip(els, els[1:])):
            raise InvalidArgument("elements must be strictly increasing")
        object.__setattr__(self, "elements", els)

    @classmethod
    def of(cls, values: Iterable[int]) -> "AdmissibleTuple":
        return cls(tuple(sorted(set(int(v) for v in values))))

    @property
    def k(self) -> int:
        return len(self.elements)

    @property
    def diameter(self) -> int:
        return self.elements[-1] - self.elements[0]

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.int64)

    def omega_p(self, p: int) -> int:
        """Distinct residues of the elements modulo the prime ``p``."""
        return int(np.unique(self.array % p).size)


def omega(H: AdmissibleTuple, d: int) -> int:
    """Number of roots of ``Q(x) = prod (x - h)`` modulo squarefree ``d``."""
    if d < 1:
        raise InvalidArgument("d must be positive")
    fac = factorize(d)
    if not fac.is_squarefree:
        raise InvalidArgument(f"{d} is not squarefree")
    out = 1
    for p, _ in fac.factors:
        out *= H.omega_p(p)
    return out


def is_admissible(H: AdmissibleTuple) -> bool:
    """True iff the elements miss some residue class modulo every prime ``p <= k``.

    A prime that divides no element misses the class 0. For large tuples of
    positive shifts, elements whose smallest prime factor exceeds ``k`` are
    set aside first, and only primes dividing a remaining element get the
    full residue count.
    """
    small = [p for p in primes_up_to(max(H.k, 2)) if p <= H.k]
    suspects = H.array
    if H.k > 64 and H.elements[0] >= 2 and H.elements[-1] <= SPF_SHORTCUT_LIMIT:
        spf = smallest_prime_factors(H.elements[-1])
        suspects = H.array[spf[H.array] <= H.k]
    for p in small:
        if suspects.size and np.any(suspects % p == 0) and H.omega_p(p) >= p:
            return False
    return True


def build_consecutive_prime_tuple(k: int, table: PrimeTable) -> AdmissibleTuple:
    """The ``k`` consecutive primes starting at the first prime above ``k``."""
    if k < 1:
        raise InvalidArgument("k must be positive")
    if k > table.limit:
        raise TableTooSmall("table does not reach k", nth_prime_upper_estimate(2 * k))
    first = table.pi(k) + 1
    last = first + k - 1
    if last > int(table.pi_checkpoints[-1]):
        raise TableTooSmall(f"p_{last} beyond table", nth_prime_upper_estimate(last))
    lo = nth_prime(first, table)
    hi = nth_prime(last, table)
    primes = table.primes
    i = int(np.searchsorted(primes, lo))
    j = int(np.searchsorted(primes, hi))
    return AdmissibleTuple(tuple(primes[i : j + 1].tolist()))


@dataclass(frozen=True)
class TupleConstants:
    """``delta`` is the minimal valid modulus; ``det_H`` is ``None`` when k is large."""

    delta: int
    delta_primes: tuple[int, ...]
    gamma_H: Fraction
    singular_series: float
    truncation_bound: float
    det_H: int | None


def det_H(H: AdmissibleTuple) -> int:
    """Product of ``h_j - h_i`` over ``i < j``."""
    out = 1
    els = H.elements
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            out *= els[j] - els[i]
    return out


def delta_primes(H: AdmissibleTuple) -> tuple[int, ...]:
    """Primes dividing the minimal Δ.

    A prime ``p`` divides ``det H`` exactly when two elements collide mod ``p``,
    i.e. ``omega(p) < k``; no collision is possible above the diameter.
    """
    bound = max(H.k, H.diameter)
    out = []
    for p in primes_up_to(max(bound, 2)):
        if p > bound:
            break
        if p <= H.k or H.omega_p(p) < H.k:
            out.append(p)
    return tuple(out)


def singular_series_partials(H: AdmissibleTuple, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Primes ``p <= cutoff`` and the running Euler products up to each."""
    primes = np.asarray([p for p in primes_up_to(max(cutoff, 2)) if p <= cutoff], dtype=np.int64)
    omegas = np.asarray([H.omega_p(int(p)) for p in primes], dtype=np.float64)
    logs = np.log1p(-omegas / primes) - H.k * np.log1p(-1.0 / primes)
    return primes, np.exp(np.cumsum(logs))


def tuple_constants(H: AdmissibleTuple, series_cutoff: int) -> TupleConstants:
    if series_cutoff < H.k:
        raise InvalidArgument("series_cutoff must be at least k")
    if not is_admissible(H):
        raise InvalidArgument("tuple is not admissible")
    dps = delta_primes(H)
    gamma = Fraction(1)
    for p in dps:
        gamma *= Fraction(p - H.omega_p(p), p)
    _, partials = singular_series_partials(H, series_cutoff)
    series = float(partials[-1]) if partials.size else 1.0
    tail = H.k * H.k / series_cutoff
    return TupleConstants(
        delta=math.prod(dps),
        delta_primes=dps,
        gamma_H=gamma,
        singular_series=series,
        truncation_bound=tail,
        det_H=det_H(H) if H.k <= DET_LIMIT else None,
    )
