"""Closed intervals with rational endpoints and outward rounding.

Endpoints are :class:`fractions.Fraction`. Long computations call
:meth:`Interval.rounded` to cap denominators at a power of two; rounding
always moves ``lo`` down and ``hi`` up, so enclosures stay valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import InvalidArgument

Number = Union[int, Fraction]
DEFAULT_BITS = 192


def _floor_dyadic(q: Fraction, bits: int) -> Fraction:
    if q == 0:
        return q
    e = bits - abs(q.numerator).bit_length() + q.denominator.bit_length()
    if e <= 0:
        return Fraction(math.floor(q / (1 << -e)) * (1 << -e))
    return Fraction(math.floor(q * (1 << e)), 1 << e)


def _ceil_dyadic(q: Fraction, bits: int) -> Fraction:
    return -_floor_dyadic(-q, bits)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise InvalidArgument(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def exact(cls, x: Number) -> "Interval":
        return cls(Fraction(x), Fraction(x))

    @staticmethod
    def lift(x: "Interval | Number") -> "Interval":
        return x if isinstance(x, Interval) else Interval.exact(x)

    def rounded(self, bits: int = DEFAULT_BITS) -> "Interval":
        return Interval(_floor_dyadic(self.lo, bits), _ceil_dyadic(self.hi, bits))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    def contains(self, x: Number | float) -> bool:
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def positive(self) -> bool:
        return self.lo > 0

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: "Interval | Number") -> "Interval":
        o = Interval.lift(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other: "Interval | Number") -> "Interval":
        return self + (-Interval.lift(other))

    def __rsub__(self, other: Number) -> "Interval":
        return Interval.lift(other) - self

    def __mul__(self, other: "Interval | Number") -> "Interval":
        o = Interval.lift(other)
        prods = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(prods), max(prods))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other: "Interval | Number") -> "Interval":
        return self * Interval.lift(other).reciprocal()

    def __rtruediv__(self, other: Number) -> "Interval":
        return Interval.lift(other) * self.reciprocal()

    def __repr__(self) -> str:
        return f"Interval[{float(self.lo):.17g}, {float(self.hi):.17g}]"


def exp_interval(x: Number, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of ``e^x`` for rational ``x``.

    The argument is halved until it is at most 1/2, the Taylor series is
    summed with a geometric tail bound, and the result is squared back.
    """
    x = Fraction(x)
    if x == 0:
        return Interval.exact(1)
    if x < 0:
        return exp_interval(-x, bits).reciprocal().rounded(bits)
    j = 0
    y = x
    while y > Fraction(1, 2):
        y /= 2
        j += 1
    target = Fraction(1, 1 << (bits + 16))
    total = Fraction(0)
    term = Fraction(1)
    i = 0
    while True:
        total += term
        i += 1
        term = term * y / i
        if term < target:
            break
    # Remaining terms: term * (1 + y/(i+1) + ...) <= 2 * term since y <= 1/2.
    iv = Interval(total, total + 2 * term).rounded(bits)
    for _ in range(j):
        iv = (iv * iv).rounded(bits)
    return iv


def sqrt_interval(n: Number, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of ``sqrt(n)``; exact when ``n`` is a rational square."""
    n = Fraction(n)
    if n < 0:
        raise InvalidArgument("negative argument")
    rn, rd = math.isqrt(n.numerator), math.isqrt(n.denominator)
    if rn * rn == n.numerator and rd * rd == n.denominator:
        return Interval.exact(Fraction(rn, rd))
    scale = 1 << bits
    r = math.isqrt(n.numerator * scale * scale // n.denominator)
    return Interval(Fraction(r, scale), Fraction(r + 1, scale))
