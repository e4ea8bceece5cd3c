"""Certified evaluation of the positivity constant and the δ, k conditions.

Every condition compares exact rationals against outward-rounded interval
enclosures and is reported true only when it holds at the unfavourable end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidArgument, NotFound, PropertyFailure
from .interval import DEFAULT_BITS, Interval, exp_interval, sqrt_interval
from .sieve import nice_l

SEARCH_CAP = 10**8
LEVEL_Z_EXPONENT = Fraction(86, 207)
LEVEL_N_EXPONENT = Fraction(104, 207)
DELTA_UPPER_SCALE = Fraction(1, 144)
DELTA_UPPER_SHIFT = 43


@dataclass(frozen=True)
class ZhangParams:
    k: int
    l: int
    s: Fraction
    theta: Fraction
    delta: Fraction
    eps: Fraction

    def __post_init__(self) -> None:
        if self.theta != Fraction(1, 2) + self.delta:
            raise InvalidArgument("theta must equal 1/2 + delta")

    @classmethod
    def default(cls) -> "ZhangParams":
        k = 419**2
        delta = Fraction(1, 418)
        return cls(k=k, l=nice_l(k), s=Fraction(4494), theta=Fraction(1, 2) + delta,
                   delta=delta, eps=Fraction(0))


@dataclass(frozen=True)
class Check:
    """A certified condition: ``ok`` holds iff ``margin.lo > 0`` and nothing was flagged."""

    ok: bool
    margin: Interval
    flagged: bool = False
    note: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _exact(x: float | int | Fraction) -> Fraction:
    return Fraction(x)


def inv_sqrt_interval(k: int, bits: int = DEFAULT_BITS) -> Interval:
    return sqrt_interval(k, bits).reciprocal().rounded(bits)


def exp_neg_ratio(k: int, s: float | Fraction, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of ``e^{-k/s}``."""
    return exp_interval(-Fraction(k) / _exact(s), bits)


def loss_term(k: int, s: float | Fraction, bits: int = DEFAULT_BITS) -> Interval:
    """Enclosure of ``2 s e^{-k/s}``."""
    return (2 * _exact(s) * exp_neg_ratio(k, s, bits)).rounded(bits)


def c_k(theta: Fraction, s: float | Fraction, k: int, bits: int = DEFAULT_BITS) -> Interval:
    """``2θ(1 - 2se^{-k/s})/(1 + 2/sqrt(k) + 2/k) - 1`` as an interval."""
    if k < 1 or s < 1:
        raise InvalidArgument("need k >= 1 and s >= 1")
    num = 2 * Fraction(theta) * (1 - loss_term(k, s, bits))
    den = 1 + 2 * inv_sqrt_interval(k, bits) + Fraction(2, k)
    return (num / den - 1).rounded(bits)


def delta_upper_ok(delta: Fraction, s: float | Fraction) -> Check:
    """``δ < (1/144)(1 - 43/s)``, exact. Flagged as vacuous when ``s <= 43``."""
    s = _exact(s)
    rhs = DELTA_UPPER_SCALE * (1 - DELTA_UPPER_SHIFT / s)
    margin = Interval.exact(rhs - Fraction(delta))
    if s <= DELTA_UPPER_SHIFT:
        return Check(False, margin, flagged=True, note="right side is not positive")
    return Check(margin.lo > 0, margin)


def delta_lower_ok(delta: Fraction, k: int, s: float | Fraction,
                   bits: int = DEFAULT_BITS) -> Check:
    """``δ > 1/sqrt(k) + 1/k + (1 + 2δ) s e^{-k/s}`` with a certified margin."""
    if k < 1:
        raise InvalidArgument("k must be a positive integer")
    delta = Fraction(delta)
    s = _exact(s)
    rhs = inv_sqrt_interval(k, bits) + Fraction(1, k) + (1 + 2 * delta) * s * exp_neg_ratio(k, s, bits)
    margin = (delta - rhs).rounded(bits)
    return Check(margin.lo > 0, margin)


def level_condition(z: float, D: float, N: float, eps: Fraction) -> bool:
    """``z^{86/207} D <= N^{104/207 - ε}`` compared in logarithms."""
    if min(z, D, N) <= 1:
        raise InvalidArgument("arguments must exceed 1")
    lhs = float(LEVEL_Z_EXPONENT) * math.log(z) + math.log(D)
    rhs = float(LEVEL_N_EXPONENT - Fraction(eps)) * math.log(N)
    return lhs <= rhs * (1 + 1e-15)


def level_exponent_margin(delta: Fraction, s: float | Fraction, eps: Fraction = Fraction(0)) -> Fraction:
    """Exact exponent slack in the level condition for ``D = N^{1/2+δ}``, ``z = D^{1/2s}``.

    Positive iff the condition holds for every large ``N``.
    """
    s = _exact(s)
    lhs = (Fraction(1, 2) + Fraction(delta)) * (1 + LEVEL_Z_EXPONENT / (2 * s))
    return LEVEL_N_EXPONENT - Fraction(eps) - lhs


def _ok(delta: Fraction, k: int, s: Fraction) -> bool:
    return delta_lower_ok(delta, k, s, bits=128).ok


def search_min_k(delta: Fraction, s: float | Fraction) -> int:
    """Smallest ``k`` passing :func:`delta_lower_ok`.

    The right side decreases in ``k``, so a bisection is exact; the
    neighbours of the answer are re-checked anyway.
    """
    delta = Fraction(delta)
    s = _exact(s)
    if delta <= 0:
        raise NotFound("no k works for non-positive delta")
    hi = 1
    while not _ok(delta, hi, s):
        hi *= 2
        if hi > SEARCH_CAP:
            if _ok(delta, SEARCH_CAP, s):
                hi = SEARCH_CAP
                break
            raise NotFound(f"no k <= {SEARCH_CAP}")
    lo = hi // 2 if hi > 1 else 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _ok(delta, mid, s):
            hi = mid
        else:
            lo = mid
    for j in (hi - 2, hi - 1):
        if j >= 1 and _ok(delta, j, s):
            raise PropertyFailure("monotonicity failed below the minimum", j)
    for j in (hi + 1, hi + 2):
        if not _ok(delta, j, s):
            raise PropertyFailure("monotonicity failed above the minimum", j)
    return hi


def search_min_square_k(delta: Fraction, s: float | Fraction) -> int:
    """Smallest perfect square ``k = r^2`` passing :func:`delta_lower_ok`."""
    k0 = search_min_k(delta, s)
    r = math.isqrt(k0)
    if r * r < k0:
        r += 1
    if not _ok(Fraction(delta), r * r, _exact(s)):
        raise PropertyFailure("square above the minimum fails", r * r)
    return r * r


@dataclass(frozen=True)
class PipelineRow:
    name: str
    ok: bool
    margin: Interval | None
    note: str = ""


def pipeline(params: ZhangParams | None = None) -> list[PipelineRow]:
    """Evaluate the whole chain of conditions for ``params``."""
    p = params or ZhangParams.default()
    rows = []
    up = delta_upper_ok(p.delta, p.s)
    rows.append(PipelineRow("delta_upper", up.ok, up.margin, up.note))
    low = delta_lower_ok(p.delta, p.k, p.s)
    rows.append(PipelineRow("delta_lower", low.ok, low.margin))
    ck = c_k(p.theta, p.s, p.k)
    rows.append(PipelineRow("c_k_positive", ck.lo > 0, ck))
    loss = loss_term(p.k, p.s)
    rows.append(PipelineRow("loss_below_1e-13", loss.hi < Fraction(1, 10**13), loss))
    lev = level_exponent_margin(p.delta, p.s, p.eps)
    rows.append(PipelineRow("level_exponent", lev > 0, Interval.exact(lev),
                            "informational"))
    return rows
