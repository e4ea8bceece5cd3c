"""Desk-scale harness for primes and divisor sums in residue classes.

Every bound here is asymptotic, so nothing in this module asserts one;
the scans return rows for trend tables. What is asserted are exact
identities (the decomposition of the sifted sum) and the agreement of
independent implementations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arith import PrimeTable, crt_combine, divisors, euler_phi, factorize, tau_k
from .crop import crop, sharp_weight, smooth_weight
from .errors import InvalidArgument, PropertyFailure, TableTooSmall, TooLarge
from .sieve import SieveWeights
from .tuples import AdmissibleTuple, TupleConstants

CROP_BUDGET = 10**9
IDENTITY_RTOL = 1e-6


def _require_table(table: PrimeTable, n: float) -> None:
    if n > table.limit:
        raise TableTooSmall(f"need primes up to {int(n)}", int(math.ceil(n)))


def mangoldt_array(limit: int, table: PrimeTable) -> np.ndarray:
    """``Λ(n)`` for ``0 <= n <= limit``."""
    _require_table(table, limit)
    lam = np.zeros(limit + 1, dtype=np.float64)
    for p in table.primes[table.primes <= limit].tolist():
        lp = math.log(p)
        pk = p
        while pk <= limit:
            lam[pk] = lp
            pk *= p
    return lam


def _weight_fn(sharp: bool) -> Callable:
    return sharp_weight if sharp else smooth_weight


def _window(N: float) -> np.ndarray:
    """Integers ``n`` with ``N < n <= 2N``; the smooth weight vanishes at both ends."""
    return np.arange(int(math.floor(N)) + 1, int(math.floor(2 * N)) + 1, dtype=np.int64)


@dataclass(frozen=True)
class DiscrepancyRecord:
    q: int
    a: int
    x: float
    observed: float
    expected: float
    error: float

    def __post_init__(self) -> None:
        if abs(self.error - (self.observed - self.expected)) > 1e-9 * max(1.0, abs(self.observed)):
            raise InvalidArgument("error must equal observed - expected")


def psi_progression(x: float, q: int, a: int, table: PrimeTable) -> DiscrepancyRecord:
    """``ψ(x; q, a)`` against ``x/φ(q)``."""
    if q < 1:
        raise InvalidArgument("q must be positive")
    if math.gcd(a, q) != 1:
        raise InvalidArgument(f"gcd({a}, {q}) > 1")
    n_max = int(math.floor(x))
    expected = x / euler_phi(q)
    if n_max < 2:
        return DiscrepancyRecord(q, a % q, x, 0.0, expected, -expected)
    lam = mangoldt_array(n_max, table)
    start = a % q if a % q else q
    observed = math.fsum(lam[start::q].tolist())
    return DiscrepancyRecord(q, a % q, x, observed, expected, observed - expected)


def bv_sum(x: float, Q: float, table: PrimeTable) -> float:
    """``sum_{q <= Q} max over reduced a of |ψ(x; q, a) - x/φ(q)|``."""
    n_max = int(math.floor(x))
    if Q > x:
        raise InvalidArgument("Q must not exceed x")
    lam = mangoldt_array(max(n_max, 2), table)[: n_max + 1]
    n = np.arange(n_max + 1)
    terms = []
    for q in range(1, int(math.floor(Q)) + 1):
        hist = np.bincount(n % q, weights=lam, minlength=q)
        units = np.gcd(np.arange(q), q) == 1
        terms.append(float(np.abs(hist[units] - x / euler_phi(q)).max()))
    return math.fsum(terms)


def bv_sum_reference(x: float, Q: float, table: PrimeTable) -> float:
    """Same sum, one :func:`psi_progression` call per reduced class."""
    total = []
    for q in range(1, int(math.floor(Q)) + 1):
        errs = [abs(psi_progression(x, q, a, table).error)
                for a in range(q) if math.gcd(a, q) == 1]
        total.append(max(errs))
    return math.fsum(total)


def _require_squarefree(q: int) -> None:
    if q < 1 or not factorize(q).is_squarefree:
        raise InvalidArgument(f"{q} is not squarefree")


def is_divisor_rich(q: int, z: float) -> bool:
    """Consecutive divisors of ``q`` never jump by more than a factor ``z``."""
    _require_squarefree(q)
    if z < 2:
        raise InvalidArgument("z must be at least 2")
    ds = divisors(q)
    return all(b <= z * a for a, b in zip(ds, ds[1:]))


def is_divisor_rich_cover(q: int, z: float) -> bool:
    """Every ``y`` in ``[1, q]`` has a divisor in ``(y/z, y]``.

    That divisor exists iff ``y`` lies in ``[d, dz)`` for some ``d | q``, so the
    test is whether these half-open intervals cover ``[1, q]``.
    """
    _require_squarefree(q)
    if z < 2:
        raise InvalidArgument("z must be at least 2")
    zf = Fraction(z)
    reach = Fraction(1)
    for d in sorted(divisors(q)):
        if d > reach:
            return False
        reach = max(reach, d * zf)
    return reach > q


def shift_poly_roots(H: AdmissibleTuple, h: int, q: int) -> list[int]:
    """Unit roots mod ``q`` of ``Z(X) = prod_{h' != h} (X + h' - h)``, built prime by prime."""
    if h not in H.elements:
        raise InvalidArgument(f"{h} is not an element of the tuple")
    _require_squarefree(q)
    per_prime = []
    for p in factorize(q).primes:
        roots = sorted({(h - hp) % p for hp in H.elements if hp != h} - {0})
        if not roots:
            return []
        per_prime.append([(r, p) for r in roots])
    if not per_prime:
        return [0]
    return sorted(crt_combine(choice)[0] for choice in itertools.product(*per_prime))


def shift_poly_roots_scan(H: AdmissibleTuple, h: int, q: int) -> list[int]:
    """Same roots by testing every residue."""
    others = [hp - h for hp in H.elements if hp != h]
    out = []
    for a in range(q):
        if math.gcd(a, q) != 1:
            continue
        val = 1
        for c in others:
            val = val * (a + c) % q
        if val % q == 0:
            out.append(a)
    return out


def root_count(H: AdmissibleTuple, h: int, q: int) -> int:
    """``prod over p | q`` of the number of unit roots mod ``p``."""
    _require_squarefree(q)
    return math.prod(len({(h - hp) % p for hp in H.elements if hp != h} - {0})
                     for p in factorize(q).primes)


@dataclass(frozen=True)
class ProgressionRecord:
    q: int
    a: int
    observed: float
    expected: float

    @property
    def error(self) -> float:
        return self.observed - self.expected


@dataclass
class ProgressionReport:
    total: float
    records: list[ProgressionRecord] = field(default_factory=list)


def _rich_moduli(Q: float, z: float) -> list[int]:
    return [q for q in range(2, int(math.floor(Q)) + 1)
            if factorize(q).is_squarefree and is_divisor_rich(q, z)]


def zhang_lhs(N: float, Q: float, z: float, H: AdmissibleTuple, table: PrimeTable,
              h: int | None = None, sharp: bool = False) -> ProgressionReport:
    """Sum over divisor-rich ``1 < q <= Q`` and unit roots ``a`` of ``Z`` of the weighted prime discrepancy.

    The weight has unit integral, so the expected value is ``N/φ(q)``.
    """
    _require_table(table, 2 * N)
    h = H.elements[0] if h is None else h
    ns = _window(N)
    lam = mangoldt_array(int(ns[-1]) if ns.size else 2, table)
    w = lam[ns] * np.asarray(_weight_fn(sharp)(ns / N))
    records = []
    for q in _rich_moduli(Q, z):
        hist = np.bincount(ns % q, weights=w, minlength=q)
        expected = N / euler_phi(q)
        for a in shift_poly_roots(H, h, q):
            records.append(ProgressionRecord(q, a, float(hist[a]), expected))
    return ProgressionReport(math.fsum(abs(r.error) for r in records), records)


def zhang_lhs_reference(N: float, Q: float, z: float, H: AdmissibleTuple,
                        table: PrimeTable, h: int | None = None, sharp: bool = False) -> float:
    """Term-by-term recomputation with scalar weights and a fresh root scan."""
    _require_table(table, 2 * N)
    h = H.elements[0] if h is None else h
    F = _weight_fn(sharp)
    lo, hi = int(math.floor(N)) + 1, int(math.floor(2 * N))
    total = []
    for q in range(2, int(math.floor(Q)) + 1):
        if not factorize(q).is_squarefree or not is_divisor_rich_cover(q, z):
            continue
        for a in shift_poly_roots_scan(H, h, q):
            first = lo + ((a - lo) % q)
            obs = math.fsum(math.log(_prime_of_power(n, table)) * F(n / N)
                            for n in range(first, hi + 1, q) if _prime_of_power(n, table))
            total.append(abs(obs - N / euler_phi(q)))
    return math.fsum(total)


def _prime_of_power(n: int, table: PrimeTable) -> int:
    if n < 2:
        return 0
    fac = factorize(n).factors
    return fac[0][0] if len(fac) == 1 else 0


# Cropped divisor sums.


@dataclass(frozen=True)
class CroppedError:
    S: float
    S0: float

    @property
    def E(self) -> float:
        return self.S - self.S0


def _crop_range(X: float) -> tuple[np.ndarray, np.ndarray]:
    vals = np.arange(int(math.floor(X)) + 1, int(math.ceil(2 * X)), dtype=np.int64)
    return vals, np.asarray(crop(vals / X))


def _check_crop_args(L: float, M: float, N: float, q: int, a: int) -> None:
    _require_squarefree(q)
    if math.gcd(a, q) != 1:
        raise InvalidArgument(f"gcd({a}, {q}) > 1")
    if min(L, M, N) < 1:
        raise InvalidArgument("L, M, N must be at least 1")
    if 8 * L * M * N > CROP_BUDGET:
        raise TooLarge(f"8LMN = {8 * L * M * N:.3g} exceeds the budget {CROP_BUDGET}")


def cropped_divisor_error(L: float, M: float, N: float, q: int, a: int) -> CroppedError:
    """``S``, ``S0`` for the cropped ``τ_3`` by residue histograms.

    Each variable contributes its crop mass per residue class; ``S`` is then
    a multiplicative convolution over units mod ``q``.
    """
    _check_crop_args(L, M, N, q, a)
    hists = []
    for X in (L, M, N):
        vals, wts = _crop_range(X)
        hists.append(np.bincount(vals % q, weights=wts, minlength=q))
    if q == 1:
        total = float(np.prod([h.sum() for h in hists]))
        return CroppedError(total, total)
    units = np.flatnonzero(np.gcd(np.arange(q), q) == 1)
    hl, hm, hn = (h[units] for h in hists)
    lm = np.zeros(q)
    np.add.at(lm, (units[:, None] * units[None, :]) % q, np.outer(hl, hm))
    inv = np.array([pow(int(u), -1, q) for u in units])
    S = float(np.sum(lm[units] * hists[2][(a * inv) % q]))
    S0 = float(hl.sum() * hm.sum() * hn.sum()) / len(units)
    return CroppedError(S, S0)


def cropped_divisor_error_loops(L: float, M: float, N: float, q: int, a: int,
                                order: Sequence[int] = (0, 1, 2)) -> CroppedError:
    """Literal sum over ``(l, m, n)``; ``order`` picks which variable is the outer loop."""
    _check_crop_args(L, M, N, q, a)
    ranges = [_crop_range(X) for X in (L, M, N)]
    outer, mid, inner = (ranges[i] for i in order)
    S, S0 = [], []
    for x, wx in zip(*outer):
        if wx == 0.0:
            continue
        prod = (x * mid[0][:, None] * inner[0][None, :]) % q
        wt = wx * np.outer(mid[1], inner[1])
        S.append(float(wt[prod == a % q].sum()))
        S0.append(float(wt[np.gcd(prod, q) == 1].sum()))
    phi = euler_phi(q)
    return CroppedError(math.fsum(S), math.fsum(S0) / phi)


def error_bound_hypothesis(s: int, q: int, N: float, x: float) -> bool:
    """``s | q`` and ``sN < min(q, x/q)``."""
    return q % s == 0 and s * N < min(q, x / q)


def error_bound_shape(x: float, N: float, q: int, s: int, eps: float = 0.0) -> float:
    """``x^ε (x/N)^{1/2} (q/s)^{1/4} + x^ε (xsN)^{1/3}`` without the implied constant."""
    return x**eps * ((x / N) ** 0.5 * (q / s) ** 0.25 + (x * s * N) ** (1 / 3))


def nontrivial_range(s: int, q: int, N: float, x: float, eps: float) -> bool:
    """``s^{1/2} q^{5/2} x^{ε-1} < sN < x^{-ε} min(q, x^2 q^{-3})``."""
    lo = s**0.5 * q**2.5 * x ** (eps - 1)
    hi = x ** (-eps) * min(q, x * x / q**3)
    return lo < s * N < hi


def rich_modulus_range(q: int, N: float, z: float, x: float, eps: float) -> bool:
    """``q <= (N/z)^{1/8} x^{1/2 - ε}``."""
    return q <= (N / z) ** 0.125 * x ** (0.5 - eps)


def twisted_rich_modulus_range(q: int, N: float, z: float, x: float, d: int, eps: float) -> bool:
    """``q <= (N/z)^{1/8} (x/d)^{1/2} x^{-ε}``."""
    return q <= (N / z) ** 0.125 * (x / d) ** 0.5 * x ** (-eps)


@dataclass(frozen=True)
class CropScanRow:
    L: float
    M: float
    N: float
    q: int
    a: int
    s: int
    E: float
    normalized: float
    shape: float
    hypothesis: bool


def crop_scan(grid: Sequence[tuple[float, float, float, int]], a: int = 1,
              eps: float = 0.0) -> list[CropScanRow]:
    """``|E| q/x`` and the bound shape over ``(L, M, N, q)``; the largest admissible ``s`` is used."""
    rows = []
    for L, M, N, q in grid:
        x = L * M * N
        err = cropped_divisor_error(L, M, N, q, a).E
        cands = [s for s in divisors(q) if error_bound_hypothesis(s, q, N, x)]
        s = max(cands) if cands else 1
        rows.append(CropScanRow(L, M, N, q, a, s, err, abs(err) * q / x,
                                error_bound_shape(x, N, q, s, eps), bool(cands)))
    return rows


# The sifted sum and its decomposition.


def _residue_mask(ns: np.ndarray, p: int, residues: set[int]) -> np.ndarray:
    table = np.zeros(p, dtype=bool)
    table[list(residues)] = True
    return table[ns % p]


@dataclass(frozen=True)
class GPYReport:
    W: float
    V: dict[int, float]
    U: float
    log_N: float
    residual: float
    scale: float
    U_main: float

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale


def _log_moment(F: Callable, points: int = 20001) -> float:
    """``∫ F(t) log t dt`` over ``[1, 2]`` by composite Simpson."""
    t = np.linspace(1.0, 2.0, points)
    y = np.asarray(F(t)) * np.log(t)
    h = (t[-1] - t[0]) / (points - 1)
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


def sieve_divisor_sums(ns: np.ndarray, H: AdmissibleTuple, weights: SieveWeights) -> np.ndarray:
    """``sum over d | Q(n) of λ_d`` for each ``n``."""
    if weights.lam is None:
        raise InvalidArgument("weights carry no lambda")
    masks: dict[int, np.ndarray] = {}
    out = np.zeros(ns.size, dtype=np.float64)
    for d, lam in weights.lam.items():
        ps = weights.primes.get(d) or factorize(d).primes
        m = np.ones(ns.size, dtype=bool)
        for p in ps:
            if p not in masks:
                masks[p] = _residue_mask(ns, p, {e % p for e in H.elements})
            m &= masks[p]
        out[m] += lam
    return out


def gpy_W(N: float, H: AdmissibleTuple, weights: SieveWeights, consts: TupleConstants,
          table: PrimeTable, sharp: bool = False) -> GPYReport:
    """``W``, every ``V_h`` and ``U`` by direct summation, with the decomposition residual.

    ``W = sum_n F(n/N) a_n sum_{d | Q(n)} λ_d`` over ``(Q(n), Δ) = 1``, where
    ``a_n = sum_h Λ(n - h) - log n``. Raises if ``W`` differs from
    ``sum_h V_h - U log N`` beyond the relative tolerance.
    """
    _require_table(table, 2 * N)
    F = _weight_fn(sharp)
    ns = _window(N)
    ns = ns[ns > H.elements[-1]]
    lam_arr = mangoldt_array(int(2 * N), table)
    keep = np.ones(ns.size, dtype=bool)
    for p in consts.delta_primes:
        keep &= ~_residue_mask(ns, p, {e % p for e in H.elements})
    ns = ns[keep]
    Fw = np.asarray(F(ns / N))
    sig = sieve_divisor_sums(ns, H, weights)
    logn = np.log(ns)
    log_N = math.log(N)
    shifted = {h: lam_arr[ns - h] for h in H.elements}
    a_n = sum(shifted.values()) - logn
    W_terms = Fw * a_n * sig
    W = math.fsum(W_terms.tolist())
    V = {h: math.fsum((Fw * shifted[h] * sig).tolist()) for h in H.elements}
    U = math.fsum((Fw * logn / log_N * sig).tolist())
    residual = abs(W - (math.fsum(V.values()) - U * log_N))
    scale = max(1.0, math.fsum(np.abs(W_terms).tolist()),
                math.fsum(abs(v) for v in V.values()) + abs(U) * log_N)
    G = math.fsum(lam * tau_k(d, H.k) / d for d, lam in (weights.lam or {}).items())
    mass = 1.0
    U_main = float(consts.gamma_H) * G * (mass * N + _log_moment(F) * N / log_N)
    rep = GPYReport(W, V, U, log_N, residual, scale, U_main)
    if rep.relative_residual > IDENTITY_RTOL:
        raise PropertyFailure("W != sum V_h - U log N", rep)
    return rep


def remainder_R_h(N: float, H: AdmissibleTuple, h: int, weights: SieveWeights,
                  consts: TupleConstants, table: PrimeTable, sharp: bool = False) -> float:
    """The remainder in the evaluation of ``V_h``.

    Sums over ``d`` of ``λ_d`` times the class-restricted prime sum minus its
    share of the coprime total, where the classes are ``α mod Δ`` with
    ``(α Z_h(α), Δ) = 1`` and unit ``β mod d`` with ``d | Z_h(β)``, for
    ``Z_h(X) = prod_{h' != h} (X + h - h')``.
    """
    if h not in H.elements:
        raise InvalidArgument(f"{h} is not an element of the tuple")
    if weights.lam is None:
        raise InvalidArgument("weights carry no lambda")
    _require_table(table, 2 * N)
    ns = _window(N)
    lam_arr = mangoldt_array(int(2 * N), table)
    ns = ns[lam_arr[ns] > 0]
    w = lam_arr[ns] * np.asarray(_weight_fn(sharp)(ns / N))
    root_sets = {}

    def roots(p: int) -> set[int]:
        if p not in root_sets:
            root_sets[p] = {(hp - h) % p for hp in H.elements if hp != h}
        return root_sets[p]

    alpha_ok = np.ones(ns.size, dtype=bool)
    A = 1
    for p in consts.delta_primes:
        bad = roots(p) | {0}
        alpha_ok &= ~_residue_mask(ns, p, bad)
        A *= p - len(bad)
    delta_phi = euler_phi(consts.delta)
    terms = []
    for d, lam in weights.lam.items():
        ps = weights.primes.get(d) or factorize(d).primes
        if set(ps) & set(consts.delta_primes):
            raise InvalidArgument(f"lambda supported on {d}, not coprime to Delta")
        m = alpha_ok.copy()
        coprime = np.ones(ns.size, dtype=bool)
        B = 1
        for p in ps:
            good = roots(p) - {0}
            m &= _residue_mask(ns, p, good)
            coprime &= (ns % p) != 0
            B *= len(good)
        for p in consts.delta_primes:
            coprime &= (ns % p) != 0
        share = A * B / (delta_phi * euler_phi(d))
        terms.append(lam * (math.fsum(w[m].tolist()) - share * math.fsum(w[coprime].tolist())))
    return math.fsum(terms)
