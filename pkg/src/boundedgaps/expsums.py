"""Complete exponential sums: Ramanujan, Kloosterman and the correlation sum.

``K(u, v, w; k)`` denotes the three-variable sum over ``x, y, z mod k`` of
``e_k(inv((x+u)y) - inv(xz) + vz + wy)``, restricted to points where both
inverses exist. Also here: coefficient systems ``γ_s``, the ``σ_{s,s'}``
algebra and the exact split of the dispersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .arith import divisors, factorize, mobius, primes_up_to
from .crop import crop
from .errors import InvalidArgument, PropertyFailure, TooLarge

TWO_PI = 2.0 * math.pi
FAST_PATH_CAP = 10**4
BRUTE_CAP = 300


def e_k(t: int | np.ndarray, k: int) -> complex | np.ndarray:
    """``exp(2πi t/k)`` with ``t`` reduced mod ``k`` first."""
    return np.exp(1j * TWO_PI * (np.asarray(t) % k) / k)


@dataclass(frozen=True)
class ExpSumValue:
    re: float
    im: float
    modulus: int
    exact_hint: int | None = None

    @classmethod
    def of(cls, value: complex, modulus: int, exact_hint: int | None = None) -> "ExpSumValue":
        return cls(float(value.real), float(value.imag), modulus, exact_hint)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return abs(self.value)


def ramanujan(a: int, q: int) -> int:
    """``R(a, q)`` by the divisor formula ``sum_{d | (a, q)} d μ(q/d)``."""
    if q < 1:
        raise InvalidArgument("q must be positive")
    g = math.gcd(a, q)
    return sum(d * mobius(q // d) for d in divisors(g))


@lru_cache(maxsize=512)
def inverse_table(k: int) -> np.ndarray:
    """``inv[x]`` is the inverse of ``x`` mod ``k``, or ``-1`` for non-units."""
    inv = np.full(k, -1, dtype=np.int64)
    for x in range(k):
        if math.gcd(x, k) == 1:
            inv[x] = pow(x, -1, k) if k > 1 else 0
    return inv


def units(k: int) -> np.ndarray:
    return np.flatnonzero(inverse_table(k) >= 0)


def ramanujan_direct(a: int, q: int) -> complex:
    """``R(a, q)`` by summing ``e(ax/q)`` over units."""
    return complex(np.sum(e_k(a * units(q), q)))


def kloosterman(a: int, b: int, q: int) -> ExpSumValue:
    """``sum over units x of e((ax + b inv(x))/q)``, by direct summation."""
    if q < 1:
        raise InvalidArgument("q must be positive")
    xs = units(q)
    inv = inverse_table(q)[xs]
    return ExpSumValue.of(complex(np.sum(e_k(a * xs + b * inv, q))), q)


def kloosterman_table(b: int, q: int) -> np.ndarray:
    """``Kl(a, b; q)`` for every ``a mod q`` at once, via one inverse FFT."""
    inv = inverse_table(q)
    xs = np.flatnonzero(inv >= 0)
    c = np.zeros(q, dtype=np.complex128)
    c[xs] = e_k(b * inv[xs], q)
    return q * np.fft.ifft(c)


def _require_squarefree(k: int) -> None:
    if k < 1 or not factorize(k).is_squarefree:
        raise InvalidArgument(f"{k} is not a squarefree positive integer")


def correlation_K(u: int, v: int, w: int, k: int) -> ExpSumValue:
    """Fast path: for each admissible ``x`` the ``y`` and ``z`` sums are Kloosterman sums.

    ``sum_y e(inv((x+u)y) + wy) = Kl(inv(x+u), w)`` and
    ``sum_z e(-inv(xz) + vz) = Kl(-inv(x), v)``.
    """
    _require_squarefree(k)
    if k > FAST_PATH_CAP:
        raise TooLarge(f"k={k} beyond fast-path cap {FAST_PATH_CAP}")
    inv = inverse_table(k)
    xs = np.arange(k)
    ok = (inv[xs] >= 0) & (inv[(xs + u) % k] >= 0)
    xs = xs[ok]
    tw = kloosterman_table(w, k)
    tv = kloosterman_table(v, k)
    total = np.sum(tw[inv[(xs + u) % k]] * tv[(-inv[xs]) % k])
    return ExpSumValue.of(complex(total), k)


def correlation_K_bruteforce(u: int, v: int, w: int, k: int) -> ExpSumValue:
    """Literal triple sum over ``x, y, z mod k``."""
    _require_squarefree(k)
    if k > BRUTE_CAP:
        raise TooLarge(f"k={k} beyond brute-force cap {BRUTE_CAP}")
    inv = inverse_table(k)
    ys = np.arange(k)
    total = 0j
    for x in range(k):
        xu = (x + u) % k
        py = inv[(xu * ys) % k]
        pz = inv[(x * ys) % k]
        vy = py >= 0
        vz = pz >= 0
        if not (vy.any() and vz.any()):
            continue
        phase_y = (py[vy] + w * ys[vy]) % k
        phase_z = (-pz[vz] + v * ys[vz]) % k
        grid = (phase_y[:, None] + phase_z[None, :]) % k
        total += np.sum(np.exp(1j * TWO_PI * grid / k))
    return ExpSumValue.of(total, k)


def correlation_K_matrix(u: int, k: int) -> np.ndarray:
    """``K(u, v, w; k)`` for all ``(v, w)`` as ``out[v, w]``.

    Builds ``T[y, z] = sum_x e(inv((x+u)y) - inv(xz))`` and applies the
    additive characters in ``y`` and ``z`` by matrix products.
    """
    inv = inverse_table(k)
    r = np.arange(k)
    xs = r[(inv >= 0) & (inv[(r + u) % k] >= 0)]
    yu = r[inv >= 0]
    A = np.zeros((xs.size, k), dtype=np.complex128)
    B = np.zeros((xs.size, k), dtype=np.complex128)
    A[:, yu] = e_k(inv[(xs + u) % k][:, None] * inv[yu][None, :], k)
    B[:, yu] = e_k(-inv[xs][:, None] * inv[yu][None, :], k)
    T = A.T @ B
    E = e_k(r[:, None] * r[None, :], k)
    return (E @ T @ E.T).T


def crt_twisted_product(u: int, v: int, w: int, k1: int, k2: int) -> complex:
    """``K(u, c1²v, c1²w; k1) K(u, c2²v, c2²w; k2)`` with ``c1 = inv(k2) mod k1``, ``c2 = inv(k1) mod k2``."""
    if math.gcd(k1, k2) != 1:
        raise InvalidArgument("moduli must be coprime")
    c1 = pow(k2, -1, k1) if k1 > 1 else 0
    c2 = pow(k1, -1, k2) if k2 > 1 else 0
    a = correlation_K(u % k1, c1 * c1 * v % k1, c1 * c1 * w % k1, k1).value
    b = correlation_K(u % k2, c2 * c2 * v % k2, c2 * c2 * w % k2, k2).value
    return a * b


@dataclass
class CorrelationReport:
    primes_checked: list[int] = field(default_factory=list)
    closed_form_max_error: float = 0.0
    closed_form_witness: tuple | None = None
    max_imag: float = 0.0
    generic_max_ratio: float = 0.0
    crt_max_error: float = 0.0
    crt_witness: tuple | None = None
    bound_checked: int = 0
    bound_violations: list[tuple] = field(default_factory=list)
    corrected_bound_violations: list[tuple] = field(default_factory=list)

    @property
    def failures(self) -> list[str]:
        out = []
        if self.closed_form_max_error > 1e-6:
            out.append(f"closed form mismatch at {self.closed_form_witness}")
        if self.crt_max_error > 1e-6:
            out.append(f"CRT mismatch at {self.crt_witness}")
        if self.bound_violations:
            out.append(f"K(0,v,w;k) bound violated at {self.bound_violations[0]}")
        return out

    def raise_if_failed(self) -> None:
        if self.failures:
            raise PropertyFailure("; ".join(self.failures))


def check_closed_forms(p_max: int, report: CorrelationReport | None = None) -> CorrelationReport:
    """Compare every ``K(u, v, w; p)``, ``p <= p_max``, with the degenerate closed forms."""
    rep = report or CorrelationReport()
    for p in primes_up_to(max(p_max, 2)):
        if p > p_max:
            break
        rep.primes_checked.append(p)
        R = np.array([ramanujan(a, p) for a in range(p)], dtype=np.float64)
        vv, ww = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
        for u in range(p):
            K = correlation_K_matrix(u, p)
            rep.max_imag = max(rep.max_imag, float(np.abs(K.imag).max()))
            if u == 0:
                expect = R[(vv + ww) % p] * p - R[vv] * R[ww]
                mask = np.ones((p, p), dtype=bool)
            else:
                ubar = pow(u, -1, p)
                kl = kloosterman_table(ubar, p).real  # Kl(a, ubar) = Kl(ubar, a)
                expect = np.full((p, p), np.nan)
                expect[0, :] = kl + R
                expect[:, 0] = kl + R
                mask = (vv == 0) | (ww == 0)
                gen = ~mask
                if gen.any():
                    rep.generic_max_ratio = max(rep.generic_max_ratio,
                                                float(np.abs(K[gen]).max()) / p**1.5)
            err = np.abs(K - expect)[mask]
            if err.size and float(err.max()) > rep.closed_form_max_error:
                idx = np.argwhere(mask)[int(np.argmax(err))]
                rep.closed_form_max_error = float(err.max())
                rep.closed_form_witness = (p, u, int(idx[0]), int(idx[1]))
    return rep


def check_crt(ks: Iterable[int], triples: int, rng: np.random.Generator,
              report: CorrelationReport | None = None) -> CorrelationReport:
    """Brute-force ``K`` over ``k = k1 k2`` against the twisted component product."""
    rep = report or CorrelationReport()
    for k in ks:
        fac = factorize(k).primes
        if len(fac) < 2:
            raise InvalidArgument(f"{k} needs two coprime factors")
        k1 = fac[0]
        k2 = k // k1
        for _ in range(triples):
            u, v, w = (int(x) for x in rng.integers(0, k, size=3))
            brute = correlation_K_bruteforce(u, v, w, k).value
            prod = crt_twisted_product(u, v, w, k1, k2)
            err = abs(brute - prod)
            if err > rep.crt_max_error:
                rep.crt_max_error = err
                rep.crt_witness = (k, u, v, w)
    return rep


def squarefree_composites(k_max: int) -> list[int]:
    return [k for k in range(6, k_max + 1)
            if factorize(k).is_squarefree and len(factorize(k).factors) >= 2]


def check_zero_shift_bound(k_max: int, samples: int, rng: np.random.Generator,
                           per_modulus: int = 4, report: CorrelationReport | None = None) -> CorrelationReport:
    """Test ``|K(0,v,w;k)| <= k (v+w,k)/(vw,k)`` on sampled squarefree composite ``k``.

    Also tests the variant with ``prod (p+1)`` over ``p | k`` in place of ``k``.
    """
    rep = report or CorrelationReport()
    pool = squarefree_composites(k_max)
    chosen = rng.choice(pool, size=min(samples, len(pool)), replace=False)
    for k in sorted(int(x) for x in chosen):
        sigma = math.prod(p + 1 for p in factorize(k).primes)
        for _ in range(per_modulus):
            v, w = (int(x) for x in rng.integers(0, k, size=2))
            val = abs(correlation_K(0, v, w, k))
            factor = math.gcd(v + w, k) / math.gcd(v * w, k)
            rep.bound_checked += 1
            if val > k * factor + 1e-6:
                rep.bound_violations.append((k, v, w, val, k * factor))
            if val > sigma * factor + 1e-6:
                rep.corrected_bound_violations.append((k, v, w, val, sigma * factor))
    return rep


def verify_prop54(p_max: int = 31, composite_max: int = 1000, samples: int = 60,
                  seed: int = 0, crt_moduli: Sequence[int] = (15, 21, 35),
                  crt_triples: int = 5) -> CorrelationReport:
    """Run every check on the correlation sum and collect one report."""
    if p_max > 100:
        raise TooLarge("p_max beyond the triple-loop regime")
    rng = np.random.default_rng(seed)
    rep = check_closed_forms(p_max)
    check_crt(crt_moduli, crt_triples, rng, rep)
    check_zero_shift_bound(composite_max, samples, rng, report=rep)
    return rep


def weil_scan(p: int) -> float:
    """``max |Kl(a, b; p)| / (2 sqrt(p))`` over ``0 < a, b < p``."""
    worst = 0.0
    for b in range(1, p):
        worst = max(worst, float(np.abs(kloosterman_table(b, p)[1:]).max()))
    return worst / (2.0 * math.sqrt(p))


def shape_constant_scan(k_max: int, samples: int, rng: np.random.Generator) -> float:
    """Largest ``|K| (vw,k)^{1/2} / ((u,k)^{1/2} k^{3/2})`` over sampled squarefree ``k``."""
    pool = [k for k in range(2, k_max + 1) if factorize(k).is_squarefree]
    worst = 0.0
    for k in rng.choice(pool, size=min(samples, len(pool)), replace=False):
        k = int(k)
        u, v, w = (int(x) for x in rng.integers(0, k, size=3))
        val = abs(correlation_K(u, v, w, k))
        worst = max(worst, val * math.sqrt(math.gcd(v * w, k)) / (math.sqrt(math.gcd(u, k)) * k**1.5))
    return worst


# Coefficient systems and the dispersion.


@dataclass(frozen=True)
class GammaSystem:
    """``γ_s(b)`` tables for each modulus ``s``; ``rho`` holds the declared mass bounds."""

    tables: dict[int, np.ndarray]
    rho: dict[int, float]

    def __post_init__(self) -> None:
        for s, tab in self.tables.items():
            if tab.shape != (s,):
                raise InvalidArgument(f"table for s={s} must have length s")
            if np.any(np.abs(tab) > 1 + 1e-12):
                raise InvalidArgument(f"|gamma_{s}| exceeds 1")
            nonunit = inverse_table(s) < 0
            if np.any(tab[nonunit] != 0):
                raise InvalidArgument(f"gamma_{s} is nonzero off the units")
            if float(np.abs(tab).sum()) > self.rho[s] + 1e-9:
                raise InvalidArgument(f"mass of gamma_{s} exceeds rho({s})")

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(sorted(self.tables))

    def __call__(self, s: int, b: int | np.ndarray) -> complex | np.ndarray:
        return self.tables[s][np.asarray(b) % s]

    def total(self, s: int) -> complex:
        """``γ(s) = sum over b mod s of γ_s(b)``."""
        return complex(self.tables[s].sum())

    def within_tau_power(self, j: int) -> bool:
        from .arith import tau_k
        return all(self.rho[s] <= tau_k(s, 2) ** j for s in self.tables)

    @classmethod
    def unit_indicator(cls, moduli: Iterable[int]) -> "GammaSystem":
        tabs = {s: (inverse_table(s) >= 0).astype(np.complex128) for s in moduli}
        return cls(tabs, {s: float(np.abs(t).sum()) for s, t in tabs.items()})

    @classmethod
    def random_unimodular(cls, moduli: Iterable[int], rng: np.random.Generator) -> "GammaSystem":
        tabs = {}
        for s in moduli:
            unit = inverse_table(s) >= 0
            t = np.zeros(s, dtype=np.complex128)
            t[unit] = np.exp(1j * TWO_PI * rng.random(int(unit.sum())))
            tabs[s] = t
        return cls(tabs, {s: float(np.abs(t).sum()) for s, t in tabs.items()})

    @classmethod
    def root_indicator(cls, moduli: Iterable[int], shifts: Sequence[int], h: int,
                       rng: np.random.Generator) -> "GammaSystem":
        """``±1`` on the unit roots of ``prod_{h' != h}(X + h' - h)`` mod ``s``."""
        from .equidist import shift_poly_roots
        from .tuples import AdmissibleTuple

        H = AdmissibleTuple.of(shifts)
        tabs = {}
        for s in moduli:
            t = np.zeros(s, dtype=np.complex128)
            for a in shift_poly_roots(H, h, s):
                t[a] = 1.0 if rng.random() < 0.5 else -1.0
            tabs[s] = t
        return cls(tabs, {s: float(np.abs(t).sum()) for s, t in tabs.items()})


def _lift_unit(e: int, c: int, s_prime: int) -> int:
    """A representative of ``e mod c`` that is a unit mod ``s_prime`` (``c | s_prime``)."""
    if math.gcd(e, c) != 1:
        return e
    other = s_prime // c
    if other == 1:
        return e % s_prime
    t = ((1 - e) * pow(c, -1, other)) % other
    return (e + c * t) % s_prime


def sigma_ss(e: int, s: int, s_prime: int, gammas: GammaSystem) -> complex:
    """``[s,s']^{-1} sum over ω mod [s,s'] of γ_s(ω) γ_{s'}(ω e)``.

    ``e`` matters only mod ``c = (s, s')``; it is first moved to a class
    representative coprime to ``s'``, which is what the identity with
    ``n' ≡ e n (mod c)`` requires.
    """
    c = math.gcd(s, s_prime)
    L = s // c * s_prime
    e1 = _lift_unit(e % c if c > 1 else e, c, s_prime)
    om = np.arange(L)
    return complex(np.sum(gammas(s, om) * gammas(s_prime, om * e1))) / L


def sigma_identity_residual(s: int, s_prime: int, n: int, n_prime: int,
                            gammas: GammaSystem) -> float:
    """``|sum_ω γ_s(ωn) γ_{s'}(ωn') - [s,s'] σ(e)|`` with ``n' ≡ e n (mod c)``."""
    if math.gcd(n, s) != 1 or math.gcd(n_prime, s_prime) != 1:
        raise InvalidArgument("need (n, s) = (n', s') = 1")
    c = math.gcd(s, s_prime)
    L = s // c * s_prime
    e = (n_prime * pow(n, -1, c)) % c if c > 1 else 0
    om = np.arange(L)
    lhs = complex(np.sum(gammas(s, om * n) * gammas(s_prime, om * n_prime)))
    return abs(lhs - L * sigma_ss(e, s, s_prime, gammas))


def sigma_sum_rule_residual(s: int, s_prime: int, gammas: GammaSystem) -> float:
    """``|[s,s'] sum_{e mod c} σ(e) - γ(s) γ(s')|``."""
    c = math.gcd(s, s_prime)
    L = s // c * s_prime
    lhs = L * sum(sigma_ss(e, s, s_prime, gammas) for e in range(c))
    return abs(lhs - gammas.total(s) * gammas.total(s_prime))


@dataclass(frozen=True)
class DispersionInstance:
    """Data for the dispersion of one residue class ``a mod r``.

    ``beta[i]`` is the coefficient of ``n = N + i`` for ``N <= n < 2N``; the
    ``m`` weights are ``crop(m/M)``.
    """

    r: int
    a: int
    N: int
    M: int
    beta: np.ndarray
    gammas: GammaSystem

    def __post_init__(self) -> None:
        if not factorize(self.r).is_squarefree:
            raise InvalidArgument("r must be squarefree")
        if math.gcd(self.a, self.r) != 1:
            raise InvalidArgument("a must be a unit mod r")
        if self.beta.shape != (self.N,):
            raise InvalidArgument("beta must cover N <= n < 2N")
        for s in self.gammas.moduli:
            if not factorize(self.r * s).is_squarefree:
                raise InvalidArgument(f"gamma_{s} needs r*s squarefree")

    @property
    def ns(self) -> np.ndarray:
        return np.arange(self.N, 2 * self.N)

    @property
    def ms(self) -> np.ndarray:
        m = np.arange(self.M, 2 * self.M + 1)
        return m[np.gcd(m, self.r) == 1]

    def f_weights(self) -> np.ndarray:
        return np.asarray(crop(self.ms / self.M))


@dataclass(frozen=True)
class DispersionParts:
    D: float
    D1: float
    D2: float
    D3: float

    @property
    def residual(self) -> float:
        return abs(self.D - (self.D1 - 2 * self.D2 + self.D3))

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.D1) + 2 * abs(self.D2) + abs(self.D3))


def dispersion_split(inst: DispersionInstance) -> DispersionParts:
    """``D`` from its definition and ``D1, D2, D3`` from the opened square.

    ``D = sum_m f(m/M) |A_m - B_m|^2`` where ``A_m`` sums ``β_n z(mn)`` over
    ``mn ≡ a (r)`` and ``B_m`` is ``φ(r)^{-1}`` times the sum over ``(n, r) = 1``,
    with ``z(b) = sum_s γ_s(b)``. The parts are accumulated per pair ``(s, s')``.
    """
    r, a = inst.r, inst.a
    ns, ms = inst.ns, inst.ms
    f = inst.f_weights()
    phi_r = int(np.sum(inverse_table(r) >= 0)) if r > 1 else 1
    beta = inst.beta.astype(np.complex128)
    prod = ms[:, None] * ns[None, :]
    in_class = (prod % r) == (a % r)
    coprime = (np.gcd(ns, r) == 1)[None, :]
    moduli = inst.gammas.moduli
    Z = {s: inst.gammas(s, prod) for s in moduli}
    z_total = sum(Z.values()) if moduli else np.zeros_like(prod, dtype=np.complex128)

    A = np.sum(np.where(in_class, beta[None, :] * z_total, 0), axis=1)
    B = np.sum(np.where(coprime, beta[None, :] * z_total, 0), axis=1) / phi_r
    D = math.fsum((f * np.abs(A - B) ** 2).tolist())

    A_s = {s: np.sum(np.where(in_class, beta[None, :] * Z[s], 0), axis=1) for s in moduli}
    B_s = {s: np.sum(np.where(coprime, beta[None, :] * Z[s], 0), axis=1) / phi_r for s in moduli}
    d1, d2, d3 = [], [], []
    for s in moduli:
        for sp in moduli:
            d1.append(float(np.sum(f * A_s[s] * np.conj(A_s[sp])).real))
            d2.append(float(np.sum(f * A_s[s] * np.conj(B_s[sp])).real))
            d3.append(float(np.sum(f * B_s[s] * np.conj(B_s[sp])).real))
    return DispersionParts(D=D, D1=math.fsum(d1), D2=math.fsum(d2), D3=math.fsum(d3))


def _squarefree_upto(n: int) -> list[int]:
    return [q for q in range(1, n + 1) if factorize(q).is_squarefree]


def random_gamma_system(moduli: Sequence[int], rng: np.random.Generator) -> GammaSystem:
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return GammaSystem.unit_indicator(moduli)
    if kind == 1:
        return GammaSystem.random_unimodular(moduli, rng)
    shifts = sorted(set(int(x) for x in rng.choice(np.arange(0, 30, 2), size=3, replace=False)))
    return GammaSystem.root_indicator(moduli, shifts, shifts[0], rng)


def random_dispersion_instance(rng: np.random.Generator, r_max: int = 50,
                               n_max: int = 500, m_max: int = 500) -> DispersionInstance:
    r = int(rng.choice([q for q in _squarefree_upto(r_max) if q >= 2]))
    a = int(rng.choice(units(r)))
    N = int(rng.integers(10, n_max + 1))
    M = int(rng.integers(10, m_max + 1))
    pool = [s for s in _squarefree_upto(30) if math.gcd(s, r) == 1]
    count = int(rng.integers(1, min(10, len(pool)) + 1))
    moduli = sorted(int(s) for s in rng.choice(pool, size=count, replace=False))
    beta = rng.uniform(-1.0, 1.0, size=N)
    return DispersionInstance(r=r, a=a, N=N, M=M, beta=beta,
                              gammas=random_gamma_system(moduli, rng))
