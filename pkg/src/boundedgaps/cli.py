"""Command-line front end.

Every subcommand prints a small table, either as aligned text or as CSV
(``--emit csv``). Randomized checks draw from ``--seed``; numerical results
never depend on it.

Exit status: 0 on success, 1 when a checked property fails, 2 on a usage
error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import constants as cst
from . import decompose, dde, equidist, expsums, sieve, tuples
from .arith import PrimeTable, nth_prime, sieve_primes, von_mangoldt
from .errors import (GcdFailure, InvalidArgument, LemmaViolation, NotFound, PropertyFailure,
                     TableTooSmall, TooLarge)
from .report import fmt, to_csv

TABLE_LIMIT_ENV = "BOUNDEDGAPS_TABLE_LIMIT"
DEFAULT_TABLE_LIMIT = 3_000_000

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SUBCOMMANDS = ("tuples", "sieve", "dde", "constants", "decompose", "expsums", "equidist",
               "paper-numbers")
ACTIONS = {
    "decompose": ("verify-hb", "classify"),
    "expsums": ("ramanujan", "kloosterman", "correlation", "verify-prop54", "dispersion"),
    "equidist": ("psi", "bv", "rich", "roots", "zhang", "tau3", "gpyw"),
}
GLOBAL_KEYS = ("seed", "output", "emit", "table_limit")

# Parameter keys accepted by each (subcommand, action).
PARAMS: dict[tuple[str, str | None], tuple[str, ...]] = {
    ("tuples", None): ("k", "cutoff"),
    ("sieve", None): ("k", "l", "sqrt_D", "s"),
    ("dde", None): ("kappa", "l", "s_max", "step", "stride"),
    ("constants", None): ("delta", "s", "k", "l", "search"),
    ("decompose", "verify-hb"): ("n_max", "K"),
    ("decompose", "classify"): ("samples", "r_max", "nu", "eta"),
    ("expsums", "ramanujan"): ("a", "q"),
    ("expsums", "kloosterman"): ("a", "b", "q"),
    ("expsums", "correlation"): ("u", "v", "w", "k", "brute"),
    ("expsums", "verify-prop54"): ("p_max", "composite_max", "samples"),
    ("expsums", "dispersion"): ("instances",),
    ("equidist", "psi"): ("x", "q", "a"),
    ("equidist", "bv"): ("x", "Q"),
    ("equidist", "rich"): ("q", "z"),
    ("equidist", "roots"): ("H", "h", "q"),
    ("equidist", "zhang"): ("N", "Q", "z", "H", "h", "sharp"),
    ("equidist", "tau3"): ("L", "M", "N", "q", "a"),
    ("equidist", "gpyw"): ("N", "H", "l", "sqrt_D", "sharp"),
    ("paper-numbers", None): (),
}


def default_table_limit() -> int:
    raw = os.environ.get(TABLE_LIMIT_ENV)
    if raw is None:
        return DEFAULT_TABLE_LIMIT
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidArgument(f"{TABLE_LIMIT_ENV} must be an integer") from exc


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    action: str | None = None
    seed: int = 0
    output_path: str | None = None
    emit: str = "text"
    table_limit: int = DEFAULT_TABLE_LIMIT
    params: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise InvalidArgument(f"unknown subcommand {self.subcommand!r}")
        actions = ACTIONS.get(self.subcommand)
        if actions is not None and self.action not in actions:
            raise InvalidArgument(f"{self.subcommand} needs one of {', '.join(actions)}")
        if actions is None and self.action is not None:
            raise InvalidArgument(f"{self.subcommand} takes no action")
        allowed = PARAMS[(self.subcommand, self.action)]
        unknown = sorted(set(self.params) - set(allowed))
        if unknown:
            raise InvalidArgument(f"unknown keys: {', '.join(unknown)}")
        if self.emit not in ("text", "csv"):
            raise InvalidArgument("emit must be text or csv")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgument("seed must be a 64-bit unsigned integer")
        if self.table_limit < 2:
            raise InvalidArgument("table limit must be at least 2")


@dataclass
class Outcome:
    header: list[str]
    rows: list[list[Any]]
    ok: bool = True
    message: str = ""


def render(out: Outcome, emit: str) -> str:
    if emit == "csv":
        return to_csv(out.header, out.rows)
    cells = [out.header] + [[fmt(v) for v in row] for row in out.rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(out.header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    if out.message:
        lines.append(out.message)
    return "\n".join(lines) + "\n"


class Params:
    """Typed access to the string parameter map."""

    def __init__(self, raw: dict[str, str]):
        self.raw = raw

    def _get(self, key: str, default: Any, conv: Callable[[str], Any]) -> Any:
        if key not in self.raw:
            return default
        try:
            return conv(self.raw[key])
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidArgument(f"bad value for {key}: {self.raw[key]!r}") from exc

    def int(self, key: str, default: int | None = None) -> int:
        return self._get(key, default, lambda v: int(v))

    def float(self, key: str, default: float | None = None) -> float:
        return self._get(key, default, lambda v: float(Fraction(v)))

    def frac(self, key: str, default: Fraction | None = None) -> Fraction:
        return self._get(key, default, Fraction)

    def flag(self, key: str) -> bool:
        return self._get(key, False, lambda v: v.lower() in ("1", "true", "yes", "on"))

    def ints(self, key: str, default: Sequence[int]) -> list[int]:
        return self._get(key, list(default),
                         lambda v: [int(x) for x in v.replace(";", ",").split(",") if x.strip()])


class Context:
    def __init__(self, config: RunConfig):
        self.config = config
        self.p = Params(config.params)
        self.rng = np.random.default_rng(config.seed)
        self._table: PrimeTable | None = None

    def table(self, need: float = 0) -> PrimeTable:
        limit = self.config.table_limit
        if need > limit:
            raise TableTooSmall(f"table limit {limit} too small", int(math.ceil(need)))
        if self._table is None:
            self._table = sieve_primes(limit)
        return self._table


# Subcommand bodies.


def cmd_tuples(ctx: Context) -> Outcome:
    k = ctx.p.int("k", 175561)
    table = ctx.table()
    H = tuples.build_consecutive_prime_tuple(k, table)
    rows: list[list[Any]] = [
        ["k", k],
        ["h_1", H.elements[0]],
        ["h_k", H.elements[-1]],
        ["pi(k)", table.pi(k)],
        ["pi(h_1)", table.pi(H.elements[0])],
        ["pi(h_k)", table.pi(H.elements[-1])],
        ["diameter", H.diameter],
        ["admissible", tuples.is_admissible(H)],
    ]
    admissible = bool(rows[-1][1])
    cutoff = ctx.p.int("cutoff", 0)
    if cutoff:
        c = tuples.tuple_constants(H, max(cutoff, k))
        rows += [["delta_prime_count", len(c.delta_primes)],
                 ["gamma_H", float(c.gamma_H)],
                 ["singular_series_partial", c.singular_series],
                 ["truncation_bound", c.truncation_bound]]
    return Outcome(["quantity", "value"], rows, ok=admissible)


def cmd_sieve(ctx: Context) -> Outcome:
    k, l = ctx.p.int("k", 3), ctx.p.int("l", 1)
    sqrt_D = ctx.p.float("sqrt_D", 100.0)
    s_raw = ctx.config.params.get("s")
    s = None if s_raw in (None, "none", "inf") else ctx.p.float("s")
    config = sieve.SieveConfig.from_sqrt_D(k, l, sqrt_D, s=s)
    weights = sieve.compute_lambda(sieve.compute_rho(config))
    direct = sieve.G_sums(config, weights)
    diag = sieve.G_sums_diagonal(config)
    ratio = direct.G_prime / (direct.G * math.log(config.D))
    target = float(sieve.ratio_target(k, l))
    agree = abs(direct.G - diag.G) <= 1e-9 * abs(diag.G) and \
        abs(direct.G_prime - diag.G_prime) <= 1e-9 * abs(diag.G_prime)
    rows = [["Y", direct.Y], ["G", direct.G], ["G_diagonal", diag.G],
            ["G_prime", direct.G_prime], ["G_prime_diagonal", diag.G_prime],
            ["ratio", ratio], ["ratio_target", target],
            ["relative_deviation", abs(ratio - target) / target],
            ["rho_support", len(weights.rho)], ["lambda_support", len(weights.lam or {})],
            ["routes_agree", agree]]
    return Outcome(["quantity", "value"], rows, ok=agree)


def cmd_dde(ctx: Context) -> Outcome:
    kappa, l = ctx.p.int("kappa", 1), ctx.p.int("l", 0)
    s_max = ctx.p.float("s_max", dde.DEFAULT_SMAX)
    step = ctx.p.float("step", 1e-3)
    stride = ctx.p.int("stride", 0)
    H = dde.solve_H(kappa, l, s_max, step)
    report = dde.check_H_lower_bound(H)
    if stride:
        text = dde.grid_csv(H, stride=stride)
        lines = text.strip().split("\n")
        header = lines[0].split(",")
        return Outcome(header, [ln.split(",") for ln in lines[1:]])
    rows = [[float(s), H(float(s))] for s in range(1, int(s_max) + 1)]
    rows.append(["bound_nodes", report.nodes_checked])
    rows.append(["min_relative_margin", report.min_relative_margin])
    return Outcome(["s", "H"], rows)


def cmd_constants(ctx: Context) -> Outcome:
    base = cst.ZhangParams.default()
    delta = ctx.p.frac("delta", base.delta)
    s = ctx.p.frac("s", base.s)
    k = ctx.p.int("k", base.k)
    params = cst.ZhangParams(k=k, l=ctx.p.int("l", sieve.nice_l(k)), s=s, theta=Fraction(1, 2) + delta,
                             delta=delta, eps=Fraction(0))
    rows = []
    ok = True
    for r in cst.pipeline(params):
        informational = r.note == "informational"
        status = "PASS" if r.ok else ("INFO" if informational else "FAIL")
        ok &= r.ok or informational
        rows.append([r.name, status, float(r.margin.lo) if r.margin else "", r.note])
    if ctx.p.flag("search"):
        rows.append(["min_k", "INFO", cst.search_min_k(delta, s), ""])
        rows.append(["min_square_k", "INFO", cst.search_min_square_k(delta, s), ""])
    return Outcome(["condition", "status", "margin_lo", "note"], rows, ok=ok)


def cmd_decompose(ctx: Context) -> Outcome:
    if ctx.config.action == "verify-hb":
        n_max = ctx.p.int("n_max", 1000)
        Ks = ctx.p.ints("K", (1, 2, 3))
        rows = []
        ok = True
        for K in Ks:
            M = 4 * n_max ** (1 / K)
            worst = 0.0
            for n in range(1, n_max + 1):
                worst = max(worst, abs(decompose.heath_brown_rhs(n, K, M) - von_mangoldt(n)))
            ok &= worst <= 1e-9
            rows.append([K, M, n_max, worst, worst <= 1e-9])
        return Outcome(["K", "M", "n_max", "max_error", "pass"], rows, ok=ok)
    if "nu" in ctx.config.params:
        nu = [float(x) for x in ctx.config.params["nu"].split(",") if x.strip()]
        t = decompose.ExponentTuple.normalized(nu, ctx.p.float("eta", 0.01))
        try:
            c = decompose.classify_exponents(t)
        except LemmaViolation as exc:
            raise PropertyFailure(str(exc)) from exc
        witness = "" if c.witness is None else " ".join(str(i + 1) for i in c.witness)
        return Outcome(["case", "witness", "subsum"], [[c.case, witness, c.subsum or ""]])
    samples = ctx.p.int("samples", 10_000)
    r_max = ctx.p.int("r_max", 10)
    counts = {"C1": 0, "C2": 0, "C3": 0}
    violations = 0
    for _ in range(samples):
        try:
            counts[decompose.classify_exponents(
                decompose.random_exponent_tuple(ctx.rng, r_max)).case] += 1
        except LemmaViolation:
            violations += 1
    rows = [[c, n] for c, n in counts.items()] + [["violations", violations]]
    return Outcome(["case", "count"], rows, ok=violations == 0)


def cmd_expsums(ctx: Context) -> Outcome:
    act, p = ctx.config.action, ctx.p
    if act == "ramanujan":
        a, q = p.int("a", 1), p.int("q", 6)
        direct = expsums.ramanujan_direct(a, q)
        return Outcome(["a", "q", "R", "direct_re", "direct_im"],
                       [[a, q, expsums.ramanujan(a, q), direct.real, direct.imag]])
    if act == "kloosterman":
        a, b, q = p.int("a", 1), p.int("b", 1), p.int("q", 5)
        v = expsums.kloosterman(a, b, q)
        return Outcome(["a", "b", "q", "re", "im"], [[a, b, q, v.re, v.im]])
    if act == "correlation":
        u, v, w, k = p.int("u", 0), p.int("v", 0), p.int("w", 0), p.int("k", 7)
        val = (expsums.correlation_K_bruteforce if p.flag("brute") else expsums.correlation_K)(u, v, w, k)
        return Outcome(["u", "v", "w", "k", "re", "im"], [[u, v, w, k, val.re, val.im]])
    if act == "verify-prop54":
        rep = expsums.verify_prop54(p.int("p_max", 31), p.int("composite_max", 1000),
                                    p.int("samples", 60), seed=ctx.config.seed)
        rows = [["closed_form_max_error", rep.closed_form_max_error],
                ["max_imaginary_part", rep.max_imag],
                ["generic_max_ratio", rep.generic_max_ratio],
                ["crt_max_error", rep.crt_max_error],
                ["zero_shift_bound_checked", rep.bound_checked],
                ["zero_shift_bound_violations", len(rep.bound_violations)],
                ["corrected_bound_violations", len(rep.corrected_bound_violations)]]
        if rep.bound_violations:
            k, v, w, val, bound = rep.bound_violations[0]
            rows.append(["first_violation", f"k={k} v={v} w={w} |K|={val:.6g} bound={bound:.6g}"])
        return Outcome(["quantity", "value"], rows, ok=not rep.failures,
                       message="; ".join(rep.failures))
    n = p.int("instances", 20)
    rows = []
    ok = True
    for i in range(n):
        inst = expsums.random_dispersion_instance(ctx.rng)
        parts = expsums.dispersion_split(inst)
        good = parts.residual <= 1e-9 * parts.scale
        ok &= good
        rows.append([i, inst.r, inst.N, inst.M, len(inst.gammas.moduli), parts.D, parts.D1,
                     parts.D2, parts.D3, parts.residual, good])
    return Outcome(["instance", "r", "N", "M", "moduli", "D", "D1", "D2", "D3", "residual",
                    "pass"], rows, ok=ok)


def _tuple_arg(ctx: Context, default: Sequence[int]) -> tuples.AdmissibleTuple:
    return tuples.AdmissibleTuple.of(ctx.p.ints("H", default))


def cmd_equidist(ctx: Context) -> Outcome:
    act, p = ctx.config.action, ctx.p
    if act == "psi":
        x, q, a = p.float("x", 1e4), p.int("q", 3), p.int("a", 1)
        r = equidist.psi_progression(x, q, a, ctx.table(x))
        return Outcome(["q", "a", "x", "observed", "expected", "error"],
                       [[r.q, r.a, r.x, r.observed, r.expected, r.error]])
    if act == "bv":
        x, Q = p.float("x", 1e4), p.float("Q", 10)
        val = equidist.bv_sum(x, Q, ctx.table(x))
        return Outcome(["x", "Q", "bv_sum", "ratio"], [[x, Q, val, val / x]])
    if act == "rich":
        q, z = p.int("q", 30), p.float("z", 2)
        return Outcome(["q", "z", "divisor_rich", "cover_definition"],
                       [[q, z, equidist.is_divisor_rich(q, z),
                         equidist.is_divisor_rich_cover(q, z)]])
    if act == "roots":
        H = _tuple_arg(ctx, (0, 2, 6))
        h, q = p.int("h", H.elements[0]), p.int("q", 7)
        roots = equidist.shift_poly_roots(H, h, q)
        return Outcome(["q", "h", "root"], [[q, h, a] for a in roots])
    if act == "zhang":
        H = _tuple_arg(ctx, (0, 2, 6))
        N = p.float("N", 1e4)
        rep = equidist.zhang_lhs(N, p.float("Q", 50), p.float("z", 10), H, ctx.table(2 * N),
                                 h=p.int("h", H.elements[0]), sharp=p.flag("sharp"))
        rows = [[r.q, r.a, r.observed, r.expected, r.error] for r in rep.records]
        rows.append(["total", "", "", "", rep.total])
        return Outcome(["q", "a", "observed", "expected", "error"], rows)
    if act == "tau3":
        L, M, N = p.float("L", 20), p.float("M", 15), p.float("N", 10)
        q, a = p.int("q", 7), p.int("a", 1)
        c = equidist.cropped_divisor_error(L, M, N, q, a)
        return Outcome(["L", "M", "N", "q", "a", "S", "S0", "E"], [[L, M, N, q, a, c.S, c.S0, c.E]])
    H = _tuple_arg(ctx, (0, 2))
    N = p.float("N", 1e5)
    consts = tuples.tuple_constants(H, max(1000, H.k))
    config = sieve.SieveConfig.from_sqrt_D(H.k, p.int("l", 1), p.float("sqrt_D", 30), s=None,
                                           delta=consts.delta)
    weights = sieve.compute_lambda(sieve.compute_rho(config))
    rep = equidist.gpy_W(N, H, weights, consts, ctx.table(2 * N), sharp=p.flag("sharp"))
    rows = [["W", rep.W]] + [[f"V_{h}", v] for h, v in rep.V.items()]
    rows += [["U", rep.U], ["U_main_term", rep.U_main], ["identity_relative_residual",
                                                         rep.relative_residual]]
    return Outcome(["quantity", "value"], rows)


# Exact constants.


TARGET_K = 175561
TARGET_H1 = 175573
TARGET_H1_INDEX = 15954
TARGET_HK_INDEX = 191514
TARGET_HK = 2624371
TARGET_DIAMETER = 2448798


def paper_numbers(table: PrimeTable | None = None) -> Outcome:
    """Reproduce the admissible-tuple constants for ``k = 175561`` from a prime table."""
    table = table or sieve_primes(DEFAULT_TABLE_LIMIT)
    H = tuples.build_consecutive_prime_tuple(TARGET_K, table)
    h1, hk = H.elements[0], H.elements[-1]
    checks = [
        ("h_1 = 175573 = p_15954", f"{h1} = p_{table.pi(h1)}",
         h1 == TARGET_H1 and table.pi(h1) == TARGET_H1_INDEX and nth_prime(TARGET_H1_INDEX, table) == h1),
        ("pi(h_k) = 191514", table.pi(hk), table.pi(hk) == TARGET_HK_INDEX),
        ("h_k = 2624371", hk, hk == TARGET_HK and nth_prime(TARGET_HK_INDEX, table) == hk),
        ("diameter = 2448798", H.diameter, H.diameter == TARGET_DIAMETER),
        ("gap bound = 2448798", hk - h1, hk - h1 == TARGET_DIAMETER and table.pi(TARGET_K) + 1 == TARGET_H1_INDEX),
    ]
    rows = [[name, observed, "PASS" if good else "FAIL"] for name, observed, good in checks]
    passed = sum(1 for *_, good in checks if good)
    return Outcome(["check", "observed", "status"], rows, ok=passed == len(checks),
                   message=f"{passed}/{len(checks)} PASS")


def cmd_paper_numbers(ctx: Context) -> Outcome:
    return paper_numbers(ctx.table(TARGET_HK))


COMMANDS: dict[str, Callable[[Context], Outcome]] = {
    "tuples": cmd_tuples,
    "sieve": cmd_sieve,
    "dde": cmd_dde,
    "constants": cmd_constants,
    "decompose": cmd_decompose,
    "expsums": cmd_expsums,
    "equidist": cmd_equidist,
    "paper-numbers": cmd_paper_numbers,
}


def run(config: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one subcommand; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        out = COMMANDS[config.subcommand](Context(config))
    except (InvalidArgument, GcdFailure, TableTooSmall, TooLarge, NotFound) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except PropertyFailure as exc:
        print(f"property failure: {exc}", file=stderr)
        return EXIT_FAILURE
    text = render(out, config.emit)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if not out.ok:
        if out.message:
            print(out.message, file=stderr)
        return EXIT_FAILURE
    return EXIT_OK


# Argument parsing.


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidArgument(f"{path}:{lineno}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


_HELP = {
    "tuples": ("consecutive-prime admissible tuple after k",
               {"k": "tuple size", "cutoff": "also report tuple constants with this series cutoff"}),
    "sieve": ("restricted lambda-squared sieve weights and G, G' sums",
              {"k": "k", "l": "l", "sqrt-D": "square root of the level", "s": "smoothness parameter or 'none'"}),
    "dde": ("method-of-steps solution of the sieve delay equation",
            {"kappa": "kappa", "l": "l", "s-max": "right end", "step": "grid step (divides 1)",
             "stride": "emit the grid every stride nodes"}),
    "constants": ("certified delta, k and positivity conditions",
                  {"delta": "rational delta", "s": "rational s", "k": "k", "l": "l (default: nice choice)",
                   "search": "also search minimal k (true/false)"}),
    "paper-numbers": ("exact tuple constants for k = 175561", {}),
}
_ACTION_HELP = {
    ("decompose", "verify-hb"): ("Heath-Brown identity against the von Mangoldt function",
                                 {"n-max": "largest n", "K": "comma-separated K values"}),
    ("decompose", "classify"): ("random exponent tuples through the case classifier",
                                {"samples": "number of random tuples", "r-max": "largest length",
                                 "nu": "classify this comma-separated tuple instead",
                                 "eta": "eta for --nu (default 0.01)"}),
    ("expsums", "ramanujan"): ("Ramanujan sum", {"a": "a", "q": "q"}),
    ("expsums", "kloosterman"): ("Kloosterman sum", {"a": "a", "b": "b", "q": "q"}),
    ("expsums", "correlation"): ("three-variable correlation sum",
                                 {"u": "u", "v": "v", "w": "w", "k": "squarefree modulus",
                                  "brute": "use the triple loop (true/false)"}),
    ("expsums", "verify-prop54"): ("closed forms, CRT and bounds of the correlation sum",
                                   {"p-max": "largest prime", "composite-max": "largest composite k",
                                    "samples": "sampled composite moduli"}),
    ("expsums", "dispersion"): ("dispersion split on random instances", {"instances": "count"}),
    ("equidist", "psi"): ("psi(x; q, a) against x/phi(q)", {"x": "x", "q": "q", "a": "a"}),
    ("equidist", "bv"): ("Bombieri-Vinogradov sum", {"x": "x", "Q": "Q"}),
    ("equidist", "rich"): ("divisor-rich test", {"q": "q", "z": "z"}),
    ("equidist", "roots"): ("unit roots of the shift polynomial",
                            {"H": "comma-separated shifts", "h": "distinguished shift", "q": "q"}),
    ("equidist", "zhang"): ("prime discrepancies over divisor-rich moduli and shift roots",
                            {"N": "N", "Q": "Q", "z": "z", "H": "shifts", "h": "shift",
                             "sharp": "sharp cutoff (true/false)"}),
    ("equidist", "tau3"): ("cropped divisor sum error E(L, M, N)",
                           {"L": "L", "M": "M", "N": "N", "q": "q", "a": "a"}),
    ("equidist", "gpyw"): ("sifted sum W and its decomposition into V_h and U",
                           {"N": "N", "H": "shifts", "l": "l", "sqrt-D": "square root of the level",
                            "sharp": "sharp cutoff (true/false)"}),
}


_ALIASES = {"n-max": "--nmax", "s-max": "--smax", "sqrt-D": "--sqrtD"}


def _add_params(parser: argparse.ArgumentParser, params: dict[str, str]) -> None:
    for name, text in params.items():
        flags = [f"--{name}"] + ([_ALIASES[name]] if name in _ALIASES else [])
        parser.add_argument(*flags, dest=name.replace("-", "_"), default=None, help=text)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits with 2 as well
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boundedgaps", description="Bounded prime gaps computations.")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomized checks (default 0)")
    parser.add_argument("--config", default=None, help="key=value file with defaults")
    parser.add_argument("--output", default=None, help="write the table here instead of stdout")
    parser.add_argument("--emit", choices=("text", "csv"), default=None)
    parser.add_argument("--table-limit", dest="table_limit", type=int, default=None,
                        help=f"prime table limit (default ${TABLE_LIMIT_ENV} or {DEFAULT_TABLE_LIMIT})")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    for name in SUBCOMMANDS:
        if name in ACTIONS:
            p = sub.add_parser(name, help=f"{name} actions")
            acts = p.add_subparsers(dest="action", parser_class=_Parser)
            for act in ACTIONS[name]:
                text, params = _ACTION_HELP[(name, act)]
                _add_params(acts.add_parser(act, help=text, description=text), params)
        else:
            text, params = _HELP[name]
            _add_params(sub.add_parser(name, help=text, description=text), params)
    return parser


def config_from_args(argv: Sequence[str]) -> RunConfig:
    args = vars(build_parser().parse_args(list(argv)))
    sub = args.pop("subcommand")
    if sub is None:
        raise InvalidArgument("a subcommand is required")
    action = args.pop("action", None)
    file_vals = read_config_file(args.pop("config")) if args.get("config") else {}
    args.pop("config", None)
    merged: dict[str, Any] = dict(file_vals)
    merged.update({k: v for k, v in args.items() if v is not None})
    seed = int(merged.pop("seed", 0))
    output = merged.pop("output", None)
    emit = merged.pop("emit", "text")
    limit = int(merged.pop("table_limit", default_table_limit()))
    params = {k: str(v) for k, v in merged.items()}
    return RunConfig(subcommand=sub, action=action, seed=seed, output_path=output, emit=emit,
                     table_limit=limit, params=params)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = config_from_args(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (_UsageError, InvalidArgument, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
