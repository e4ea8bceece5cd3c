"""Method-of-steps solvers for the sieve differential-difference equations.

``H`` solves ``s^{m+1} H'(s) = -κ (s-1)^m H(s-1)`` with ``H = 1`` on ``(0, 1]``
and ``m = κ + l``. ``h`` solves ``s h'(s) = m h(s) - κ h(s-1)`` with
``h = s^m`` on ``(0, 1]``; the two are linked by ``h = s^m H``.

``H`` is carried as the deficit ``G = 1 - H``. Near ``s = 1`` the deficit is
of size ``(s-1)^{m+1}`` and would vanish in ``1 - G`` rounding, which matters
for the lower-bound check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, PropertyFailure

DEFAULT_STEP = 1e-4
DEFAULT_SMAX = 20.0
MAX_SMAX = 50.0

# Cubic Lagrange weights for the midpoint of a four-node stencil, by the
# position of the target gap inside the stencil (first, middle, last).
_MID_WEIGHTS = {
    0: np.array([5.0, 15.0, -5.0, 1.0]) / 16.0,
    1: np.array([-1.0, 9.0, 9.0, -1.0]) / 16.0,
    2: np.array([1.0, -5.0, 15.0, 5.0]) / 16.0,
}


@dataclass(frozen=True)
class DDEGrid:
    """Solution values on the nodes ``s_i = i * step``, ``1 <= i <= s_max/step``.

    ``deficit`` is ``1 - H`` for ``H`` grids and ``None`` for ``h`` grids.
    """

    kappa: int
    l: int
    step: float
    s_max: float
    kind: str
    s: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    deficit: np.ndarray | None = field(default=None, repr=False)

    @property
    def per_unit(self) -> int:
        return int(round(1.0 / self.step))

    def index(self, s: float) -> int:
        i = int(round(s * self.per_unit))
        if abs(i / self.per_unit - s) > 1e-9 or not 1 <= i <= self.s.size:
            raise InvalidArgument(f"s={s} is not a grid node")
        return i - 1

    def __call__(self, s: float) -> float:
        return float(self.values[self.index(s)])


def _per_unit(step: float, s_max: float) -> tuple[int, int]:
    if not 0 < step <= 1:
        raise InvalidArgument("step must lie in (0, 1]")
    n = int(round(1.0 / step))
    if abs(n * step - 1.0) > 1e-12:
        raise InvalidArgument(f"step {step} does not divide 1")
    if not 1 <= s_max <= MAX_SMAX:
        raise InvalidArgument(f"s_max must lie in [1, {MAX_SMAX}]")
    units = int(math.ceil(s_max - 1e-12))
    return n, units


def _first_interval_deficit(kappa: int, m: int, s: np.ndarray) -> np.ndarray:
    """Exact deficit on ``[1, 2]``: ``κ sum_{j > m} U^j / j`` with ``U = 1 - 1/s``."""
    U = 1.0 - 1.0 / s
    out = np.zeros_like(s)
    power = U ** (m + 1)
    for j in range(m + 1, m + 200):
        term = power / j
        out += term
        if np.all(term <= 1e-18 * np.maximum(out, 1e-300)):
            break
        power = power * U
    return kappa * out


def _delayed_midpoints(prev: np.ndarray) -> np.ndarray:
    """Cubic interpolation at the midpoints of a unit interval's nodes.

    ``prev`` holds ``n + 1`` values on ``[a, a+1]``; the stencil never leaves
    that closed interval, so smoothness is only required inside it.
    """
    n = prev.size - 1
    mids = np.empty(n)
    if n < 3:
        mids[:] = 0.5 * (prev[:-1] + prev[1:])
        return mids
    w = _MID_WEIGHTS
    mids[0] = w[0] @ prev[0:4]
    mids[n - 1] = w[2] @ prev[n - 3 : n + 1]
    mids[1 : n - 1] = (w[1][0] * prev[0 : n - 2] + w[1][1] * prev[1 : n - 1]
                       + w[1][2] * prev[2:n] + w[1][3] * prev[3 : n + 1])
    return mids


def solve_H(kappa: int, l: int, s_max: float = DEFAULT_SMAX, step: float = DEFAULT_STEP) -> DDEGrid:
    """Solve for ``H`` by steps; on each unit interval ``H'`` is known from the last.

    On ``[1, 2]`` the deficit is summed in closed form. Later intervals use
    Simpson's rule per step, with the delayed midpoint values from a cubic
    stencil; for a pure quadrature this is the classical 4-stage scheme.
    """
    if kappa < 1 or l < 0:
        raise InvalidArgument("need kappa >= 1 and l >= 0")
    n, units = _per_unit(step, s_max)
    m = kappa + l
    total = units * n
    s_all = np.arange(total + 1, dtype=np.float64) / n
    G = np.zeros(total + 1)
    if units >= 2:
        G[n : 2 * n + 1] = _first_interval_deficit(kappa, m, s_all[n : 2 * n + 1])
    for u in range(2, units):
        lo = u * n
        t = s_all[lo : lo + n + 1]
        prev_H = 1.0 - G[lo - n : lo + 1]
        tm = 0.5 * (t[:-1] + t[1:])
        mid_H = 1.0 - _delayed_midpoints(G[lo - n : lo + 1])

        def g(x: np.ndarray, hd: np.ndarray) -> np.ndarray:
            return kappa * (x - 1.0) ** m * hd / x ** (m + 1)

        gn = g(t, prev_H)
        gm = g(tm, mid_H)
        pieces = (gn[:-1] + 4.0 * gm + gn[1:]) / (6.0 * n)
        G[lo + 1 : lo + n + 1] = G[lo] + np.cumsum(pieces)
    keep = int(round(s_max * n))
    s = s_all[1 : keep + 1]
    deficit = G[1 : keep + 1]
    return DDEGrid(kappa=kappa, l=l, step=1.0 / n, s_max=s_max, kind="H", s=s,
                   values=1.0 - deficit, deficit=deficit)


def solve_h(kappa: int, l: int, s_max: float = DEFAULT_SMAX, step: float = DEFAULT_STEP) -> DDEGrid:
    """Classical RK4 on ``h' = (m h - κ h(s-1))/s`` with a cubic delayed term.

    Independent of :func:`solve_H`: no closed forms beyond ``h = s^m`` on
    ``(0, 1]``, and the ODE is integrated rather than the derivative quadrature.
    """
    if kappa < 1 or l < 0:
        raise InvalidArgument("need kappa >= 1 and l >= 0")
    n, units = _per_unit(step, s_max)
    m = kappa + l
    total = units * n
    hstep = 1.0 / n
    s_all = np.arange(total + 1, dtype=np.float64) / n
    h = np.empty(total + 1)
    h[: n + 1] = s_all[: n + 1] ** m
    for u in range(1, units):
        lo = u * n
        delayed = h[lo - n : lo + 1]
        mids = _delayed_midpoints(delayed) if u > 1 else (
            (s_all[lo - n : lo] + 0.5 * hstep) ** m)
        dl = delayed.tolist()
        ml = mids.tolist()
        cur = float(h[lo])
        out = []
        for i in range(n):
            x = (lo + i) * hstep
            xm = x + 0.5 * hstep
            x1 = x + hstep
            k1 = (m * cur - kappa * dl[i]) / x
            y2 = cur + 0.5 * hstep * k1
            k2 = (m * y2 - kappa * ml[i]) / xm
            y3 = cur + 0.5 * hstep * k2
            k3 = (m * y3 - kappa * ml[i]) / xm
            y4 = cur + hstep * k3
            k4 = (m * y4 - kappa * dl[i + 1]) / x1
            cur = cur + hstep * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            out.append(cur)
        h[lo + 1 : lo + n + 1] = out
    keep = int(round(s_max * n))
    return DDEGrid(kappa=kappa, l=l, step=1.0 / n, s_max=s_max, kind="h",
                   s=s_all[1 : keep + 1], values=h[1 : keep + 1])


def lower_bound_deficit(kappa: int, l: int, s: np.ndarray) -> np.ndarray:
    """``κ s/(m+1) (1 - 1/s)^{m+1}``, so the bound reads ``1 - H(s) <`` this."""
    m = kappa + l
    s = np.asarray(s, dtype=np.float64)
    return kappa * s / (m + 1) * (1.0 - 1.0 / s) ** (m + 1)


@dataclass(frozen=True)
class BoundReport:
    kappa: int
    l: int
    nodes_checked: int
    min_margin: float
    min_relative_margin: float
    worst_s: float


def check_H_lower_bound(grid: DDEGrid) -> BoundReport:
    """Check ``H(s) > 1 - κs/(m+1)(1-1/s)^{m+1}`` at every node ``s > 1``.

    Compared in deficit form. Raises :class:`PropertyFailure` at the worst node.
    """
    if grid.kind != "H" or grid.deficit is None:
        raise InvalidArgument("grid must come from solve_H")
    sel = grid.s > 1.0 + 1e-12
    s = grid.s[sel]
    bound = lower_bound_deficit(grid.kappa, grid.l, s)
    margin = bound - grid.deficit[sel]
    rel = margin / bound
    if s.size == 0:
        return BoundReport(grid.kappa, grid.l, 0, math.inf, math.inf, math.nan)
    worst = int(np.argmin(rel))
    if not np.all(margin > 0):
        bad = int(np.argmin(margin))
        raise PropertyFailure("lower bound violated", (float(s[bad]), float(margin[bad])))
    return BoundReport(grid.kappa, grid.l, int(s.size), float(margin.min()),
                       float(rel[worst]), float(s[worst]))


def convergence_ratio(kappa: int, l: int, s_eval: float = 4.0, step: float = 0.025) -> float:
    """Ratio of errors at ``step`` and ``step/2`` against a ``step/20`` reference.

    Fourth-order convergence gives a ratio near 16.
    """
    coarse = solve_H(kappa, l, s_eval, step)(s_eval)
    fine = solve_H(kappa, l, s_eval, step / 2)(s_eval)
    ref = solve_H(kappa, l, s_eval, step / 20)(s_eval)
    return (coarse - ref) / (fine - ref)


def grid_csv(H: DDEGrid, h: DDEGrid | None = None, stride: int = 1) -> str:
    """CSV rows ``s, h, H, bound`` on every ``stride``-th node."""
    from .report import fmt

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "h", "H", "bound"])
    bound = 1.0 - lower_bound_deficit(H.kappa, H.l, H.s)
    for i in range(stride - 1, H.s.size, stride):
        hv = h.values[i] if h is not None else H.s[i] ** (H.kappa + H.l) * H.values[i]
        b = bound[i] if H.s[i] > 1 else 1.0
        w.writerow([fmt(H.s[i]), fmt(hv), fmt(H.values[i]), fmt(b)])
    return buf.getvalue()
