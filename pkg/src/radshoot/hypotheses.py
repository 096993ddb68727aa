"""Sampled checks of the structural hypotheses on a nonlinearity.

Each check returns a ``HypothesisResult`` with a verdict in
``{"pass", "fail", "inconclusive"}``.  A failing verdict always names a
concrete witness point.  Limits at infinity are judged from the asymptotic
form where it is known in closed form and from a geometric ladder
otherwise, which can only ever provide evidence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .functionals import F_over_f_prime
from .nonlinearity import BaseModel, PiecewiseNonlinearity, compile_nonlinearity
from .odeint import SolverControls

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

SLOPE_TOL = 0.05
DEFAULT_LADDER = tuple(10.0 ** k for k in np.arange(2.0, 6.01, 0.5))


@dataclass
class HypothesisResult:
    name: str
    verdict: str
    margin: Optional[float] = None
    witness: dict = field(default_factory=dict)
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == FAIL and not self.witness:
            raise ValueError("a failing verdict needs a witness")

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "margin": _jsonable(self.margin),
                "witness": {k: _jsonable(v) for k, v in self.witness.items()},
                "detail": self.detail}


def _jsonable(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass
class HypothesisReport:
    results: dict
    b: float
    beta: float
    grid: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        verdicts = [r.verdict for r in self.results.values()]
        if FAIL in verdicts:
            return FAIL
        if INCONCLUSIVE in verdicts:
            return INCONCLUSIVE
        return PASS

    @property
    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 2, INCONCLUSIVE: 3}[self.verdict]

    def __getitem__(self, name) -> HypothesisResult:
        return self.results[name]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "b": self.b, "beta": self.beta,
                "hypotheses": {k: r.to_dict() for k, r in self.results.items()},
                "grid": {k: _jsonable(v) for k, v in self.grid.items()}}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kw)


def _base_of(obj) -> BaseModel:
    return obj if isinstance(obj, BaseModel) else obj.base


def _as_nl(obj) -> PiecewiseNonlinearity:
    return compile_nonlinearity(obj) if isinstance(obj, BaseModel) else obj


def find_b_and_beta(base: BaseModel, tol: float = 1e-12) -> tuple:
    """Positive zero ``b`` of ``f`` and zero ``beta`` of ``F``.

    The closed forms are cross-checked with bracketing root solves.
    """
    b, beta = base.b, base.beta
    b_num = brentq(base.f, 0.5 * b, 2.0 * b, xtol=1e-15)
    beta_num = brentq(base.F, b, 2.0 * beta + 1.0, xtol=1e-15)
    if abs(b_num - b) > tol * max(1.0, b) or abs(beta_num - beta) > tol * max(1.0, beta):
        raise ArithmeticError(
            f"closed forms disagree with root solves: b {b} vs {b_num}, beta {beta} vs {beta_num}")
    return b, beta


def _default_grid(lo, hi, n=4000):
    return np.unique(np.concatenate((np.linspace(lo, hi, n),
                                     np.geomspace(max(lo, 1e-6), hi, n))))


def check_H1(obj, s_hi: Optional[float] = None) -> HypothesisResult:
    """Sign pattern of ``f`` around ``b`` and a single zero ``beta`` of ``F``."""
    base = _base_of(obj)
    b, beta = find_b_and_beta(base)
    s_hi = s_hi or 10.0 * beta
    if base.f(0.0) != 0.0:
        return HypothesisResult("H1", FAIL, base.f(0.0), {"s": 0.0}, "f(0) != 0")
    below = np.linspace(0.0, b, 2001)[1:-1]
    fb = base.f(below)
    if np.any(fb >= 0):
        s = below[np.argmax(fb >= 0)]
        return HypothesisResult("H1", FAIL, float(base.f(s)), {"s": s}, "f >= 0 below b")
    above = _default_grid(b, s_hi)[1:]
    fa = base.f(above)
    if np.any(fa <= 0):
        s = above[np.argmax(fa <= 0)]
        return HypothesisResult("H1", FAIL, float(base.f(s)), {"s": s}, "f <= 0 above b")
    grid = _default_grid(0.0, s_hi)[1:]
    Fg = base.F(grid)
    changes = int(np.count_nonzero(np.diff(np.sign(Fg)) != 0))
    if changes != 1:
        return HypothesisResult("H1", FAIL, float(changes), {"changes": changes},
                                "F does not have exactly one positive zero")
    return HypothesisResult("H1", PASS, float(np.min(fa)), {"b": b, "beta": beta})


def check_H2(obj, grid: Optional[Sequence[float]] = None, N: Optional[int] = None,
             tail_tol: float = 1e-12) -> HypothesisResult:
    """``(F/f)' > (N - 2) / (2N)`` above ``beta``.

    The sampled margin is complemented by the exact limit of ``(F/f)'``,
    which is ``1/(p + 1)`` for ``s**p - s``.  A zero limiting margin is the
    critical case and yields ``inconclusive``.
    """
    base = _base_of(obj)
    nl = compile_nonlinearity(base)
    N = N or base.N
    beta = base.beta
    if grid is None:
        grid = _default_grid(beta, 10.0 * beta)[1:]
    grid = np.asarray(grid, dtype=float)
    if grid.min() <= beta:
        raise ValueError("grid must lie above beta")
    target = (N - 2) / (2 * N)
    margins = np.array([F_over_f_prime(nl, s) for s in grid]) - target
    i = int(np.argmin(margins))
    tail = 1.0 / (base.p + 1) - target
    meta = {"s_worst": grid[i], "s_hi": grid.max(), "tail_margin": tail}
    if margins[i] <= 0:
        return HypothesisResult("H2", FAIL, margins[i], {"s": grid[i], **meta},
                                "margin non-positive at a sample")
    if tail < -tail_tol:
        # the limit is below target: walk out until a sample shows it
        s = grid.max()
        for _ in range(200):
            s *= 2.0
            m = F_over_f_prime(nl, s) - target
            if m <= 0:
                return HypothesisResult("H2", FAIL, m, {"s": s, **meta},
                                        "limit at infinity below the target")
        return HypothesisResult("H2", INCONCLUSIVE, tail, meta,
                                "negative limit not reached by sampling")
    if abs(tail) <= tail_tol:
        return HypothesisResult("H2", INCONCLUSIVE, margins[i], meta,
                                "margin tends to zero at infinity (critical growth)")
    return HypothesisResult("H2", PASS, min(margins[i], tail), meta)


def check_H3(obj, grid: Optional[Sequence[float]] = None) -> HypothesisResult:
    """``f(s) / (s - b)`` increasing above ``b``, sampled on ``grid``."""
    nl = _as_nl(obj)
    b = nl.base.b
    if grid is None:
        hi = 10.0 * nl.base.beta
        if nl.blocks:
            hi = max(hi, 2.0 * nl.breakpoints[-1])
        if math.isfinite(nl.gamma):
            hi = min(hi, nl.gamma * (1 - 1e-9))
        grid = _default_grid(b + 1e-6, hi)
    grid = np.asarray(grid, dtype=float)
    if grid.min() <= b:
        raise ValueError("grid must lie above b")
    g = nl.f(grid) / (grid - b)
    d = np.diff(g)
    # relative round-off allowance on nearly equal neighbours
    slack = 1e-13 * np.maximum(np.abs(g[1:]), np.abs(g[:-1]))
    worst = int(np.argmin(d + slack))
    if d[worst] + slack[worst] <= 0:
        return HypothesisResult("H3", FAIL, float(d[worst]),
                                {"s1": grid[worst], "s2": grid[worst + 1]},
                                "f/(s-b) decreases between the witness points")
    return HypothesisResult("H3", PASS, float(np.min(d)), {"s_hi": grid.max()})


def check_H4(obj, controls: Optional[SolverControls] = None, tol: float = 1e-10):
    """Existence of the base ground state, witnessed by a shooting bracket."""
    from .shooting import ClassificationError, find_alpha_star

    base = _base_of(obj)
    try:
        br = find_alpha_star(compile_nonlinearity(base), tol=tol, controls=controls)
    except ClassificationError as exc:
        return HypothesisResult("H4", INCONCLUSIVE, None, {"alpha": exc.alpha}, str(exc))
    return HypothesisResult("H4", PASS, br.width,
                            {"alpha_lo": br.alpha_lo, "alpha_hi": br.alpha_hi,
                             "alpha_star": br.midpoint})


def check_H5(nl: PiecewiseNonlinearity, alpha_star: float,
             s_hi: Optional[float] = None) -> HypothesisResult:
    """Every block function positive from ``alpha_star`` up to the domain end."""
    if not nl.blocks:
        return HypothesisResult("H5", PASS, None, {}, "no blocks")
    hi = nl.gamma if math.isfinite(nl.gamma) else (s_hi or max(1e6, 10 * nl.breakpoints[-1]))
    worst = math.inf
    for j, blk in enumerate(nl.blocks):
        lo_val, _ = blk.kind.extremes(alpha_star, hi)
        if not lo_val > 0:
            # locate a witness by sampling
            xs = np.linspace(alpha_star, hi, 20001)
            ys = np.array([blk.kind.f(x) for x in xs])
            k = int(np.argmin(ys))
            return HypothesisResult("H5", FAIL, float(ys[k]), {"block": j, "s": xs[k]},
                                    "block function not positive")
        worst = min(worst, lo_val)
    return HypothesisResult("H5", PASS, worst, {"s_hi": hi})


def _h6_rung(nl, s, theta, n):
    xs = np.linspace(theta * s, s, n)
    Q = nl.Q(xs)
    f = nl.f(xs)
    if np.any(f <= 0):
        raise ArithmeticError(f"f vanishes inside the window [{theta * s}, {s}]")
    q_min = float(np.min(Q))
    f_ref = float(np.max(f)) if q_min >= 0 else float(np.min(f))
    return q_min * (s / f_ref) ** (nl.N / 2)


def check_H6(nl, theta: float = 0.5, ladder: Sequence[float] = DEFAULT_LADDER,
             window_samples: int = 2001) -> HypothesisResult:
    """Growth of ``inf Q(s2) (s / f(s1))**(N/2)`` over ``s1, s2`` in ``[theta s, s]``.

    The verdict is read from the log-log slope of the rung values across the
    ladder, so it does not depend on the amplitude of the tail:

    * pass when the values are positive, increase over the top three rungs
      and grow at a positive rate;
    * fail when ``Q`` keeps decreasing to negative values (not bounded
      below), when the values decay, or when they are negative and
      growing in magnitude;
    * inconclusive otherwise.
    """
    nl = _as_nl(nl)
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    ladder = np.asarray(sorted(ladder), dtype=float)
    if len(ladder) < 3:
        raise ValueError("ladder needs at least three rungs")
    if math.isfinite(nl.gamma) and ladder[-1] >= nl.gamma:
        raise ValueError("ladder reaches gamma")
    values = np.array([_h6_rung(nl, s, theta, window_samples) for s in ladder])
    # lower bound of Q over [0, s_max]
    qs = np.unique(np.concatenate((np.linspace(0.0, ladder[-1], 20001),
                                   np.geomspace(1e-6, ladder[-1], 20001))))
    Qv = nl.Q(qs)
    q_low = float(np.min(Qv))
    q_top = nl.Q(ladder)
    absval = np.abs(values)
    with np.errstate(divide="ignore"):
        slope = float(np.polyfit(np.log(ladder), np.log(np.maximum(absval, 1e-300)), 1)[0])
    top = values[-3:]
    meta = {"slope": slope, "q_min": q_low, "s_q_min": float(qs[np.argmin(Qv)]),
            "theta": theta, "top_value": float(values[-1]),
            "absolute_threshold_met": bool(values[-1] > 1e6)}
    if q_top[-1] < 0 and np.all(np.diff(q_top[-3:]) < 0):
        return HypothesisResult("H6", FAIL, float(values[-1]),
                                {"s": float(ladder[-1]), "Q": float(q_top[-1]), **meta},
                                "Q decreases without bound along the ladder")
    if values[-1] > 0 and np.all(np.diff(top) > 0) and slope > SLOPE_TOL:
        return HypothesisResult("H6", PASS, float(values[-1]), meta)
    if slope < -SLOPE_TOL:
        return HypothesisResult("H6", FAIL, float(values[-1]),
                                {"s": float(ladder[-1]), **meta},
                                "values decay to a finite limit")
    if values[-1] < 0 and slope > SLOPE_TOL:
        return HypothesisResult("H6", FAIL, float(values[-1]),
                                {"s": float(ladder[-1]), **meta},
                                "values diverge to minus infinity")
    return HypothesisResult("H6", INCONCLUSIVE, float(values[-1]), meta,
                            "no clear trend across the ladder")


def verify(nl, theta: float = 0.5, ladder: Sequence[float] = DEFAULT_LADDER,
           controls: Optional[SolverControls] = None,
           alpha_star: Optional[float] = None) -> HypothesisReport:
    """Run all six checks on a compiled nonlinearity.

    The first four concern the base model; the fifth the blocks; the sixth
    the whole nonlinearity at infinity (inconclusive on a bounded domain).
    """
    nl = _as_nl(nl)
    base = nl.base
    b, beta = find_b_and_beta(base)
    res = {"H1": check_H1(base), "H2": check_H2(base)}
    res["H3"] = check_H3(base)
    if alpha_star is None:
        res["H4"] = check_H4(base, controls)
        alpha_star = res["H4"].witness.get("alpha_star")
    else:
        res["H4"] = HypothesisResult("H4", PASS, None, {"alpha_star": alpha_star},
                                     "supplied by the caller")
    if alpha_star is None:
        res["H5"] = HypothesisResult("H5", INCONCLUSIVE, None, {}, "alpha_star unknown")
    else:
        res["H5"] = check_H5(nl, alpha_star)
    if math.isfinite(nl.gamma):
        res["H6"] = HypothesisResult("H6", INCONCLUSIVE, None, {"gamma": nl.gamma},
                                     "bounded domain, no limit at infinity")
    else:
        res["H6"] = check_H6(nl, theta, ladder)
    grid = {"theta": theta, "ladder": list(map(float, ladder)), "h2_hi": 10 * beta}
    return HypothesisReport(res, b, beta, grid)
