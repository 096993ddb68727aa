"""Classification of initial values and bisection for ground states.

A shot from ``u(0) = alpha`` is tagged

* ``N`` when ``u`` reaches zero while decreasing,
* ``P`` when ``u'`` returns to zero while ``u`` is still positive (or the
  shot is certified to do so, see ``classify``),
* ``Undetermined`` when the integration ends for any other reason.

Ground states sit on boundaries between the two tags and are returned as
narrow brackets, never as tags.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .nonlinearity import BaseModel, PiecewiseNonlinearity, compile_nonlinearity
from .odeint import (STATUS_EVENT, STATUS_MONITOR, EventSpec, RadialState,
                     SolverControls, Trajectory, integrate)

TAG_N = "N"
TAG_P = "P"
TAG_UNDETERMINED = "Undetermined"

DECAY_FLOOR = 1e-8
R_DECAY = 50.0
TIE_TOL = 1e-9

_ZERO = EventSpec.u_crosses_zero(direction="down", terminal=True)
_TURN = EventSpec.v_crosses_zero(direction="up", terminal=True)


class ClassificationError(RuntimeError):
    """A shot could not be classified where a definite tag was required."""

    def __init__(self, message, alpha=None, classification=None):
        super().__init__(message)
        self.alpha = alpha
        self.classification = classification


@dataclass(frozen=True)
class Crossing:
    """First down-crossing of ``level``: radius and scaled momentum ``r |u'|``."""

    level: float
    r: float
    momentum: float


@dataclass(frozen=True)
class Classification:
    alpha: float
    tag: str
    R: Optional[float]
    state: RadialState
    reason: str
    crossings: tuple = ()
    trajectory: Optional[Trajectory] = field(default=None, compare=False, repr=False)

    def crossing_at(self, level: float) -> Optional[Crossing]:
        for c in self.crossings:
            if c.level == level:
                return c
        return None

    @property
    def definite(self) -> bool:
        return self.tag != TAG_UNDETERMINED


@dataclass(frozen=True)
class GroundStateBracket:
    """Two nearby initial values with opposite tags."""

    alpha_lo: float
    alpha_hi: float
    tag_lo: str
    tag_hi: str
    R_lo: Optional[float] = None
    R_hi: Optional[float] = None

    def __post_init__(self):
        if not self.alpha_lo < self.alpha_hi:
            raise ValueError("bracket requires alpha_lo < alpha_hi")
        if self.tag_lo == self.tag_hi or TAG_UNDETERMINED in (self.tag_lo, self.tag_hi):
            raise ValueError("bracket ends must carry opposite definite tags")

    @property
    def width(self) -> float:
        return self.alpha_hi - self.alpha_lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.alpha_lo + self.alpha_hi)

    def to_dict(self) -> dict:
        return {"alpha_lo": self.alpha_lo, "alpha_hi": self.alpha_hi,
                "alpha": self.midpoint, "width": self.width,
                "tag_lo": self.tag_lo, "tag_hi": self.tag_hi,
                "R_lo": self.R_lo, "R_hi": self.R_hi}


def _as_nl(nl) -> PiecewiseNonlinearity:
    if isinstance(nl, BaseModel):
        return compile_nonlinearity(nl)
    return nl


def classify(nl, alpha: float, controls: Optional[SolverControls] = None, *,
             levels: Sequence[float] = (), start: Optional[RadialState] = None,
             decay_floor: float = DECAY_FLOOR, r_decay: float = R_DECAY,
             early_exit: bool = True, keep_trajectory: bool = False) -> Classification:
    """Tag one shot as ``N``, ``P`` or ``Undetermined``.

    Parameters
    ----------
    nl : PiecewiseNonlinearity or BaseModel
    alpha : float
        Initial value, must exceed ``b``.  Ignored for the start point when
        ``start`` is given (it is still reported).
    controls : SolverControls, optional
    levels : sequence of float
        Levels whose first down-crossing radius and momentum are recorded.
    start : RadialState, optional
        Restart from an arbitrary state instead of ``(0, alpha, 0)``.
    decay_floor, r_decay : float
        A positive shot with ``u < decay_floor`` at ``r >= r_decay`` is ``P``.
    early_exit : bool
        Stop as soon as the shot is certified ``P``: ``u`` is below the
        largest level where ``Q < 0`` and the Pohozaev energy is negative.
        Both conditions persist, so ``u`` can no longer reach zero.
    keep_trajectory : bool

    Returns
    -------
    Classification
    """
    nl = _as_nl(nl)
    alpha = float(alpha)
    if start is None:
        if not alpha > nl.base.b:
            raise ValueError(f"alpha = {alpha} must exceed b = {nl.base.b}")
        start = RadialState(0.0, alpha, 0.0)
    levels = tuple(float(x) for x in levels)
    events = [_ZERO, _TURN] + [EventSpec.u_crosses(lv, "down") for lv in levels]

    N = nl.N
    s_q = nl.pohozaev_threshold if early_exit else 0.0
    F = nl.F

    def monitor(r, u, v):
        if u <= 0.0 or v >= 0.0:
            return None
        if early_exit and u < s_q:
            E = r ** N * (v * v + 2.0 * F(u)) + (N - 2) * r ** (N - 1) * v * u
            if E < 0.0:
                return "pohozaev"
        if u < decay_floor and r >= r_decay:
            return "decay"
        return None

    tr = integrate(nl, start, events, controls, monitor)
    fin = tr.final
    tag, R, reason = TAG_UNDETERMINED, None, tr.status
    if tr.status == STATUS_EVENT:
        ev = tr.terminal_event
        R = ev.state.r
        tie = TIE_TOL * (1.0 + abs(ev.state.u))
        if ev.spec == _ZERO:
            if ev.state.v < -tie:
                tag, reason = TAG_N, "zero"
            else:
                reason = "tie"
        elif ev.state.u > 0.0 and abs(ev.state.v) < tie:
            tag, reason = TAG_P, "turn"
        else:
            reason = "tie"
    elif tr.status == STATUS_MONITOR:
        tag, reason = TAG_P, tr.reason
    elif tr.reason:
        reason = f"{tr.status}: {tr.reason}"

    crossings = []
    for lv in levels:
        hits = [ev for ev in tr.events if ev.spec.kind == "u-level" and ev.spec.level == lv]
        if hits:
            st = hits[0].state
            crossings.append(Crossing(lv, st.r, st.r * abs(st.v)))
    return Classification(alpha, tag, R, fin, reason, tuple(crossings),
                          tr if keep_trajectory else None)


def crossing_moment(nl, alpha: float, level: float,
                    controls: Optional[SolverControls] = None,
                    start: Optional[RadialState] = None) -> tuple:
    """Radius and momentum ``r |u'|`` where the shot first falls through ``level``.

    Raises
    ------
    ClassificationError
        If the shot turns around or leaves the domain above ``level``.
    """
    nl = _as_nl(nl)
    if start is None:
        if not alpha > level:
            raise ValueError("alpha must exceed the level")
        start = RadialState(0.0, float(alpha), 0.0)
    spec = EventSpec.u_crosses(level, "down", terminal=True)
    tr = integrate(nl, start, [spec, _TURN], controls)
    ev = tr.terminal_event
    if ev is None or ev.spec != spec:
        raise ClassificationError(
            f"shot from alpha={alpha} never reached level {level} ({tr.status})", alpha)
    return ev.state.r, ev.state.r * abs(ev.state.v)


def _definite(nl, alpha, controls, **kw) -> Classification:
    c = classify(nl, alpha, controls, **kw)
    if not c.definite:
        ctl = controls or SolverControls()
        c = classify(nl, alpha, ctl.replace(r_max=10 * ctl.r_max), **kw)
    if not c.definite:
        raise ClassificationError(
            f"shot from alpha={alpha!r} is undetermined ({c.reason})", alpha, c)
    return c


def bisect_boundary(nl, lo: Classification, hi: Classification, tol: float = 1e-10,
                    controls: Optional[SolverControls] = None) -> GroundStateBracket:
    """Shrink an opposite-tag pair to width ``tol`` by plain bisection."""
    if lo.tag == hi.tag:
        raise ClassificationError(f"seeds carry the same tag {lo.tag}", lo.alpha)
    a, b = lo, hi
    while b.alpha - a.alpha > tol:
        m = 0.5 * (a.alpha + b.alpha)
        if not a.alpha < m < b.alpha:
            break
        c = _definite(nl, m, controls)
        if c.tag == a.tag:
            a = c
        else:
            b = c
    return GroundStateBracket(a.alpha, b.alpha, a.tag, b.tag, a.R, b.R)


def find_alpha_star(nl, seeds: Optional[tuple] = None, tol: float = 1e-10,
                    controls: Optional[SolverControls] = None) -> GroundStateBracket:
    """Bracket the ground state of the base model.

    Parameters
    ----------
    nl : BaseModel or PiecewiseNonlinearity
        Only the base part matters below the first block.
    seeds : (alpha_P, alpha_N), optional
        Defaults to ``beta`` (always ``P``: the energy starts at zero and
        decreases) and the first ``N`` shot of a doubling ladder.
    tol : float
    controls : SolverControls, optional
    """
    nl = _as_nl(nl)
    if seeds is None:
        lo = _definite(nl, nl.base.beta, controls)
        alpha = 2.0 * nl.base.beta
        for _ in range(60):
            hi = _definite(nl, alpha, controls)
            if hi.tag == TAG_N:
                break
            alpha *= 2.0
        else:
            raise ClassificationError("no N shot found on the doubling ladder", alpha)
    else:
        lo = _definite(nl, seeds[0], controls)
        hi = _definite(nl, seeds[1], controls)
    if lo.tag != TAG_P or hi.tag != TAG_N:
        raise ClassificationError(
            f"seeds must classify P and N, got {lo.tag} and {hi.tag}", lo.alpha)
    return bisect_boundary(nl, lo, hi, tol, controls)


@dataclass
class ScanResult:
    """Tag sequence of an alpha scan and the brackets found on it."""

    samples: list
    brackets: list
    undetermined: list
    levels: tuple = ()

    @property
    def tags(self) -> list:
        return [c.tag for c in self.samples]

    def transitions(self) -> list:
        """Adjacent definite pairs with different tags, as ``(tag_lo, tag_hi)``."""
        defin = [c for c in self.samples if c.definite]
        return [(a.tag, b.tag) for a, b in zip(defin, defin[1:]) if a.tag != b.tag]

    def to_csv(self, path_or_file):
        own = not hasattr(path_or_file, "write")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["alpha", "tag", "R", "r_star", "momentum"])
            lv = self.levels[0] if self.levels else None
            for c in self.samples:
                cr = c.crossing_at(lv) if lv is not None else None
                w.writerow([repr(c.alpha), c.tag, "" if c.R is None else repr(c.R),
                            "" if cr is None else repr(cr.r),
                            "" if cr is None else repr(cr.momentum)])
        finally:
            if own:
                fh.close()


def _grid(b, alpha_max, step):
    n = int(math.floor((alpha_max - b) / step + 1e-9))
    pts = [b + step * j for j in range(1, n + 1)]
    if not pts or pts[-1] < alpha_max - 1e-12 * max(1.0, alpha_max):
        pts.append(alpha_max)
    return pts


def _classify_many(nl, alphas, controls, levels, n_jobs):
    if n_jobs in (None, 1) or len(alphas) < 2:
        return [classify(nl, a, controls, levels=levels) for a in alphas]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(classify)(nl, a, controls, levels=levels)
                                   for a in alphas)


def scan_ground_states(nl, alpha_max: float, scan_step: Optional[float] = None,
                       tol: float = 1e-10, controls: Optional[SolverControls] = None, *,
                       expected: Optional[int] = None, seeds: Iterable[float] = (),
                       levels: Sequence[float] = (), n_jobs: Optional[int] = None
                       ) -> ScanResult:
    """Scan ``(b, alpha_max]`` and bisect every tag change.

    Parameters
    ----------
    nl : PiecewiseNonlinearity or BaseModel
    alpha_max : float
        Upper end of the scan, below ``gamma``.
    scan_step : float, optional
        Defaults to ``(alpha_max - b) / 400``.
    tol : float
        Bracket width.
    controls : SolverControls, optional
    expected : int, optional
        If fewer brackets are found, the scan is repeated once at half step.
    seeds : iterable of float
        Extra scan points, useful where features are narrower than the step.
    levels : sequence of float
        Crossing levels recorded on every sample.
    n_jobs : int, optional
        Parallel shots through joblib; results are ordered by alpha.
    """
    nl = _as_nl(nl)
    b = nl.base.b
    if not alpha_max > b:
        raise ValueError("alpha_max must exceed b")
    if not alpha_max < nl.gamma:
        raise ValueError("alpha_max must lie below gamma")
    step = scan_step if scan_step is not None else (alpha_max - b) / 400.0
    if not step > 0:
        raise ValueError("scan_step must be positive")
    ctl = controls or SolverControls()
    extra = sorted({float(s) for s in seeds if b < s <= alpha_max})
    levels = tuple(levels)

    def run(step):
        alphas = sorted(set(_grid(b, alpha_max, step)) | set(extra))
        samples = _classify_many(nl, alphas, ctl, levels, n_jobs)
        wide = ctl.replace(r_max=10 * ctl.r_max)
        samples = [c if c.definite else classify(nl, c.alpha, wide, levels=levels)
                   for c in samples]
        undetermined = [c for c in samples if not c.definite]
        defin = [c for c in samples if c.definite]
        brackets = [bisect_boundary(nl, lo, hi, tol, ctl)
                    for lo, hi in zip(defin, defin[1:]) if lo.tag != hi.tag]
        return ScanResult(samples, brackets, undetermined, levels)

    res = run(step)
    if expected is not None and len(res.brackets) < expected:
        res = run(step / 2.0)
    return res


def find_ground_states(nl, alpha_max: float, scan_step: Optional[float] = None,
                       tol: float = 1e-10, controls: Optional[SolverControls] = None,
                       **kw) -> list:
    """Brackets of all ground states found by ``scan_ground_states``, by alpha."""
    return scan_ground_states(nl, alpha_max, scan_step, tol, controls, **kw).brackets


def intersections(tr1: Trajectory, tr2: Trajectory, floor: float = -math.inf) -> list:
    """Radii where two shots cross, while both stay above ``floor``.

    Returns a list of ``(r, u)`` pairs in increasing ``r``.
    """
    r_end = min(tr1.r[-1], tr2.r[-1])
    grid = np.union1d(tr1.r[tr1.r <= r_end], tr2.r[tr2.r <= r_end])
    grid = grid[grid > 0]
    u1, u2 = tr1.u_at(grid), tr2.u_at(grid)
    keep = (u1 > floor) & (u2 > floor)
    if not keep.all():
        # keep the interval that ends on the floor, a crossing may sit inside it
        cut = int(np.argmin(keep)) + 1
        grid, u1, u2 = grid[:cut], u1[:cut], u2[:cut]
    d = u1 - u2
    out = []
    for i in range(len(d) - 1):
        if d[i] == 0.0:
            if u1[i] > floor:
                out.append((float(grid[i]), float(u1[i])))
        elif d[i] * d[i + 1] < 0:
            r = brentq(lambda x: float(tr1.u_at(x) - tr2.u_at(x)), grid[i], grid[i + 1],
                       xtol=1e-14)
            u = float(tr1.u_at(r))
            if u > floor:
                out.append((r, u))
    return out
