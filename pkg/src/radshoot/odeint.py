"""Adaptive integration of the radial equation ``u'' + (N-1)/r u' + f(u) = 0``.

The stepper is the Dormand-Prince 5(4) pair written for the two scalar
unknowns ``(u, v = u')``.  A start at ``r = 0`` uses the regular series
``u = alpha - f(alpha) r**2 / (2N)``.  Events are located by re-stepping from
the start of the step that crossed them, so event states carry the full
accuracy of the method rather than that of an interpolant.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .nonlinearity import PiecewiseNonlinearity

# Dormand-Prince 5(4) tableau
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
# difference between the 5th and embedded 4th order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                22 / 525, -1 / 40)

STATUS_EVENT = "event"
STATUS_RMAX = "r_max"
STATUS_STEP_FAILURE = "step-failure"
STATUS_DOMAIN_EXIT = "domain-exit"
STATUS_MONITOR = "monitor"


@dataclass(frozen=True)
class RadialState:
    r: float
    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"radius must be finite and >= 0, got {self.r!r}")
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError("state (u, v) must be finite")


_DIRECTIONS = {"down": -1, "up": 1, "any": 0}


@dataclass(frozen=True)
class EventSpec:
    """A level crossing of ``u`` or a zero of ``v``.

    Use the ``u_crosses``, ``u_crosses_zero`` and ``v_crosses_zero``
    constructors.  ``terminal`` events stop the integration.
    """

    kind: str
    level: float = 0.0
    direction: str = "any"
    terminal: bool = False

    def __post_init__(self):
        if self.kind not in ("u-level", "u-zero", "v-zero"):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.direction not in _DIRECTIONS:
            raise ValueError(f"direction must be one of {sorted(_DIRECTIONS)}")
        if not math.isfinite(self.level):
            raise ValueError("event level must be finite")
        if self.kind != "u-level" and self.level != 0.0:
            raise ValueError(f"{self.kind} events have level 0")

    @classmethod
    def u_crosses(cls, level, direction="down", terminal=False):
        return cls("u-level", float(level), direction, terminal)

    @classmethod
    def u_crosses_zero(cls, direction="down", terminal=True):
        return cls("u-zero", 0.0, direction, terminal)

    @classmethod
    def v_crosses_zero(cls, direction="up", terminal=True):
        return cls("v-zero", 0.0, direction, terminal)

    @property
    def component(self) -> int:
        return 1 if self.kind == "v-zero" else 0


@dataclass(frozen=True)
class Event:
    spec: EventSpec
    state: RadialState
    residual: float


@dataclass(frozen=True)
class SolverControls:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    r_max: float = 1e3
    max_steps: int = 1_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "r_max"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")

    def replace(self, **changes) -> "SolverControls":
        return SolverControls(**{**self.__dict__, **changes})


def _step(f, fN, r, u, v, h, k1u, k1v):
    """One Dormand-Prince step; returns the new state, its slope and the error."""
    u2 = u + h * _A21 * k1u
    v2 = v + h * _A21 * k1v
    r2 = r + _C2 * h
    k2u, k2v = v2, -fN / r2 * v2 - f(u2)
    u3 = u + h * (_A31 * k1u + _A32 * k2u)
    v3 = v + h * (_A31 * k1v + _A32 * k2v)
    r3 = r + _C3 * h
    k3u, k3v = v3, -fN / r3 * v3 - f(u3)
    u4 = u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
    v4 = v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
    r4 = r + _C4 * h
    k4u, k4v = v4, -fN / r4 * v4 - f(u4)
    u5 = u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
    v5 = v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
    r5 = r + _C5 * h
    k5u, k5v = v5, -fN / r5 * v5 - f(u5)
    u6 = u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
    v6 = v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
    r6 = r + h
    k6u, k6v = v6, -fN / r6 * v6 - f(u6)
    un = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
    vn = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
    k7u, k7v = vn, -fN / r6 * vn - f(un)
    eu = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
    ev = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
    return un, vn, k7v, eu, ev


@dataclass
class _Watch:
    comp: int
    level: float
    direction: int
    terminal: bool
    spec: Optional[EventSpec]  # None for internal watches
    internal: str = ""

    def value(self, u, v):
        return (v if self.comp else u) - self.level

    def crossed(self, g0, g1):
        if self.direction <= 0 and g0 > 0 and g1 <= 0:
            return True
        if self.direction >= 0 and g0 < 0 and g1 >= 0:
            return True
        return False


def _locate(f, fN, r, u, v, k1u, k1v, h, watch, g0, g1, rtol_r=1e-12):
    """Find the crossing of ``watch`` inside ``[r, r + h]`` by re-stepping.

    Illinois-modified regula falsi on the step length.  Returns
    ``(tau_root, state_root, tau_after, state_after)`` where ``tau_after``
    lies on the far side of the crossing.
    """
    a, ga = 0.0, g0
    b, gb = h, g1
    sb = (u, v)  # placeholder, replaced once b is evaluated
    sa = (u, v)
    un, vn, _, _, _ = _step(f, fN, r, u, v, h, k1u, k1v)
    sb = (un, vn)
    if gb == 0.0:
        return b, sb, b, sb
    tol = rtol_r * max(r + h, 1e-300)
    side = 0
    for _ in range(200):
        c = b - gb * (b - a) / (gb - ga)
        if not (a < c < b):
            c = 0.5 * (a + b)
        uc, vc, _, _, _ = _step(f, fN, r, u, v, c, k1u, k1v)
        gc = watch.value(uc, vc)
        if gc == 0.0:
            return c, (uc, vc), c, (uc, vc)
        if (gc > 0) == (gb > 0):
            b, gb, sb = c, gc, (uc, vc)
            if side == -1:
                ga *= 0.5
            side = -1
        else:
            a, ga, sa = c, gc, (uc, vc)
            if side == 1:
                gb *= 0.5
            side = 1
        if b - a <= tol:
            break
    # root estimate: whichever end has the smaller residual
    if abs(watch.value(*sa)) <= abs(watch.value(*sb)) and a > 0:
        return a, sa, b, sb
    return b, sb, b, sb


class Trajectory:
    """Accepted samples ``(r, u, v)`` of one integration plus its events.

    Between samples the solution is reconstructed by quintic Hermite
    interpolation using ``u, u', u''`` (for ``u``) and ``v, v', v''`` (for
    ``v``); the derivatives come from the equation itself.
    """

    def __init__(self, nl, r, u, v, a, events, status, reason="", n_steps=0,
                 n_rejected=0):
        self.nl = nl
        self.r = np.asarray(r, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.a = np.asarray(a, dtype=float)
        self.events = list(events)
        self.status = status
        self.reason = reason
        self.n_steps = n_steps
        self.n_rejected = n_rejected
        self._jerk = None

    def __repr__(self):
        return (f"Trajectory(samples={len(self.r)}, r_end={self.r[-1]:.6g}, "
                f"status={self.status!r}, events={len(self.events)})")

    @property
    def N(self) -> int:
        return self.nl.N

    @property
    def final(self) -> RadialState:
        return RadialState(float(self.r[-1]), float(self.u[-1]), float(self.v[-1]))

    @property
    def terminal_event(self) -> Optional[Event]:
        if self.status == STATUS_EVENT and self.events and self.events[-1].spec.terminal:
            return self.events[-1]
        return None

    def events_of(self, spec: EventSpec) -> list:
        return [ev for ev in self.events if ev.spec == spec]

    def _jerks(self):
        """``v''`` at both ends of every interval, one-sided across junctions."""
        if self._jerk is None:
            nl = self.nl
            n = len(self.r) - 1
            left = np.empty(n)
            right = np.empty(n)
            for i in range(n):
                seg = nl.segment_index(max(0.5 * (self.u[i] + self.u[i + 1]), 0.0))
                left[i] = self._jerk_at(seg, i)
                right[i] = self._jerk_at(seg, i + 1)
            self._jerk = (left, right)
        return self._jerk

    def _jerk_at(self, seg, j):
        rj = self.r[j]
        if rj == 0.0:
            return 0.0
        fN = self.N - 1
        return (fN * self.v[j] / rj**2 - fN * self.a[j] / rj
                - self.nl.df_in_segment(seg, self.u[j]) * self.v[j])

    def _interval(self, rq):
        rq = np.asarray(rq, dtype=float)
        if np.any(rq < self.r[0]) or np.any(rq > self.r[-1]):
            raise ValueError(
                f"radius outside the trajectory range [{self.r[0]}, {self.r[-1]}]")
        idx = np.clip(np.searchsorted(self.r, rq, side="right") - 1, 0, len(self.r) - 2)
        h = self.r[idx + 1] - self.r[idx]
        t = (rq - self.r[idx]) / h
        return rq, idx, h, t

    @staticmethod
    def _hermite5(t, h, p0, m0, c0, p1, m1, c1, deriv=0):
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        if deriv == 0:
            h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
            h1 = t - 6 * t3 + 8 * t4 - 3 * t5
            h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
            h3 = 0.5 * t3 - t4 + 0.5 * t5
            h4 = -4 * t3 + 7 * t4 - 3 * t5
            h5 = 10 * t3 - 15 * t4 + 6 * t5
            return (h0 * p0 + h1 * h * m0 + h2 * h * h * c0 + h3 * h * h * c1
                    + h4 * h * m1 + h5 * p1)
        d0 = -30 * t2 + 60 * t3 - 30 * t4
        d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4
        d2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4
        d3 = 1.5 * t2 - 4 * t3 + 2.5 * t4
        d4 = -12 * t2 + 28 * t3 - 15 * t4
        d5 = 30 * t2 - 60 * t3 + 30 * t4
        return (d0 * p0 + d1 * h * m0 + d2 * h * h * c0 + d3 * h * h * c1
                + d4 * h * m1 + d5 * p1) / h

    def u_at(self, rq):
        rq, i, h, t = self._interval(rq)
        return self._hermite5(t, h, self.u[i], self.v[i], self.a[i],
                              self.u[i + 1], self.v[i + 1], self.a[i + 1])

    def v_at(self, rq):
        rq, i, h, t = self._interval(rq)
        jl, jr = self._jerks()
        return self._hermite5(t, h, self.v[i], self.a[i], jl[i],
                              self.v[i + 1], self.a[i + 1], jr[i])

    def state_at(self, rq):
        return self.u_at(rq), self.v_at(rq)

    def crossing(self, level: float, direction: str = "down") -> Optional[float]:
        """First radius where the dense solution crosses ``level``."""
        g = self.u - level
        for i in range(len(g) - 1):
            hit = ((direction in ("down", "any") and g[i] > 0 >= g[i + 1])
                   or (direction in ("up", "any") and g[i] < 0 <= g[i + 1]))
            if hit:
                if g[i + 1] == 0:
                    return float(self.r[i + 1])
                return brentq(lambda x: float(self.u_at(x)) - level,
                              self.r[i], self.r[i + 1], xtol=1e-15, rtol=1e-15)
        return None

    def to_csv(self, path_or_file):
        """Write the samples as ``r,u,v`` rows."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "u", "v"])
            for row in zip(self.r, self.u, self.v):
                w.writerow([repr(float(x)) for x in row])
        finally:
            if own:
                fh.close()


def series_radius(N: int, f_alpha: float, abs_tol: float) -> float:
    """Radius of the series start: the omitted ``O(r**4)`` term stays below tolerance."""
    if f_alpha == 0:
        return 1e-3
    return min(1e-3, math.sqrt(2 * N * abs_tol / abs(f_alpha)))


def integrate(nl: PiecewiseNonlinearity, start: RadialState,
              events: Sequence[EventSpec] = (),
              controls: Optional[SolverControls] = None,
              monitor: Optional[Callable[[float, float, float], Optional[str]]] = None,
              ) -> Trajectory:
    """Integrate the radial equation from ``start``.

    Parameters
    ----------
    nl : PiecewiseNonlinearity
    start : RadialState
        At ``r = 0`` the slope must vanish.
    events : sequence of EventSpec
        Crossings to locate; terminal ones stop the integration.
    controls : SolverControls, optional
    monitor : callable, optional
        Called as ``monitor(r, u, v)`` after every accepted step; a non-empty
        string return value stops the integration with status ``"monitor"``.

    Returns
    -------
    Trajectory
        ``status`` is one of ``"event"``, ``"r_max"``, ``"step-failure"``,
        ``"domain-exit"`` or ``"monitor"``.
    """
    ctl = controls or SolverControls()
    N = nl.N
    fN = N - 1.0
    f = nl.f_ode
    rtol, atol, r_max = ctl.rel_tol, ctl.abs_tol, ctl.r_max
    if start.r == 0 and start.v != 0:
        raise ValueError("a start at r = 0 requires u'(0) = 0")
    if not (0.0 <= start.u < nl.gamma):
        raise ValueError(f"initial value {start.u} outside the domain [0, {nl.gamma})")

    watches = [_Watch(ev.component, ev.level, _DIRECTIONS[ev.direction], ev.terminal, ev)
               for ev in events]
    if not any(ev.terminal and ev.component == 0 and ev.level == 0.0 for ev in events):
        watches.append(_Watch(0, 0.0, -1, True, None, "domain-low"))
    if math.isfinite(nl.gamma):
        watches.append(_Watch(0, nl.gamma, 1, True, None, "domain-high"))
    junctions = list(nl.junction_levels)

    R, U, V, A = [], [], [], []
    found = []

    r, u, v = start.r, start.u, start.v
    if r == 0.0:
        fa = f(u)
        R.append(0.0); U.append(u); V.append(0.0); A.append(-fa / N)
        r = series_radius(N, fa, atol)
        u, v = u - fa * r * r / (2 * N), -fa * r / N
        h = r
    else:
        h = None
    a = -fN / r * v - f(u)
    R.append(r); U.append(u); V.append(v); A.append(a)
    if h is None:
        scale = atol + rtol * max(abs(u), abs(v))
        d1 = max(abs(v), abs(a))
        h = 0.01 * max(scale / rtol, 1e-6) / d1 if d1 > 0 else 1e-3 * max(r, 1.0)
        h = min(h, 0.1 * r, r_max - r) if r > 0 else h

    status, reason = STATUS_RMAX, ""
    n_steps = n_rej = 0
    g_prev = [w.value(u, v) for w in watches]
    while True:
        if r >= r_max:
            status = STATUS_RMAX
            break
        if n_steps >= ctl.max_steps:
            status, reason = STATUS_STEP_FAILURE, "max_steps"
            break
        h = min(h, r_max - r)
        if r + h == r or h <= 0:
            status, reason = STATUS_STEP_FAILURE, "step size underflow"
            break
        k1u, k1v = v, a
        un, vn, an, eu, ev = _step(f, fN, r, u, v, h, k1u, k1v)
        su = atol + rtol * max(abs(u), abs(un))
        sv = atol + rtol * max(abs(v), abs(vn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
        if not math.isfinite(err) or err > 1.0:
            n_rej += 1
            h *= 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            continue
        n_steps += 1
        h_next = h * (5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2))

        # crossings inside this step: events, domain edges, junctions
        candidates = []
        g_new = [w.value(un, vn) for w in watches]
        for w, g0, g1 in zip(watches, g_prev, g_new):
            if w.crossed(g0, g1):
                candidates.append((w, g0, g1))
        lo_u, hi_u = (u, un) if u < un else (un, u)
        j0 = bisect.bisect_right(junctions, lo_u)
        j1 = bisect.bisect_left(junctions, hi_u)
        if j0 < j1:
            lev = junctions[j0] if un > u else junctions[j1 - 1]
            jw = _Watch(0, lev, 0, False, None, "junction")
            candidates.append((jw, u - lev, un - lev))

        if candidates:
            best = None
            for w, g0, g1 in candidates:
                tau, s_root, tau_after, s_after = _locate(
                    f, fN, r, u, v, k1u, k1v, h, w, g0, g1)
                # user events win ties against internal watches
                key = (tau, 0 if w.spec is not None else 1)
                if best is None or key < best[0]:
                    best = (key, w, tau, s_root, tau_after, s_after)
            _, w, tau, s_root, tau_after, s_after = best
            if w.terminal:
                rr = r + tau
                ur, vr = s_root
                ar = -fN / rr * vr - f(ur)
                R.append(rr); U.append(ur); V.append(vr); A.append(ar)
                state = RadialState(rr, ur, vr)
                if w.spec is not None:
                    found.append(Event(w.spec, state, abs(w.value(ur, vr))))
                    status = STATUS_EVENT
                else:
                    status, reason = STATUS_DOMAIN_EXIT, w.internal
                break
            if w.spec is not None:
                ur, vr = s_root
                found.append(Event(w.spec, RadialState(r + tau, ur, vr),
                                   abs(w.value(ur, vr))))
            r = r + tau_after
            u, v = s_after
            a = -fN / r * v - f(u)
            R.append(r); U.append(u); V.append(v); A.append(a)
            g_prev = [wt.value(u, v) for wt in watches]
            h = h_next
            if monitor is not None:
                reason = monitor(r, u, v)
                if reason:
                    status = STATUS_MONITOR
                    break
            continue

        r, u, v, a = r + h, un, vn, an
        R.append(r); U.append(u); V.append(v); A.append(a)
        g_prev = g_new
        h = h_next
        if monitor is not None:
            reason = monitor(r, u, v)
            if reason:
                status = STATUS_MONITOR
                break

    return Trajectory(nl, R, U, V, A, found, status, reason or "", n_steps, n_rej)
