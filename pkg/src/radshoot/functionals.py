"""Comparison functionals evaluated on dense trajectories.

All quantities are computed from the interpolated state of an existing
trajectory; nothing here integrates again.  Negative ``u`` (the last few
samples of a sign-changing shot) is handled through the odd continuation
of ``f``, under which ``F`` and ``Q`` are even.
"""

from __future__ import annotations

import csv
import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .nonlinearity import DomainError, PiecewiseNonlinearity
from .odeint import Trajectory

BRANCH_SLOPE = 1e-12
ZERO_GUARD = 1e-6


class RadicandError(ValueError):
    """``u'**2 + 2F`` is negative where a square root is required."""

    def __init__(self, s, value):
        super().__init__(f"negative radicand {value!r} at s={s!r}")
        self.s = s
        self.value = value


class MonotoneBranch:
    """A decreasing stretch of a trajectory and its inverse ``s -> r(s)``.

    Parameters
    ----------
    trajectory : Trajectory
    r_lo, r_hi : float, optional
        Radius range.  By default the branch runs from the first sample to
        the last sample before ``u'`` stops being negative or ``u`` stops
        being positive.
    """

    def __init__(self, trajectory: Trajectory, r_lo: Optional[float] = None,
                 r_hi: Optional[float] = None):
        tr = trajectory
        self.trajectory = tr
        r_lo = float(tr.r[0]) if r_lo is None else float(r_lo)
        if r_hi is None:
            bad = (tr.v >= -BRANCH_SLOPE) | (tr.u <= 0.0)
            bad &= tr.r > r_lo
            r_hi = float(tr.r[int(np.argmax(bad)) - 1]) if bad.any() else float(tr.r[-1])
            # a terminal zero of u closes the branch exactly at R
            if bad.any() and tr.u[int(np.argmax(bad))] == 0.0 and tr.v[int(np.argmax(bad))] < 0:
                r_hi = float(tr.r[int(np.argmax(bad))])
        if not r_lo < r_hi:
            raise ValueError("empty monotone branch")
        inner = (tr.r > r_lo) & (tr.r <= r_hi)
        if np.any(tr.v[inner] >= -BRANCH_SLOPE):
            raise ValueError("u' is not strictly negative on the requested branch")
        self.r_lo, self.r_hi = r_lo, r_hi
        self._r = np.concatenate(([r_lo], tr.r[inner & (tr.r < r_hi)], [r_hi]))
        self._u = tr.u_at(self._r)

    def __repr__(self):
        return f"MonotoneBranch(r=[{self.r_lo:.6g}, {self.r_hi:.6g}], s=[{self.s_lo:.6g}, {self.s_hi:.6g}])"

    @property
    def N(self) -> int:
        return self.trajectory.N

    @property
    def s_lo(self) -> float:
        return float(self._u[-1])

    @property
    def s_hi(self) -> float:
        return float(self._u[0])

    def _r_scalar(self, s):
        if not (self.s_lo <= s <= self.s_hi):
            raise ValueError(f"s={s!r} outside the branch range [{self.s_lo}, {self.s_hi}]")
        if s == self.s_hi:
            return self.r_lo
        if s == self.s_lo:
            return self.r_hi
        # _u decreasing: locate the interval, then solve on the dense output
        j = int(np.searchsorted(-self._u, -s))
        a, b = self._r[max(j - 1, 0)], self._r[min(j, len(self._r) - 1)]
        if a == b:
            return float(a)
        tr = self.trajectory
        return brentq(lambda x: float(tr.u_at(x)) - s, a, b, xtol=1e-15, rtol=1e-15)

    def r_of(self, s):
        """Inverse of ``u`` on the branch."""
        if np.ndim(s) == 0:
            return self._r_scalar(float(s))
        return np.array([self._r_scalar(float(x)) for x in np.ravel(s)]).reshape(np.shape(s))

    def v_of(self, s):
        return self.trajectory.v_at(self.r_of(s))


def F_over_f(nl: PiecewiseNonlinearity, s: float) -> float:
    """``F(s) / f(s)``; on the base segment the common factor ``s`` is cancelled."""
    s = float(s)
    base = nl.base
    if nl.segment_index(s) == 0:
        if abs(s - base.b) < ZERO_GUARD:
            raise DomainError(f"F/f is singular at the zero s={s!r} of f")
        p = base.p
        if s == 0.0:
            return 0.0
        w = s ** (p - 1)
        return s * (w / (p + 1) - 0.5) / (w - 1.0)
    fs = nl.f(s)
    if abs(fs) < ZERO_GUARD:
        raise DomainError(f"F/f is singular near s={s!r}")
    return nl.F(s) / fs


def F_over_f_prime(nl: PiecewiseNonlinearity, s: float) -> float:
    """Derivative of ``F/f``, that is ``1 - F f' / f**2``."""
    s = float(s)
    if s == 0.0 and nl.segment_index(s) == 0:
        return 0.5
    fs = nl.f(s)
    if abs(fs) < ZERO_GUARD:
        raise DomainError(f"(F/f)' is singular near s={s!r}")
    return 1.0 - nl.F(s) * nl.df(s) / (fs * fs)


def erbe_tang_P(nl: PiecewiseNonlinearity, branch: MonotoneBranch, s, form: str = "inverse"):
    """Erbe-Tang functional on a monotone branch.

    ``form="inverse"`` evaluates the expression in the inverse function
    ``r(s)`` and ``r'(s) = 1/u'``; ``form="momentum"`` uses
    ``2 r^N (N (F/f) |u'| / r - u'^2/2 - F)``.  Both agree identically.
    """
    if np.ndim(s) != 0:
        return np.array([erbe_tang_P(nl, branch, x, form) for x in np.ravel(s)]
                        ).reshape(np.shape(s))
    s = float(s)
    N = nl.N
    r = branch.r_of(s)
    v = float(branch.trajectory.v_at(r))
    Fs = nl.F(s)
    if r == 0.0:
        return 0.0
    ff = F_over_f(nl, s)
    if form == "inverse":
        rp = 1.0 / v
        return -2 * N * ff * r ** (N - 1) / rp - r ** N / (rp * rp) - 2 * r ** N * Fs
    if form == "momentum":
        return 2 * r ** N * (N * ff * abs(v) / r - 0.5 * v * v - Fs)
    raise ValueError(f"unknown form {form!r}")


def erbe_tang_P_s(nl: PiecewiseNonlinearity, branch: MonotoneBranch, s: float) -> float:
    """Derivative of ``P`` in ``s``: ``(N - 2 - 2N (F/f)') r^(N-1) / r'``."""
    N = nl.N
    r = branch.r_of(s)
    v = float(branch.trajectory.v_at(r))
    return (N - 2 - 2 * N * F_over_f_prime(nl, s)) * r ** (N - 1) * v


def inverse_weight(branch: MonotoneBranch, s):
    """``r^(N-1) / r'(s) = r^(N-1) u'`` at level ``s``."""
    r = branch.r_of(s)
    return r ** (branch.N - 1) * branch.trajectory.v_at(r)


def _F_even(nl, u):
    return nl.F(np.abs(u))


def _Q_even(nl, u):
    return nl.Q(np.abs(u))


def pohozaev_E(nl: PiecewiseNonlinearity, tr: Trajectory, r):
    """``E = r^N (u'^2 + 2F(u)) + (N-2) r^(N-1) u' u`` from the dense output."""
    N = nl.N
    u, v = tr.state_at(r)
    r = np.asarray(r, dtype=float)
    return r ** N * (v * v + 2 * _F_even(nl, u)) + (N - 2) * r ** (N - 1) * v * u


def pohozaev_E_prime(nl: PiecewiseNonlinearity, tr: Trajectory, r):
    """``dE/dr = r^(N-1) Q(u)`` with ``Q = 2N F - (N-2) s f``."""
    u = tr.u_at(r)
    r = np.asarray(r, dtype=float)
    return r ** (nl.N - 1) * _Q_even(nl, u)


def w_radicand(nl: PiecewiseNonlinearity, branch: MonotoneBranch, s: float) -> float:
    v = float(branch.v_of(s))
    return v * v + 2 * nl.F(s)


def w_functional(nl: PiecewiseNonlinearity, branch: MonotoneBranch, s):
    """``W(s) = r(s) sqrt(u'(r(s))^2 + 2F(s))``.

    Raises
    ------
    RadicandError
        If the radicand is negative at ``s``.
    """
    if np.ndim(s) != 0:
        return np.array([w_functional(nl, branch, x) for x in np.ravel(s)]
                        ).reshape(np.shape(s))
    s = float(s)
    rad = w_radicand(nl, branch, s)
    if rad < 0:
        raise RadicandError(s, rad)
    return branch.r_of(s) * math.sqrt(rad)


def tail_energy_printed(nl: PiecewiseNonlinearity, tr: Trajectory, r):
    """``r^(2(N-1)) u'^2 + 2F(u)``, weighting only the kinetic term."""
    u, v = tr.state_at(r)
    r = np.asarray(r, dtype=float)
    return r ** (2 * (nl.N - 1)) * v * v + 2 * _F_even(nl, u)


def tail_energy_weighted(nl: PiecewiseNonlinearity, tr: Trajectory, r):
    """``r^(2(N-1)) (u'^2 + 2F(u))``; decreasing wherever ``F(u) < 0``."""
    u, v = tr.state_at(r)
    r = np.asarray(r, dtype=float)
    return r ** (2 * (nl.N - 1)) * (v * v + 2 * _F_even(nl, u))


def export_PW_csv(nl, branch: MonotoneBranch, s_values, path_or_file):
    """Write ``s, P, W`` rows; ``W`` is blank where its radicand is negative."""
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "P", "W"])
        for s in s_values:
            s = float(s)
            try:
                P = repr(float(erbe_tang_P(nl, branch, s)))
            except DomainError:
                P = ""
            try:
                W = repr(float(w_functional(nl, branch, s)))
            except RadicandError:
                W = ""
            w.writerow([repr(s), P, W])
    finally:
        if own:
            fh.close()


def export_E_csv(nl, tr: Trajectory, r_values, path_or_file):
    """Write ``r, E, E_prime`` rows."""
    r_values = np.asarray(r_values, dtype=float)
    E = pohozaev_E(nl, tr, r_values)
    Ep = pohozaev_E_prime(nl, tr, r_values)
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "E", "E_prime"])
        for row in zip(r_values, E, Ep):
            w.writerow([repr(float(x)) for x in row])
    finally:
        if own:
            fh.close()
