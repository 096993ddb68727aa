"""Piecewise nonlinearities made of a base model and amplified upper blocks.

The nonlinearity follows the base model ``f1(s) = s**p - s`` up to the first
breakpoint, then alternates affine bridges and amplified blocks
``A_i**2 * f_i(s)``.  Every bridge is rebuilt from the values of its two
neighbours, so the compiled function is continuous by construction.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Sequence, Union

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

UNBOUNDED = math.inf


class DomainError(ValueError):
    """Raised when a nonlinearity is evaluated outside ``[0, gamma)``."""


class ConstructionError(ValueError):
    """Raised when a chain of blocks cannot be compiled."""


@dataclass(frozen=True)
class BaseModel:
    """Base nonlinearity ``f1(s) = s**p - s`` in dimension ``N``.

    ``supercritical`` must be set explicitly to allow ``p`` at or above the
    critical exponent ``(N + 2) / (N - 2)``.
    """

    p: float
    N: int
    supercritical: bool = False

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not (math.isfinite(self.p) and self.p > 1):
            raise ValueError(f"p must be a finite number > 1, got {self.p!r}")
        if not self.supercritical and self.p >= self.critical_exponent:
            raise ValueError(
                f"p={self.p} is not subcritical for N={self.N} "
                f"(critical exponent {self.critical_exponent:g}); "
                "pass supercritical=True to allow it"
            )

    @property
    def critical_exponent(self) -> float:
        return (self.N + 2) / (self.N - 2)

    @property
    def b(self) -> float:
        """Last zero of ``f1``."""
        return 1.0

    @cached_property
    def beta(self) -> float:
        """Unique positive zero of the primitive ``F1``."""
        return ((self.p + 1) / 2) ** (1 / (self.p - 1))

    def f(self, s):
        return s**self.p - s

    def F(self, s):
        return s ** (self.p + 1) / (self.p + 1) - 0.5 * s * s

    def df(self, s):
        return self.p * s ** (self.p - 1) - 1

    def to_dict(self) -> dict:
        return {"p": self.p, "N": self.N, "supercritical": self.supercritical}


# -- block kinds ---------------------------------------------------------------


@dataclass(frozen=True)
class Power:
    """``f_i(s) = s**q``."""

    q: float
    name: ClassVar[str] = "power"

    def __post_init__(self):
        if not (math.isfinite(self.q) and self.q > 0):
            raise ValueError(f"power exponent must be positive, got {self.q!r}")

    def f(self, s):
        return s**self.q

    def df(self, s):
        return self.q * s ** (self.q - 1)

    def integral(self, lo, hi):
        q1 = self.q + 1
        return (hi**q1 - lo**q1) / q1

    def extremes(self, lo, hi):
        return self.f(lo), self.f(hi)

    def to_dict(self):
        return {"kind": self.name, "q": self.q}


@dataclass(frozen=True)
class AffineSine:
    """``f_i(s) = c0 + c1 * sin(omega * s)``; ``c1 = 0`` gives a constant."""

    c0: float
    c1: float = 0.0
    omega: float = 1.0
    name: ClassVar[str] = "affine-sine"

    def __post_init__(self):
        if self.omega == 0 or not all(
            math.isfinite(x) for x in (self.c0, self.c1, self.omega)
        ):
            raise ValueError("affine-sine needs finite c0, c1 and nonzero omega")

    def f(self, s):
        return self.c0 + self.c1 * math.sin(self.omega * s)

    def df(self, s):
        return self.c1 * self.omega * math.cos(self.omega * s)

    def integral(self, lo, hi):
        w = self.omega
        return self.c0 * (hi - lo) - self.c1 / w * (math.cos(w * hi) - math.cos(w * lo))

    def extremes(self, lo, hi):
        if self.c1 == 0:
            return self.c0, self.c0
        amp = abs(self.c1)
        if not math.isfinite(hi) or abs(self.omega) * (hi - lo) >= 2 * math.pi:
            return self.c0 - amp, self.c0 + amp
        vals = [self.f(lo), self.f(hi)]
        # critical points: omega * s = pi/2 + k*pi
        x0, x1 = sorted((self.omega * lo, self.omega * hi))
        for k in range(math.ceil((x0 - math.pi / 2) / math.pi),
                       math.floor((x1 - math.pi / 2) / math.pi) + 1):
            vals.append(self.f((math.pi / 2 + k * math.pi) / self.omega))
        return min(vals), max(vals)

    def to_dict(self):
        return {"kind": self.name, "c0": self.c0, "c1": self.c1, "omega": self.omega}


@dataclass(frozen=True)
class Sampled:
    """Tabulated block interpolated by a monotone cubic (PCHIP).

    Experimental.  Outside the table the first/last value is held constant.
    """

    xs: tuple
    ys: tuple
    name: ClassVar[str] = "custom-sampled"

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        ys = tuple(float(y) for y in self.ys)
        if len(xs) < 2 or len(xs) != len(ys):
            raise ValueError("sampled block needs >= 2 (x, y) pairs of equal length")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("sampled block abscissae must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @cached_property
    def _pchip(self):
        return PchipInterpolator(self.xs, self.ys, extrapolate=False)

    @cached_property
    def _antider(self):
        return self._pchip.antiderivative()

    def f(self, s):
        if s <= self.xs[0]:
            return self.ys[0]
        if s >= self.xs[-1]:
            return self.ys[-1]
        return float(self._pchip(s))

    def df(self, s):
        if s <= self.xs[0] or s >= self.xs[-1]:
            return 0.0
        return float(self._pchip(s, 1))

    def _prim(self, s):
        x0, x1 = self.xs[0], self.xs[-1]
        if s <= x0:
            return self.ys[0] * (s - x0)
        if s >= x1:
            return float(self._antider(x1)) + self.ys[-1] * (s - x1)
        return float(self._antider(s))

    def integral(self, lo, hi):
        return self._prim(hi) - self._prim(lo)

    def extremes(self, lo, hi):
        # PCHIP does not overshoot its data, so extremes sit at knots or ends
        vals = [self.f(lo)] + [y for x, y in zip(self.xs, self.ys) if lo < x < hi]
        if math.isfinite(hi):
            vals.append(self.f(hi))
        elif hi > self.xs[-1]:
            vals.append(self.ys[-1])
        return min(vals), max(vals)

    def to_dict(self):
        return {"kind": self.name, "xs": list(self.xs), "ys": list(self.ys)}


BlockKind = Union[Power, AffineSine, Sampled]


def make_kind(spec) -> BlockKind:
    """Build a block kind from a dict such as ``{"kind": "power", "q": 2}``."""
    if isinstance(spec, (Power, AffineSine, Sampled)):
        return spec
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == Power.name:
        return Power(float(spec["q"]))
    if kind == AffineSine.name:
        return AffineSine(float(spec["c0"]), float(spec.get("c1", 0.0)),
                          float(spec.get("omega", 1.0)))
    if kind == Sampled.name:
        return Sampled(tuple(spec["xs"]), tuple(spec["ys"]))
    raise ValueError(f"unknown block kind {kind!r}")


@dataclass(frozen=True)
class BlockSpec:
    """One amplified block ``amplitude_sq * kind.f`` and the bridge below it.

    The bridge occupies ``[start, start + bridge_width]``; the block itself
    starts at ``start + bridge_width`` and runs up to the next block's start.
    """

    kind: BlockKind
    amplitude_sq: float
    start: float
    bridge_width: float

    def __post_init__(self):
        object.__setattr__(self, "kind", make_kind(self.kind))
        if not (math.isfinite(self.amplitude_sq) and self.amplitude_sq > 0):
            raise ConstructionError(f"amplitude_sq must be positive, got {self.amplitude_sq!r}")
        if not (math.isfinite(self.bridge_width) and self.bridge_width > 0):
            raise ConstructionError(f"bridge_width must be positive, got {self.bridge_width!r}")
        if not math.isfinite(self.start):
            raise ConstructionError("block start must be finite")

    @property
    def top(self) -> float:
        return self.start + self.bridge_width

    def to_dict(self):
        return {"kind": self.kind.to_dict(), "amplitude_sq": self.amplitude_sq,
                "start": self.start, "bridge_width": self.bridge_width}

    @classmethod
    def from_dict(cls, d):
        return cls(make_kind(d["kind"]), float(d["amplitude_sq"]), float(d["start"]),
                   float(d["bridge_width"]))


# -- segments --------------------------------------------------------------------


class _BaseSegment:
    label = "base"

    def __init__(self, lo, hi, base):
        self.lo, self.hi, self.base = lo, hi, base

    def f(self, s):
        return self.base.f(s)

    def df(self, s):
        return self.base.df(s)

    def integral(self, lo, hi):
        return self.base.F(hi) - self.base.F(lo)


class _Bridge:
    label = "bridge"

    def __init__(self, lo, hi, y0, y1):
        self.lo, self.hi, self.y0, self.y1 = lo, hi, y0, y1
        self.slope = (y1 - y0) / (hi - lo)
        self.mid = 0.5 * (lo + hi)

    def f(self, s):
        # anchor at the nearer end so both junction values are reproduced exactly
        if s <= self.mid:
            return self.y0 + self.slope * (s - self.lo)
        return self.y1 + self.slope * (s - self.hi)

    def df(self, s):
        return self.slope

    def integral(self, lo, hi):
        # exact trapezoid: the integrand is affine
        return 0.5 * (self.f(lo) + self.f(hi)) * (hi - lo)


class _Block:
    label = "block"

    def __init__(self, lo, hi, kind, amplitude_sq):
        self.lo, self.hi, self.kind, self.amplitude_sq = lo, hi, kind, amplitude_sq

    def f(self, s):
        return self.amplitude_sq * self.kind.f(s)

    def df(self, s):
        return self.amplitude_sq * self.kind.df(s)

    def integral(self, lo, hi):
        return self.amplitude_sq * self.kind.integral(lo, hi)


class PiecewiseNonlinearity:
    """Compiled, immutable piecewise nonlinearity with primitive ``F``.

    Use :func:`compile_nonlinearity` to build one.  ``f``, ``F``, ``Q`` and
    ``df`` accept scalars or arrays and raise :class:`DomainError` outside
    ``[0, gamma)``.
    """

    def __init__(self, base: BaseModel, blocks: tuple, gamma: float, segments: list):
        self.base = base
        self.blocks = blocks
        self.gamma = gamma
        self.segments = tuple(segments)
        self._los = [seg.lo for seg in segments]
        cum = [0.0]
        for seg in segments[:-1]:
            cum.append(cum[-1] + seg.integral(seg.lo, seg.hi))
        self._F_lo = cum
        self._f_b = base.f  # hot path for the first segment
        self._first_hi = self._los[1] if len(self._los) > 1 else math.inf

    def __repr__(self):
        return (f"PiecewiseNonlinearity(p={self.base.p}, N={self.N}, "
                f"blocks={len(self.blocks)}, gamma={self.gamma})")

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def breakpoints(self) -> tuple:
        return tuple(self._los[1:])

    def segment_index(self, s: float) -> int:
        return bisect.bisect_right(self._los, s) - 1

    def _check(self, s):
        if not (0.0 <= s < self.gamma):
            raise DomainError(f"s={s!r} outside the domain [0, {self.gamma})")

    def _scalar_f(self, s):
        self._check(s)
        return self.segments[self.segment_index(s)].f(s)

    def _scalar_F(self, s):
        self._check(s)
        i = self.segment_index(s)
        seg = self.segments[i]
        return self._F_lo[i] + seg.integral(seg.lo, s)

    def _scalar_df(self, s):
        self._check(s)
        return self.segments[self.segment_index(s)].df(s)

    def _scalar_Q(self, s):
        N = self.N
        return 2 * N * self._scalar_F(s) - (N - 2) * s * self._scalar_f(s)

    @staticmethod
    def _map(fn, s):
        if np.ndim(s) == 0:
            return fn(float(s))
        arr = np.asarray(s, dtype=float)
        return np.array([fn(x) for x in arr.ravel()]).reshape(arr.shape)

    def f(self, s):
        return self._map(self._scalar_f, s)

    def F(self, s):
        return self._map(self._scalar_F, s)

    def Q(self, s):
        """Pohozaev combination ``2N F(s) - (N - 2) s f(s)``."""
        return self._map(self._scalar_Q, s)

    def df(self, s):
        return self._map(self._scalar_df, s)

    __call__ = f

    def f_ode(self, s: float) -> float:
        """Right-hand side used inside the integrator.

        Stage evaluations may step marginally outside the domain; below zero
        the base model is continued as an odd function and above ``gamma``
        the last formula is reused.
        """
        if s < 0.0:
            return -self.f_ode(-s)
        if s <= self._first_hi:
            return self._f_b(s)
        return self.segments[bisect.bisect_right(self._los, s) - 1].f(s)

    def df_in_segment(self, index: int, s: float) -> float:
        if s < 0.0:
            return self.segments[0].df(-s)
        return self.segments[index].df(s)

    @cached_property
    def junction_levels(self) -> tuple:
        """Levels where ``f`` loses smoothness, plus ``b`` and ``beta``."""
        levels = set(self._los[1:])
        for extra in (self.base.b, self.base.beta):
            if extra < self.gamma:
                levels.add(extra)
        return tuple(sorted(levels))

    @cached_property
    def pohozaev_threshold(self) -> float:
        """Largest ``s0`` such that ``Q < 0`` on ``(0, s0)``.

        Found by dense sampling followed by a bracketing root solve.
        """
        hi_cap = min(self.gamma, max(10 * self.base.beta, 10.0))
        grid = np.linspace(0.0, hi_cap, 4001)[1:]
        if math.isfinite(self.gamma):
            grid = grid[grid < self.gamma]
        prev = None
        for s in grid:
            q = self._scalar_Q(s)
            if q >= 0:
                if prev is None:
                    return 0.0
                return brentq(self._scalar_Q, prev, s, xtol=1e-14)
            prev = s
        return float(grid[-1])

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "gamma": "inf" if not math.isfinite(self.gamma) else self.gamma,
            "blocks": [blk.to_dict() for blk in self.blocks],
        }


def compile_nonlinearity(base: BaseModel, blocks: Sequence[BlockSpec] = (),
                         gamma: float = UNBOUNDED) -> PiecewiseNonlinearity:
    """Compile a base model and an ordered list of blocks.

    Parameters
    ----------
    base : BaseModel
        The nonlinearity used below the first breakpoint.
    blocks : sequence of BlockSpec
        Ordered blocks; each must start strictly above the previous block's
        bridge and above ``base.b``.
    gamma : float, optional
        Upper end of the domain, ``UNBOUNDED`` by default.

    Raises
    ------
    ConstructionError
        On overlapping segments, non-positive amplitudes, or a block that is
        not strictly positive on its segment.
    """
    blocks = tuple(blk if isinstance(blk, BlockSpec) else BlockSpec.from_dict(blk)
                   for blk in blocks)
    if not gamma > 0:
        raise ConstructionError("gamma must be positive")
    if blocks and blocks[0].start <= base.b:
        raise ConstructionError(
            f"first block starts at {blocks[0].start} <= b = {base.b}")
    for prev, nxt in zip(blocks, blocks[1:]):
        if not prev.top < nxt.start:
            raise ConstructionError(
                f"overlapping segments: bridge ending at {prev.top} "
                f"reaches the next start {nxt.start}")
    if blocks and not blocks[-1].top < gamma:
        raise ConstructionError("last bridge reaches gamma")

    segments = []
    first_hi = blocks[0].start if blocks else gamma
    segments.append(_BaseSegment(0.0, first_hi, base))
    for j, blk in enumerate(blocks):
        hi = blocks[j + 1].start if j + 1 < len(blocks) else gamma
        lo_val, _ = blk.kind.extremes(blk.top, hi)
        if not lo_val > 0:
            raise ConstructionError(
                f"block {j} ({blk.kind.to_dict()}) is not positive on "
                f"[{blk.top}, {hi}) (minimum {lo_val})")
        y0 = segments[-1].f(blk.start)
        y1 = blk.amplitude_sq * blk.kind.f(blk.top)
        segments.append(_Bridge(blk.start, blk.top, y0, y1))
        segments.append(_Block(blk.top, hi, blk.kind, blk.amplitude_sq))
    return PiecewiseNonlinearity(base, blocks, gamma, segments)


def power_chain(base: BaseModel, starts, widths, amplitudes_sq, q=2.0,
                gamma=UNBOUNDED) -> PiecewiseNonlinearity:
    """Shortcut for a chain of ``s**q`` blocks."""
    blocks = [BlockSpec(Power(q), a2, s0, w)
              for s0, w, a2 in zip(starts, widths, amplitudes_sq)]
    return compile_nonlinearity(base, blocks, gamma)
