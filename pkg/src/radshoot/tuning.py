"""Search for the constants of an alternating block chain.

Block ``i`` (``i = 2 .. k``) multiplies ``f_i`` by ``A_i**2`` above the
bridge ``[alpha_{i-1}, alpha_{i-1} + eps_{i-1}]``.  The target is a set of
initial values ``alpha_i`` whose shots are ``P`` for even ``i`` and ``N``
for odd ``i``; a ground state then lies between each consecutive pair.

Even blocks push the amplitude up until the shot from ``alpha_i`` stays
positive.  Odd blocks push it down until the shot takes longer than an
escape radius ``K`` to fall back to ``alpha_*``, which forces a sign change.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .nonlinearity import (BaseModel, BlockSpec, PiecewiseNonlinearity, compile_nonlinearity,
                           make_kind)
from .odeint import EventSpec, RadialState, SolverControls, integrate
from .shooting import (TAG_N, TAG_P, ClassificationError, GroundStateBracket, classify,
                       crossing_moment, find_alpha_star, find_ground_states)

RATIO_BOUND = 1.5
DOUBLING_CAP = 60
HALVING_CAP = 60
EPS_FLOOR = 1e-12


class TuningError(RuntimeError):
    """A sub-tuner exhausted its search; ``block`` names the index ``i``."""

    def __init__(self, message, block=None, trace=None):
        super().__init__(f"block {block}: {message}" if block is not None else message)
        self.block = block
        self.trace = trace or []


@dataclass
class EscapeRadiusEstimate:
    """Radius ``K`` beyond which a fall through ``alpha_*`` forces ``N``."""

    K: float
    K_hat: float
    safety: float
    n_probes: int
    momenta: tuple
    growth: tuple

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("K must be positive")


@dataclass
class BlockRecord:
    i: int
    alpha: float
    eps: float  # width of the bridge below this block, eps_{i-1}
    start: float  # alpha_{i-1}
    amplitude_sq: float
    tag: str
    diagnostics: dict = field(default_factory=dict)


@dataclass
class ChainTuning:
    """Resolved constants of a ``k``-block chain and their verification."""

    k: int
    base: BaseModel
    kinds: list
    alpha_star: float
    alpha_star_bracket: tuple
    alpha0: float
    eps0: float
    blocks: list = field(default_factory=list)
    escape: Optional[EscapeRadiusEstimate] = None
    brackets: list = field(default_factory=list)

    @property
    def alpha_1(self) -> Optional[float]:
        return self.blocks[0].start if self.blocks else None

    def alphas(self) -> dict:
        out = {1: self.alpha_1} if self.blocks else {}
        out.update({blk.i: blk.alpha for blk in self.blocks})
        return out

    def block_specs(self, upto: Optional[int] = None) -> list:
        return [BlockSpec(self.kinds[blk.i - 2], blk.amplitude_sq, blk.start, blk.eps)
                for blk in self.blocks if upto is None or blk.i <= upto]

    def nonlinearity(self, upto: Optional[int] = None) -> PiecewiseNonlinearity:
        return compile_nonlinearity(self.base, self.block_specs(upto))

    def claim_violations(self) -> list:
        """Human-readable list of violated chain bounds; empty when all hold."""
        bad = []
        N = self.base.N
        prev_alpha = self.alpha_1
        for blk in self.blocks:
            upper = self.alpha_star + self.eps0 * (3 * N) ** blk.i
            lower = blk.start + blk.eps
            if not lower <= blk.alpha:
                bad.append(f"i={blk.i}: alpha_i={blk.alpha!r} below alpha_(i-1)+eps_(i-1)={lower!r}")
            if not blk.alpha <= upper * (1 + 1e-15):
                bad.append(f"i={blk.i}: alpha_i={blk.alpha!r} above alpha_*+eps0(3N)^i={upper!r}")
            if not blk.eps <= self.eps0 * (1 + 1e-15):
                bad.append(f"i={blk.i}: eps={blk.eps!r} exceeds eps0={self.eps0!r}")
            want = TAG_P if blk.i % 2 == 0 else TAG_N
            if blk.tag != want:
                bad.append(f"i={blk.i}: tag {blk.tag} but expected {want}")
            if blk.start != prev_alpha:
                bad.append(f"i={blk.i}: block start {blk.start!r} is not alpha_(i-1)={prev_alpha!r}")
            prev_alpha = blk.alpha
        return bad

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "base": self.base.to_dict(),
            "kinds": [kd.to_dict() for kd in self.kinds],
            "alpha_star": self.alpha_star,
            "alpha_star_bracket": list(self.alpha_star_bracket),
            "alpha0": self.alpha0,
            "eps0": self.eps0,
            "blocks": [asdict(blk) for blk in self.blocks],
            "escape": None if self.escape is None else asdict(self.escape),
            "brackets": [br.to_dict() for br in self.brackets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    @classmethod
    def from_dict(cls, d) -> "ChainTuning":
        base = BaseModel(**d["base"])
        esc = d.get("escape")
        if esc is not None:
            esc = EscapeRadiusEstimate(**{**esc, "momenta": tuple(esc["momenta"]),
                                          "growth": tuple(esc["growth"])})
        brackets = [GroundStateBracket(b["alpha_lo"], b["alpha_hi"], b["tag_lo"], b["tag_hi"],
                                       b.get("R_lo"), b.get("R_hi"))
                    for b in d.get("brackets", [])]
        return cls(int(d["k"]), base, [make_kind(kd) for kd in d["kinds"]],
                   float(d["alpha_star"]), tuple(d["alpha_star_bracket"]),
                   float(d["alpha0"]), float(d["eps0"]),
                   [BlockRecord(**blk) for blk in d["blocks"]], esc, brackets)

    @classmethod
    def from_json(cls, text: str) -> "ChainTuning":
        return cls.from_dict(json.loads(text))

    def reclassify(self, controls: Optional[SolverControls] = None) -> dict:
        """Tags of every ``alpha_i`` on the full compiled chain."""
        nl = self.nonlinearity()
        return {i: classify(nl, a, controls).tag for i, a in self.alphas().items()}


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _ratio(kind, lo, hi):
    mn, mx = kind.extremes(lo, hi)
    if not mn > 0:
        return math.inf
    return mx / mn


def pick_alpha0_and_eps0(alpha_star: float, kinds: Sequence, k: int, N: int, b: float = 1.0,
                         grid_points: int = 2001) -> tuple:
    """Largest ``alpha0 <= 2 alpha_*`` with every ``max f_i / min f_i <= 3/2``.

    The grid hit is refined to round-off by bisection on the ratio.  Returns
    ``(alpha0, eps0)`` with
    ``eps0 = min(alpha0 - alpha_*, (alpha_* - b)(N - 2)/6) / (3N)**k``.
    """
    kinds = [make_kind(kd) for kd in kinds]
    if k < 2:
        raise ValueError("k must be at least 2")

    def worst(x):
        return max(_ratio(kd, alpha_star, x) for kd in kinds)

    grid = np.linspace(alpha_star, 2.0 * alpha_star, grid_points)[1:]
    ok = [x for x in grid if worst(x) <= RATIO_BOUND]
    if not ok:
        raise TuningError("no alpha0 above alpha_* keeps the block ratio within 3/2")
    a0 = float(max(ok))
    if a0 < grid[-1]:
        nxt = float(grid[np.searchsorted(grid, a0) + 1])
        if worst(nxt) > RATIO_BOUND:
            lo, hi = a0, nxt
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if not lo < mid < hi:
                    break
                if worst(mid) <= RATIO_BOUND:
                    lo = mid
                else:
                    hi = mid
            a0 = lo
    eps0 = min(a0 - alpha_star, (alpha_star - b) * (N - 2) / 6.0) / (3 * N) ** k
    return a0, eps0


def estimate_escape_radius(nl, alpha_star: float, a_bar: Optional[float] = None,
                           b_bar: Optional[float] = None, growth=(1.0, 2.0, 4.0),
                           n_momenta: int = 9, safety: float = 2.0,
                           controls: Optional[SolverControls] = None,
                           rel_tol: float = 1e-3) -> EscapeRadiusEstimate:
    """Smallest probed ``K_hat`` whose restarts past it are all ``N``, times ``safety``.

    Every probe restarts the equation at ``r0 = K_hat * g`` from
    ``u = alpha_*`` with momentum ``r0 |u'| = m`` for ``m`` in
    ``[a_bar, b_bar]`` and ``g`` in ``growth``.
    """
    if isinstance(nl, BaseModel):
        nl = compile_nonlinearity(nl)
    N = nl.N
    b = nl.base.b
    a_bar = (N - 2) / 4.0 if a_bar is None else a_bar
    b_bar = (alpha_star - b) * (N - 2) / 2.0 if b_bar is None else b_bar
    momenta = tuple(float(m) for m in np.linspace(a_bar, b_bar, n_momenta))
    ctl = controls or SolverControls()
    count = [0]

    def all_n(K_hat):
        for g in growth:
            r0 = K_hat * g
            for m in momenta:
                count[0] += 1
                c = classify(nl, alpha_star, ctl,
                             start=RadialState(r0, alpha_star, -m / r0))
                if c.tag != TAG_N:
                    return False
        return True

    hi = 1.0
    r_cap = ctl.r_max / (4.0 * max(growth))
    while not all_n(hi):
        hi *= 2.0
        if hi > r_cap:
            raise TuningError("no escape radius found below r_max")
    lo = hi / 2.0
    while all_n(lo):
        hi, lo = lo, lo / 2.0
        if lo < 1e-6:
            break
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if all_n(mid):
            hi = mid
        else:
            lo = mid
    return EscapeRadiusEstimate(safety * hi, hi, safety, count[0], momenta, tuple(growth))


def lemma_epsilon_check(nl: PiecewiseNonlinearity, alpha: float, level_hi: float,
                        level_lo: float, controls: Optional[SolverControls] = None) -> dict:
    """Check the two-level crossing bounds on one shot.

    With ``m_hi = r_hi |u'(r_hi)|`` at ``level_hi`` and ``delta = level_hi -
    level_lo``, pick ``a`` just below ``m_hi / (2(N-2))``.  When ``a >
    delta`` the crossing of ``level_lo`` must satisfy ``r_lo < 2 r_hi`` and
    ``(N-2) a <= m_lo <= m_hi + 2 r_hi**2 max f delta / ((N-2) a)``.
    """
    N = nl.N
    ctl = controls or SolverControls()
    ev_hi = EventSpec.u_crosses(level_hi, "down")
    ev_lo = EventSpec.u_crosses(level_lo, "down", terminal=True)
    tr = integrate(nl, RadialState(0.0, alpha, 0.0),
                   [ev_hi, ev_lo, EventSpec.v_crosses_zero()], ctl)
    hi = tr.events_of(ev_hi)
    lo = tr.events_of(ev_lo)
    if not hi or not lo:
        return {"applicable": False, "reason": "level not reached"}
    r_hi, m_hi = hi[0].state.r, hi[0].state.r * abs(hi[0].state.v)
    r_lo, m_lo = lo[0].state.r, lo[0].state.r * abs(lo[0].state.v)
    delta = level_hi - level_lo
    a = m_hi / (2 * (N - 2)) * (1 - 1e-9)
    g_max = float(np.max(nl.f(np.linspace(level_lo, level_hi, 257))))
    upper = m_hi + 2 * r_hi ** 2 * g_max * delta / ((N - 2) * a)
    out = {"applicable": a > delta, "r_hi": r_hi, "m_hi": m_hi, "r_lo": r_lo, "m_lo": m_lo,
           "a": a, "delta": delta, "upper": upper}
    if a > delta:
        out["radius_ok"] = r_lo < 2 * r_hi
        out["sandwich_ok"] = (N - 2) * a <= m_lo <= upper
    return out


def _max_on(kind, lo, hi, amplitude_sq=1.0):
    return amplitude_sq * kind.extremes(lo, hi)[1]


def tune_even_block(tuning: ChainTuning, i: int, controls: Optional[SolverControls] = None,
                    a_bar: Optional[float] = None, cap: int = DOUBLING_CAP,
                    amplitude_sq: Optional[float] = None) -> ChainTuning:
    """Place ``alpha_i = alpha_* + eps0 (3N)**i`` and raise ``A_i`` until it is ``P``.

    The first amplitude matches the previous block's size on
    ``[alpha_*, alpha0]`` unless ``amplitude_sq`` is given.  Each failed
    shot multiplies ``A_i**2`` by 4; after ``cap`` of them the bridge width
    is halved and the search restarts.
    """
    if i % 2 or i < 2:
        raise ValueError("even block index >= 2 required")
    if len(tuning.blocks) != i - 2:
        raise ValueError(f"blocks 2..{i - 1} must be tuned first")
    base, N, b = tuning.base, tuning.base.N, tuning.base.b
    a_star, eps0 = tuning.alpha_star, tuning.eps0
    kind = tuning.kinds[i - 2]
    alpha_i = a_star + eps0 * (3 * N) ** i
    a_bar = (N - 2) / 4.0 if a_bar is None else a_bar
    b_bar = (a_star - b) * (N - 2) / 2.0
    interval = (a_star, tuning.alpha0)
    if i == 2:
        prev_amp, prev_max = 1.0, float(np.max(np.abs(base.f(np.linspace(*interval, 257)))))
    else:
        prev = tuning.blocks[-1]
        prev_amp = prev.amplitude_sq
        prev_max = _max_on(tuning.kinds[i - 3], *interval)
    amp0 = prev_amp * prev_max / _max_on(kind, *interval)
    if amplitude_sq is not None:
        amp0 = amplitude_sq

    eps = eps0 / 2.0
    trace = []
    while eps >= EPS_FLOOR:
        start = a_star + eps if i == 2 else tuning.blocks[-1].alpha
        amp = amp0
        for _ in range(cap):
            specs = tuning.block_specs() + [BlockSpec(kind, amp, start, eps)]
            nl = compile_nonlinearity(base, specs)
            c = classify(nl, alpha_i, controls, levels=(a_star, start + eps))
            cr = c.crossing_at(a_star)
            trace.append((eps, amp, c.tag, None if cr is None else cr.momentum))
            if c.tag == TAG_P:
                rec = BlockRecord(i, alpha_i, eps, start, amp, c.tag)
                rec.diagnostics = _even_diagnostics(tuning, nl, rec, c, a_bar, b_bar,
                                                    controls, specs)
                tuning.blocks.append(rec)
                return tuning
            amp *= 4.0
        eps /= 2.0
    raise TuningError("amplitude doubling cap reached at every bridge width", i, trace)


def _even_diagnostics(tuning, nl, rec, c, a_bar, b_bar, controls, specs):
    N, a_star, eps0 = tuning.base.N, tuning.alpha_star, tuning.eps0
    d = {"a_bar": a_bar, "b_bar": b_bar, "R": c.R, "reason": c.reason}
    cr = c.crossing_at(a_star)
    ci = c.crossing_at(rec.start + rec.eps)
    if cr is not None:
        d["r_star"] = cr.r
        d["momentum_star"] = cr.momentum
        d["in_fixed_window"] = bool(a_bar <= cr.momentum <= b_bar)
        d["r_star_below_R"] = c.R is None or cr.r < c.R
    if cr is not None and ci is not None:
        # smallest admissible a: 2 eps < a < r_i |u'(r_i)| / (2(N-2))
        a_min = 2 * rec.eps * (1 + 1e-9)
        d["a_admissible"] = bool(a_min < ci.momentum / (2 * (N - 2)))
        d["a_bar_admissible"] = (N - 2) * a_min
        d["in_window"] = bool(d["a_admissible"]
                              and d["a_bar_admissible"] <= cr.momentum <= b_bar)
    if ci is not None:
        d["r_i"] = ci.r
        d["momentum_i"] = ci.momentum
        gap = rec.start + eps0 - a_star
        # the lower bound is printed once with and once without a trailing eps0
        d["step1_bound_with_eps0"] = 4 * (N - 2) * gap * eps0
        d["step1_bound"] = 4 * (N - 2) * gap
        d["step1_with_eps0_ok"] = bool(ci.momentum > d["step1_bound_with_eps0"])
        d["step1_ok"] = bool(ci.momentum > d["step1_bound"])
    # monotone response: still P at twice the amplitude
    doubled = specs[:-1] + [BlockSpec(specs[-1].kind, 4.0 * rec.amplitude_sq,
                                      specs[-1].start, specs[-1].bridge_width)]
    d["doubled_amplitude_tag"] = classify(compile_nonlinearity(tuning.base, doubled),
                                          rec.alpha, controls).tag
    d["lemma_epsilon"] = lemma_epsilon_check(nl, rec.alpha, rec.start + rec.eps, rec.start,
                                             controls)
    return d


def tune_odd_block(tuning: ChainTuning, i: int, controls: Optional[SolverControls] = None,
                   cap: int = HALVING_CAP) -> ChainTuning:
    """Place ``alpha_i = alpha_{i-1} + 2.5 eps0`` and lower ``A_i`` until it is ``N``."""
    if i % 2 == 0 or i < 3:
        raise ValueError("odd block index >= 3 required")
    if len(tuning.blocks) != i - 2:
        raise ValueError(f"blocks 2..{i - 1} must be tuned first")
    if tuning.escape is None:
        raise ValueError("an escape radius estimate is required")
    base, N = tuning.base, tuning.base.N
    eps0, K = tuning.eps0, tuning.escape.K
    kind = tuning.kinds[i - 2]
    start = tuning.blocks[-1].alpha
    alpha_i = start + 2.5 * eps0
    level = start + eps0
    f_max = _max_on(kind, level, alpha_i)
    # smallest radius allowed by the block's growth, inverted for the amplitude
    amp = min(1.0, 0.5 * 2 * N * eps0 / (K * K * f_max))
    trace = []
    for _ in range(cap):
        specs = tuning.block_specs() + [BlockSpec(kind, amp, start, eps0)]
        nl = compile_nonlinearity(base, specs)
        try:
            r_i, m_i = crossing_moment(nl, alpha_i, level, controls)
        except ClassificationError:
            r_i, m_i = math.nan, math.nan
        trace.append((amp, r_i))
        if r_i > K:
            c = classify(nl, alpha_i, controls, levels=(tuning.alpha_star,))
            rec = BlockRecord(i, alpha_i, eps0, start, amp, c.tag, {
                "K": K, "r_i": r_i, "momentum_i": m_i,
                "radius_lower_bound": math.sqrt(2 * N * (alpha_i - level) / (amp * f_max)),
                "R": c.R, "reason": c.reason})
            if c.tag != TAG_N:
                raise TuningError(f"radius {r_i} exceeds K={K} but the shot is {c.tag}; "
                                  "the escape radius is too small", i, trace)
            tuning.blocks.append(rec)
            return tuning
        amp /= 4.0
    raise TuningError("amplitude halving cap reached", i, trace)


def tune_chain(base: BaseModel, kinds: Sequence, k: int,
               controls: Optional[SolverControls] = None, *,
               alpha_star_bracket: Optional[GroundStateBracket] = None,
               a_bar: Optional[float] = None, verify: bool = True,
               tol: float = 1e-10, doubling_cap: int = DOUBLING_CAP,
               halving_cap: int = HALVING_CAP) -> ChainTuning:
    """Tune an alternating chain of ``k - 1`` blocks above the base model.

    Parameters
    ----------
    base : BaseModel
    kinds : sequence
        Block kinds for ``i = 2 .. k`` (a single kind is repeated).
    k : int
        Number of ground states targeted, at least 2.
    controls : SolverControls, optional
    alpha_star_bracket : GroundStateBracket, optional
        Reused instead of a fresh bisection.
    a_bar : float, optional
        Lower end of the momentum window, ``(N - 2)/4`` by default.
    verify : bool
        Scan the tuned chain and store its ground-state brackets.
    tol : float
        Bracket width for the base ground state and the final scan.
    doubling_cap, halving_cap : int
        Amplitude steps allowed per even and per odd block.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    kinds = [make_kind(kd) for kd in kinds]
    if len(kinds) == 1:
        kinds = kinds * (k - 1)
    if len(kinds) != k - 1:
        raise ValueError(f"need {k - 1} block kinds, got {len(kinds)}")
    br = alpha_star_bracket or find_alpha_star(compile_nonlinearity(base), tol=tol,
                                               controls=controls)
    a_star = br.midpoint
    a0, eps0 = pick_alpha0_and_eps0(a_star, kinds, k, base.N, base.b)
    tuning = ChainTuning(k, base, kinds, a_star, (br.alpha_lo, br.alpha_hi), a0, eps0)
    if k >= 3:
        tuning.escape = estimate_escape_radius(compile_nonlinearity(base), a_star,
                                               a_bar=a_bar, controls=controls)
    for i in range(2, k + 1):
        try:
            if i % 2 == 0:
                tune_even_block(tuning, i, controls, a_bar, doubling_cap)
            else:
                tune_odd_block(tuning, i, controls, halving_cap)
        except TuningError:
            raise
        except ClassificationError as exc:
            raise TuningError(str(exc), i) from exc
    if verify:
        verify_chain(tuning, controls, tol)
    return tuning


def verify_chain(tuning: ChainTuning, controls: Optional[SolverControls] = None,
                 tol: float = 1e-10) -> list:
    """Scan the compiled chain up to ``alpha_k + 3 eps0`` and store the brackets."""
    nl = tuning.nonlinearity()
    alphas = tuning.alphas()
    top = max(alphas.values()) + 3 * tuning.eps0
    seeds = list(alphas.values()) + list(tuning.alpha_star_bracket)
    tuning.brackets = find_ground_states(nl, top, tol=tol, controls=controls,
                                         seeds=seeds, expected=tuning.k)
    return tuning.brackets


def first_tagged_alpha(nl, lo: float, want: str, step: float = 0.01, span: float = 50.0,
                       controls: Optional[SolverControls] = None) -> tuple:
    """First ``lo + n * step`` (``n >= 1``) whose shot is tagged ``want``."""
    for n in range(1, int(span / step) + 1):
        alpha = lo + n * step
        if alpha >= nl.gamma:
            break
        c = classify(nl, alpha, controls)
        if c.tag == want:
            return alpha, c
    raise TuningError(f"no {want} shot within {span} above {lo}")


def tune_fixed_chain(base: BaseModel, kinds: Sequence, amplitudes_sq: Sequence[float],
                     widths: Sequence[float], alpha_star: float, *,
                     alpha_star_bracket: tuple = (), step: float = 0.01,
                     search_span: float = 50.0,
                     controls: Optional[SolverControls] = None) -> ChainTuning:
    """Alternating initial values for a chain with prescribed amplitudes and widths.

    ``alpha_1 = alpha_* + eps_1``; for each ``i >= 2`` the chain truncated at
    block ``i`` is searched upward from ``alpha_{i-1} + eps_{i-1}`` in steps
    of ``step`` for the first ``P`` (even ``i``) or ``N`` (odd ``i``).  Below
    the next breakpoint the full chain agrees with the truncated one, so the
    tag carries over.
    """
    kinds = [make_kind(kd) for kd in kinds]
    k = len(kinds) + 1
    if not (len(amplitudes_sq) == len(widths) == len(kinds)):
        raise ValueError("one amplitude and one width per block")
    tuning = ChainTuning(k, base, kinds, alpha_star,
                         tuple(alpha_star_bracket) or (alpha_star, alpha_star),
                         math.nan, max(widths))
    start = alpha_star + widths[0]
    for j, (kind, amp, eps) in enumerate(zip(kinds, amplitudes_sq, widths)):
        i = j + 2
        want = TAG_P if i % 2 == 0 else TAG_N
        specs = tuning.block_specs() + [BlockSpec(kind, amp, start, eps)]
        nl = compile_nonlinearity(base, specs)
        try:
            alpha, c = first_tagged_alpha(nl, start + eps, want, step, search_span, controls)
        except TuningError as exc:
            raise TuningError(str(exc), i) from None
        tuning.blocks.append(BlockRecord(i, alpha, eps, start, amp, c.tag,
                                         {"R": c.R, "reason": c.reason}))
        start = alpha
    return tuning


# -- pure-power singular solution ----------------------------------------------------

def singular_constant(N: int, q: float) -> float:
    """``C(N, q) = (m (N - 2 - m))**(1/(q-1))`` with ``m = 2/(q-1)``."""
    if not q > 1:
        raise ValueError("q must exceed 1")
    m = 2.0 / (q - 1.0)
    inner = m * (N - 2 - m)
    if not inner > 0:
        raise ValueError("no positive singular solution for these (N, q)")
    return inner ** (1.0 / (q - 1.0))


def singular_solution(r, N: int, q: float, A: float = 1.0):
    """``v_A(r) = C(N, q) A**(-m) r**(-m)`` and its derivative, ``m = 2/(q-1)``."""
    m = 2.0 / (q - 1.0)
    r = np.asarray(r, dtype=float)
    c = singular_constant(N, q) * A ** (-m)
    v = c * r ** (-m)
    return v, -m * v / r


def singular_residual(r, N: int, q: float, A: float = 1.0):
    """Residual of ``v'' + (N-1)/r v' + A**2 v**q`` for the singular solution."""
    m = 2.0 / (q - 1.0)
    r = np.asarray(r, dtype=float)
    v, dv = singular_solution(r, N, q, A)
    d2v = m * (m + 1) * v / (r * r)
    return d2v + (N - 1) / r * dv + A * A * v ** q
