"""Experiment orchestration shared by the command line and the tests.

``resolve`` turns an ``ExperimentConfig`` into a compiled nonlinearity with
its base ground state, block starts and scan settings.  The remaining
functions run one experiment each and return plain data; writing files is
left to the caller.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import ConfigError, ExperimentConfig, builtin
from .functionals import pohozaev_E
from .hypotheses import FAIL, PASS, verify
from .nonlinearity import BlockSpec, DomainError, compile_nonlinearity, make_kind
from .odeint import SolverControls
from .shooting import (TAG_N, TAG_P, ClassificationError, GroundStateBracket, classify,
                       find_alpha_star, scan_ground_states)
from .svg import line_plot, tag_map
from .tuning import TuningError, first_tagged_alpha, singular_constant, singular_residual


@dataclass
class Resolved:
    """A configuration with every ``auto`` value filled in."""

    config: ExperimentConfig
    nonlinearity: object
    alpha_star_bracket: GroundStateBracket
    alphas: dict  # i -> alternating initial value on the chain truncated at block i
    alpha_max: float
    step: Optional[float]
    seeds: tuple

    @property
    def alpha_star(self) -> float:
        return self.alpha_star_bracket.midpoint

    @property
    def controls(self) -> SolverControls:
        return self.config.solver


def _want(i):
    return TAG_P if i % 2 == 0 else TAG_N


def resolve(cfg: ExperimentConfig, search_step: float = 0.01) -> Resolved:
    """Fill in block starts, the scan range and the scan seeds.

    The alternating value ``alpha_i`` of each block is the first point of
    the ``search_step`` grid above its bridge whose shot on the chain
    truncated at block ``i`` is ``P`` (even ``i``) or ``N`` (odd ``i``).
    It is ``None`` when no such point exists within the search span.
    """
    ctl = cfg.solver
    base = cfg.base
    br = find_alpha_star(compile_nonlinearity(base), tol=cfg.scan.tol, controls=ctl)
    a_star = br.midpoint
    specs, alphas = [], {}
    prev = None
    for j, blk in enumerate(cfg.blocks):
        i = j + 2
        start = blk.resolve_start(a_star)
        if start is None:
            if j == 0:
                start = a_star + blk.bridge_width
            elif prev is None:
                raise ConfigError(f"block {i}: 'auto' start needs an alternating value "
                                  f"for block {i - 1}, and none was found")
            else:
                start = prev
        spec = BlockSpec(make_kind(blk.kind), blk.amplitude_sq, start, blk.bridge_width)
        specs.append(spec)
        nl_i = compile_nonlinearity(base, specs, cfg.gamma)
        try:
            prev, _ = first_tagged_alpha(nl_i, spec.top, _want(i), search_step,
                                         controls=ctl)
        except (TuningError, ClassificationError, DomainError):
            prev = None
        alphas[i] = prev
    nl = compile_nonlinearity(base, specs, cfg.gamma)

    if cfg.scan.alpha_max is not None:
        alpha_max = cfg.scan.alpha_max
    else:
        tops = [a for a in alphas.values() if a is not None] + [s.top for s in specs]
        alpha_max = 2.0 * max([a_star] + tops)
        if math.isfinite(cfg.gamma):
            alpha_max = min(alpha_max, 0.5 * (cfg.gamma + max([a_star] + tops)))
    seeds = {br.alpha_lo, br.alpha_hi}
    seeds.update(a for a in alphas.values() if a is not None)
    seeds.update(s.start for s in specs)
    seeds = tuple(sorted(s for s in seeds if s <= alpha_max))
    return Resolved(cfg, nl, br, alphas, float(alpha_max), cfg.scan.step, seeds)


@dataclass
class GroundStates:
    resolved: Resolved
    scan: object  # ScanResult

    @property
    def brackets(self) -> list:
        return self.scan.brackets

    def summary(self) -> dict:
        rs = self.resolved
        return {
            "config": rs.config.name,
            "alpha_star": rs.alpha_star,
            "alpha_max": rs.alpha_max,
            "n_samples": len(self.scan.samples),
            "n_brackets": len(self.brackets),
            "brackets": [b.to_dict() for b in self.brackets],
            "alphas": {str(i): a for i, a in rs.alphas.items()},
        }

    def undetermined(self) -> list:
        return [{"alpha": c.alpha, "reason": c.reason} for c in self.scan.undetermined]


def ground_states(cfg: ExperimentConfig, resolved: Optional[Resolved] = None,
                  n_jobs: Optional[int] = None) -> GroundStates:
    rs = resolved or resolve(cfg)
    sc = scan_ground_states(rs.nonlinearity, rs.alpha_max, rs.step, cfg.scan.tol, rs.controls,
                            expected=cfg.scan.expected, seeds=rs.seeds, n_jobs=n_jobs)
    return GroundStates(rs, sc)


def midpoint_svg(nl, brackets, controls: Optional[SolverControls] = None,
                 title: str = "ground-state candidates", n_points: int = 400) -> str:
    """``u(r)`` of the shot from every bracket midpoint, on a common frame."""
    series = []
    r_end = 0.0
    for br in brackets:
        c = classify(nl, br.midpoint, controls, early_exit=False, keep_trajectory=True)
        tr = c.trajectory
        r_end = max(r_end, float(tr.r[-1]))
        series.append((f"alpha={br.midpoint:.6g}", tr))
    out = []
    for label, tr in series:
        rr = np.linspace(0.0, float(tr.r[-1]), n_points)
        out.append((label, rr, tr.u_at(rr)))
    top = max([float(np.max(s[2])) for s in out], default=1.0)
    return line_plot(out, title=title, xlabel="r", ylabel="u(r)",
                     xlim=(0.0, r_end or 1.0), ylim=(-0.1 * top, 1.05 * top))


# -- reproduction ---------------------------------------------------------------------

@dataclass
class Check:
    name: str
    expected: object
    observed: object
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "expected": _plain(self.expected),
                "observed": _plain(self.observed), "passed": bool(self.passed)}


def _plain(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


@dataclass
class ReproduceReport:
    example: int
    checks: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)  # file name -> text
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def add(self, name, expected, observed, passed):
        self.checks.append(Check(name, expected, observed, bool(passed)))

    def diff(self) -> str:
        """One ``-``/``+`` pair per failed check, in unified-diff style."""
        lines = [f"--- expected (example {self.example})",
                 f"+++ observed (example {self.example})"]
        for c in self.checks:
            if not c.passed:
                lines.append(f"@@ {c.name} @@")
                lines.append(f"-{c.expected}")
                lines.append(f"+{c.observed}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"example": self.example, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks],
                "summary": _plain(self.summary)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def reproduce(example: int, controls: Optional[SolverControls] = None,
              n_jobs: Optional[int] = None) -> ReproduceReport:
    """Run the built-in example and compare against its known outcome."""
    runners = {2: _reproduce_2, 3: _reproduce_3, 4: _reproduce_4}
    if example not in runners:
        raise ValueError(f"example must be one of {sorted(runners)}, got {example!r}")
    cfg = builtin(str(example))
    if controls is not None:
        cfg = cfg.with_solver(rel_tol=controls.rel_tol, abs_tol=controls.abs_tol,
                              r_max=controls.r_max)
    rep = ReproduceReport(example)
    runners[example](cfg, rep, n_jobs)
    return rep


def _bracket_artifacts(rep, gs):
    buf = io.StringIO()
    write_brackets_csv(gs.brackets, buf)
    rep.artifacts["brackets.csv"] = buf.getvalue()
    rep.artifacts["ground_states.svg"] = midpoint_svg(
        gs.resolved.nonlinearity, gs.brackets, gs.resolved.controls,
        title=f"example {rep.example}: shots from bracket midpoints")
    rep.summary.update(gs.summary())


def _reproduce_2(cfg, rep, n_jobs):
    gs = ground_states(cfg, n_jobs=n_jobs)
    brs = gs.brackets
    rep.add("bracket count", ">= 3", len(brs), len(brs) >= 3)
    mids = [b.midpoint for b in brs]
    rep.add("midpoints below 30", "all < 30", mids, bool(mids) and max(mids) < 30)
    widths = [b.width for b in brs]
    rep.add("bracket widths", "all <= 1e-08", max(widths, default=math.nan),
            bool(widths) and max(widths) <= 1e-8)
    hyp = verify(gs.resolved.nonlinearity, controls=cfg.solver,
                 alpha_star=gs.resolved.alpha_star)
    verdicts = {r.name: r.verdict for r in hyp.results.values()}
    rep.add("hypotheses H1-H6", "all pass", verdicts,
            all(v == PASS for v in verdicts.values()))
    _bracket_artifacts(rep, gs)


def _reproduce_3(cfg, rep, n_jobs):
    ctl = cfg.solver
    rs = resolve(cfg)
    nl = rs.nonlinearity
    c3 = classify(nl, 3.0, ctl, early_exit=False, keep_trajectory=True)
    rep.add("alpha = 3 classification", TAG_P, c3.tag, c3.tag == TAG_P)
    lo = rs.alpha_star_bracket.alpha_lo
    rep.add("alpha_star bracket above 3", "alpha_lo > 3", lo, lo > 3.0)
    tr = c3.trajectory
    rr = tr.r[tr.r > 0.1]
    E = pohozaev_E(nl, tr, rr)
    worst = float(np.max(E + 1e-12 * rr ** 4)) if rr.size else math.nan
    rep.add("Pohozaev energy along alpha = 3", "E < -1e-12 r^4 for r > 0.1",
            worst, rr.size > 0 and worst < 0.0)

    C = singular_constant(4, 5.0)
    rep.add("singular constant C(4,5)", 0.5, C, C == 0.5)
    r = np.linspace(0.1, 10.0, 200)
    res = float(np.max(np.abs(singular_residual(r, 4, 5.0, 1.0))))
    rep.add("singular residual, q=5, A=1", "< 1e-10", res, res < 1e-10)

    hyp = verify(nl, controls=ctl, alpha_star=rs.alpha_star)
    verdicts = {r.name: r.verdict for r in hyp.results.values()}
    want = {f"H{j}": PASS for j in range(1, 6)}
    want["H6"] = FAIL
    rep.add("hypotheses", want, verdicts, verdicts == want)

    ladder = {a: classify(nl, a, ctl).tag for a in (1e2, 1e3, 1e4)}
    rep.add("large-alpha ladder", {a: TAG_P for a in ladder}, ladder,
            all(t == TAG_P for t in ladder.values()))
    rep.summary.update({"alpha_star": rs.alpha_star,
                        "alpha_star_bracket": [rs.alpha_star_bracket.alpha_lo,
                                               rs.alpha_star_bracket.alpha_hi],
                        "bridge_width": cfg.blocks[0].bridge_width,
                        "amplitude_sq": cfg.blocks[0].amplitude_sq})
    rr = np.linspace(0.0, float(tr.r[-1]), 400)
    rep.artifacts["alpha3.svg"] = line_plot([("alpha=3", rr, tr.u_at(rr))],
                                            title="example 3: shot from alpha = 3",
                                            ylabel="u(r)")


def _reproduce_4(cfg, rep, n_jobs):
    gs = ground_states(cfg, n_jobs=n_jobs)
    rs = gs.resolved
    nl = rs.nonlinearity
    chain = {1: nl.blocks[0].start}
    chain.update(rs.alphas)
    tags = {i: (classify(nl, a, cfg.solver).tag if a is not None else None)
            for i, a in chain.items()}
    want = {i: _want(i) for i in chain}
    rep.add("alternating tags", want, tags, tags == want)
    brs = gs.brackets
    rep.add("bracket count", ">= 5", len(brs), len(brs) >= 5)
    between = 0
    keys = sorted(chain)
    for i0, i1 in zip(keys, keys[1:]):
        a0, a1 = chain[i0], chain[i1]
        if a0 is not None and a1 is not None and any(a0 < b.midpoint < a1 for b in brs):
            between += 1
    rep.add("brackets between alternations", ">= 4", between, between >= 4)
    rep.summary["chain"] = {str(i): a for i, a in chain.items()}
    _bracket_artifacts(rep, gs)


# -- sweep ----------------------------------------------------------------------------

SWEEP_COLUMNS = ("A", "A_sq", "eps", "alpha", "tag", "R", "reason")


def run_sweep(cfg: ExperimentConfig, alpha_star: Optional[float] = None) -> list:
    """Tag of a fixed probe over the ``(A, eps)`` grid of the sweep section.

    The block above the base model takes the kind of the first configured
    block (or the tuning kind when there is none) with ``A**2``, bridge
    ``[alpha_* + eps, alpha_* + 2 eps]`` and probe
    ``alpha_* + eps + probe_factor * eps``.  Failures are recorded in the
    ``reason`` column with tag ``error``.
    """
    ctl = cfg.solver
    if alpha_star is None:
        alpha_star = find_alpha_star(compile_nonlinearity(cfg.base), tol=cfg.scan.tol,
                                     controls=ctl).midpoint
    cfg.check_sweep_widths(alpha_star)
    kind = make_kind(cfg.blocks[0].kind if cfg.blocks else cfg.tuning.kind)
    rows = []
    for A in cfg.sweep.amplitudes:
        for eps in cfg.sweep.widths:
            a1 = alpha_star + eps
            probe = a1 + cfg.sweep.probe_factor * eps
            row = {"A": A, "A_sq": A * A, "eps": eps, "alpha": probe}
            try:
                nl = compile_nonlinearity(cfg.base, [BlockSpec(kind, A * A, a1, eps)],
                                          cfg.gamma)
                c = classify(nl, probe, ctl)
                row.update(tag=c.tag, R=c.R, reason=c.reason)
            except (ValueError, ClassificationError, ArithmeticError) as exc:
                row.update(tag="error", R=None, reason=f"{type(exc).__name__}: {exc}")
            rows.append(row)
    return rows


def sweep_svg(rows) -> str:
    return tag_map([r["A"] for r in rows], [r["eps"] for r in rows], [r["tag"] for r in rows],
                   title="probe tag over (A, eps)")


# -- CSV writers ----------------------------------------------------------------------

def _cell(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_rows_csv(rows, columns, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])


BRACKET_COLUMNS = ("alpha_lo", "alpha_hi", "alpha", "width", "tag_lo", "tag_hi", "R_lo", "R_hi")


def write_brackets_csv(brackets, fh):
    write_rows_csv([b.to_dict() for b in brackets], BRACKET_COLUMNS, fh)
