"""Command-line front end: ``radshoot <command> [options]``.

Exit codes
----------
0  success (``verify``: every hypothesis passes)
1  a run finished but a check failed (``reproduce``, ``tune``)
2  ``verify``: some hypothesis fails
3  ``verify``: no failure, but some verdict is inconclusive
4  bad configuration or arguments
5  numerical failure (tuning or classification gave up)
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import BUILTIN, ConfigError, ExperimentConfig, builtin
from .experiments import (SWEEP_COLUMNS, ground_states, midpoint_svg, reproduce, resolve,
                          run_sweep, sweep_svg, write_brackets_csv, write_rows_csv)
from .hypotheses import verify
from .nonlinearity import ConstructionError, DomainError, make_kind
from .shooting import ClassificationError, classify
from .svg import line_plot
from .tuning import ChainTuning, TuningError, tune_chain, verify_chain

log = logging.getLogger("radshoot")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 4, 5


def load_config(spec: str) -> ExperimentConfig:
    """A path to an INI file, or the name of a built-in configuration."""
    if os.path.exists(spec):
        return ExperimentConfig.load(spec)
    return builtin(spec)


class _Out:
    """Output directory restricted to the configured formats."""

    def __init__(self, directory, formats):
        self.dir = Path(directory)
        self.formats = set(formats)
        self.written = []

    def wants(self, name) -> bool:
        return Path(name).suffix.lstrip(".") in self.formats

    def write(self, name, text):
        if not self.wants(name):
            return None
        path = self.dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.written.append(str(path))
        log.info("wrote %s", path)
        return path

    def json(self, name, obj):
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def csv(self, name, writer, *args):
        buf = io.StringIO()
        writer(*args, buf)
        return self.write(name, buf.getvalue())


def _setup(args):
    cfg = load_config(args.config)
    cfg = cfg.with_solver(rel_tol=args.rel_tol, abs_tol=args.abs_tol, r_max=args.r_max)
    out = _Out(args.out or cfg.output.directory, cfg.output.formats)
    return cfg, out


# -- commands ----------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg, out = _setup(args)
    rs = resolve(cfg)
    theta = cfg.tuning.theta if args.theta is None else args.theta
    rep = verify(rs.nonlinearity, theta=theta, controls=cfg.solver)
    for name, res in rep.results.items():
        print(f"{name:3s} {res.verdict:13s} {res.detail}")
    print(f"verdict: {rep.verdict}")
    out.json("verify.json", rep.to_dict())
    return rep.exit_code


def cmd_classify(args) -> int:
    cfg, out = _setup(args)
    rs = resolve(cfg)
    rows, series = [], []
    for alpha in args.alpha:
        c = classify(rs.nonlinearity, alpha, cfg.solver, early_exit=not args.full,
                     keep_trajectory=args.trajectory)
        row = {"alpha": c.alpha, "tag": c.tag, "R": c.R, "reason": c.reason,
               "r_final": c.state.r, "u_final": c.state.u, "v_final": c.state.v}
        rows.append(row)
        print(f"alpha={c.alpha!r} tag={c.tag} R={c.R!r} reason={c.reason}")
        if args.trajectory:
            tr = c.trajectory
            out.csv(f"trajectory_{len(rows)}.csv", tr.to_csv)
            rr = np.linspace(0.0, float(tr.r[-1]), 400)
            series.append((f"alpha={alpha:.6g} ({c.tag})", rr, tr.u_at(rr)))
    out.json("classify.json", rows[0] if len(rows) == 1 else rows)
    if series:
        out.write("classify.svg", line_plot(series, title="shots", ylabel="u(r)"))
    return EXIT_OK


def cmd_ground_states(args) -> int:
    cfg, out = _setup(args)
    t0 = time.perf_counter()
    gs = ground_states(cfg, n_jobs=args.n_jobs)
    log.info("scan finished in %.2f s", time.perf_counter() - t0)
    for br in gs.brackets:
        print(f"[{br.alpha_lo!r}, {br.alpha_hi!r}]  {br.tag_lo}->{br.tag_hi}")
    print(f"{len(gs.brackets)} ground-state bracket(s)")
    out.csv("brackets.csv", write_brackets_csv, gs.brackets)
    out.csv("scan.csv", gs.scan.to_csv)
    out.json("ground_states.json", gs.summary())
    out.json("undetermined.json", gs.undetermined())
    if gs.scan.undetermined:
        print(f"{len(gs.scan.undetermined)} undetermined shot(s), see undetermined.json",
              file=sys.stderr)
    if out.wants("x.svg") and gs.brackets:
        out.write("ground_states.svg", midpoint_svg(gs.resolved.nonlinearity, gs.brackets,
                                                    cfg.solver))
    return EXIT_OK


def _tuning_report(tu: ChainTuning) -> dict:
    d = tu.to_dict()
    d["claim_violations"] = tu.claim_violations()
    return d


def cmd_tune(args) -> int:
    cfg, out = _setup(args)
    if args.from_file:
        with open(args.from_file) as fh:
            tu = ChainTuning.from_json(fh.read())
        if args.rescan or not tu.brackets:
            verify_chain(tu, cfg.solver, cfg.scan.tol)
    else:
        k = cfg.tuning.k if args.k is None else args.k
        if k < 2:
            raise ConfigError("k must be at least 2")
        tu = tune_chain(cfg.base, [make_kind(cfg.tuning.kind)], k, cfg.solver,
                        tol=cfg.scan.tol, doubling_cap=cfg.tuning.doubling_cap,
                        halving_cap=cfg.tuning.halving_cap)
    for i, a in tu.alphas().items():
        blk = next((b for b in tu.blocks if b.i == i), None)
        extra = "" if blk is None else f" A^2={blk.amplitude_sq!r} eps={blk.eps!r} tag={blk.tag}"
        print(f"alpha_{i} = {a!r}{extra}")
    bad = tu.claim_violations()
    for line in bad:
        print(f"violation: {line}")
    print(f"{len(tu.brackets)} ground-state bracket(s) for k={tu.k}")
    out.json("tuning.json", _tuning_report(tu))
    out.csv("tuning_brackets.csv", write_brackets_csv, tu.brackets)
    return EXIT_OK if not bad and len(tu.brackets) >= tu.k else EXIT_CHECK


def cmd_reproduce(args) -> int:
    cfg, out = _setup(args)
    rep = reproduce(args.example, cfg.solver, n_jobs=args.n_jobs)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: observed {c.observed}")
    sub = f"example{args.example}"
    out.json(f"{sub}/reproduce.json", rep.to_dict())
    for name, text in rep.artifacts.items():
        out.write(f"{sub}/{name}", text)
    if not rep.passed:
        sys.stdout.write(rep.diff())
    return rep.exit_code


def cmd_sweep(args) -> int:
    cfg, out = _setup(args)
    rows = run_sweep(cfg)
    for r in rows:
        print(f"A={r['A']:<8g} eps={r['eps']:<8g} alpha={r['alpha']:.10g} {r['tag']}")
    out.csv("sweep.csv", write_rows_csv, rows, SWEEP_COLUMNS)
    out.write("sweep.svg", sweep_svg(rows))
    return EXIT_OK


def cmd_init_examples(args) -> int:
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    for name, text in BUILTIN.items():
        path = target / f"{name}.ini"
        if path.exists() and not args.force:
            print(f"skip {path} (exists)")
            continue
        path.write_text(text.lstrip("\n"))
        print(f"wrote {path}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------------

def _positive_float(text):
    x = float(text)
    if not x > 0 or x != x or x == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text!r}")
    return x


def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; SUPPRESS keeps a value given before the command
    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=d("base"),
                        help="INI file or built-in name (base, example1 .. example4)")
    common.add_argument("--out", default=d(None), help="output directory (overrides the config)")
    common.add_argument("--rel-tol", type=_positive_float, default=d(None))
    common.add_argument("--abs-tol", type=_positive_float, default=d(None))
    common.add_argument("--r-max", type=_positive_float, default=d(None))
    common.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    ap = argparse.ArgumentParser(prog="radshoot", parents=[_common(suppress=False)],
                                 description="Shooting experiments for radial ground states.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check the structural hypotheses")
    p.add_argument("--theta", type=float, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", parents=[common], help="tag single shots")
    p.add_argument("--alpha", type=float, nargs="+", required=True)
    p.add_argument("--trajectory", action="store_true", help="also write the sampled shot")
    p.add_argument("--full", action="store_true",
                   help="integrate to the first zero or turn, no early exit")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("ground-states", parents=[common], help="scan and bracket ground states")
    p.add_argument("--n-jobs", type=int, default=None)
    p.set_defaults(func=cmd_ground_states)

    p = sub.add_parser("tune", parents=[common], help="tune an alternating block chain")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--from", dest="from_file", default=None,
                   help="reload a tuning.json instead of tuning")
    p.add_argument("--rescan", action="store_true", help="rescan a reloaded tuning")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("reproduce", parents=[common], help="run a built-in example")
    p.add_argument("--example", type=int, choices=(2, 3, 4), required=True)
    p.add_argument("--n-jobs", type=int, default=None)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("sweep", parents=[common], help="probe tags over an (A, eps) grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("init-examples", parents=[common], help="write the built-in configs")
    p.add_argument("--dir", default="examples-config")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init_examples)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ConstructionError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TuningError, ClassificationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
