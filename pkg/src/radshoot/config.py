"""Experiment configuration files.

Configurations are INI files with the sections below.  Unknown sections and
keys are rejected so that typos do not silently fall back to defaults.

``[nonlinearity]``
    ``p``, ``N``, ``gamma`` (``inf`` for an unbounded domain) and
    ``supercritical`` (``yes``/``no``).
``[block.I]``
    One section per upper block, ``I = 2, 3, ...`` in increasing order.
    ``kind`` is ``power`` (key ``q``), ``affine-sine`` (keys ``c0``, ``c1``,
    ``omega``) or ``custom-sampled`` (keys ``xs``, ``ys`` as comma lists).
    ``amplitude_sq`` is the factor ``A**2``, ``bridge_width`` the width of
    the bridge below the block, and ``start`` its lower end: a number,
    ``alpha_star + X``, or ``auto``.  ``auto`` on the first block means
    ``alpha_star + bridge_width``; on later blocks the start is the first
    initial value above the previous bridge whose tag alternates (``P`` for
    even ``I``, ``N`` for odd ``I``).
``[solver]``
    ``rel_tol``, ``abs_tol``, ``r_max``.
``[scan]``
    ``alpha_max`` (number or ``auto``), ``step`` (number or ``auto``),
    ``tol`` (bracket width) and ``expected`` (bracket count hint or empty).
``[tuning]``
    ``k``, ``theta`` (window ratio of the growth check), ``doubling_cap``,
    ``halving_cap`` and the block kind keys used for every tuned block.
``[sweep]``
    ``amplitudes`` (values of ``A``, squared when used), ``widths``
    (bridge widths) and ``probe_factor``: the probe is
    ``alpha_star + eps + probe_factor * eps``.
``[output]``
    ``directory`` and ``formats`` (subset of ``csv, json, svg``).
"""

from __future__ import annotations

import configparser
import io
import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from ._validation import check_positive, check_tolerances, check_unit_interval
from .nonlinearity import BaseModel, make_kind
from .odeint import SolverControls


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


_START_RE = re.compile(r"^\s*alpha_star\s*\+\s*(?P<x>[-+0-9.eE]+)\s*$")
FORMATS = ("csv", "json", "svg")


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _floats(text) -> tuple:
    return tuple(float(t) for t in str(text).replace("\n", ",").split(",") if t.strip())


@dataclass(frozen=True)
class BlockConfig:
    kind: dict
    amplitude_sq: float
    bridge_width: float
    start: str = "auto"

    def __post_init__(self):
        make_kind(self.kind)
        check_positive(self.amplitude_sq, "amplitude_sq")
        check_positive(self.bridge_width, "bridge_width")
        parse_start(self.start)

    def resolve_start(self, alpha_star: float) -> Optional[float]:
        """Numeric start, or ``None`` for ``auto``."""
        kind, value = parse_start(self.start)
        if kind == "auto":
            return None
        if kind == "offset":
            return alpha_star + value
        return value


def parse_start(text: str) -> tuple:
    text = str(text).strip()
    if text == "auto":
        return "auto", None
    m = _START_RE.match(text)
    if m:
        return "offset", float(m.group("x"))
    try:
        return "value", float(text)
    except ValueError:
        raise ConfigError(f"block start must be a number, 'alpha_star + X' or 'auto', "
                          f"got {text!r}") from None


@dataclass(frozen=True)
class ScanConfig:
    alpha_max: Optional[float] = None
    step: Optional[float] = None
    tol: float = 1e-10
    expected: Optional[int] = None

    def __post_init__(self):
        if self.alpha_max is not None:
            check_positive(self.alpha_max, "alpha_max")
        if self.step is not None:
            check_positive(self.step, "step")
        check_positive(self.tol, "tol", max_val=1.0)
        if self.expected is not None:
            check_positive(self.expected, "expected", integer=True)


@dataclass(frozen=True)
class TuningConfig:
    k: int = 4
    theta: float = 0.5
    doubling_cap: int = 60
    halving_cap: int = 60
    kind: dict = field(default_factory=lambda: {"kind": "power", "q": 2.0})

    def __post_init__(self):
        check_positive(self.k, "k", integer=True, min_val=2, include_boundaries="left")
        check_unit_interval(self.theta, "theta")
        check_positive(self.doubling_cap, "doubling_cap", integer=True)
        check_positive(self.halving_cap, "halving_cap", integer=True)
        make_kind(self.kind)


@dataclass(frozen=True)
class SweepConfig:
    amplitudes: tuple = tuple(float(a) for a in range(1, 21))
    widths: tuple = (0.1,)
    probe_factor: float = 2.0

    def __post_init__(self):
        if not self.amplitudes or not self.widths:
            raise ConfigError("sweep needs at least one amplitude and one width")
        for a in self.amplitudes:
            check_positive(a, "amplitude")
        for w in self.widths:
            check_positive(w, "width")
        check_positive(self.probe_factor, "probe_factor")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = FORMATS

    def __post_init__(self):
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")


@dataclass(frozen=True)
class ExperimentConfig:
    base: BaseModel
    blocks: tuple = ()
    gamma: float = math.inf
    solver: SolverControls = SolverControls()
    scan: ScanConfig = ScanConfig()
    tuning: TuningConfig = TuningConfig()
    sweep: SweepConfig = SweepConfig()
    output: OutputConfig = OutputConfig()
    name: str = ""

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        check_tolerances(self.solver.rel_tol, self.solver.abs_tol)
        if self.scan.alpha_max is not None and not self.scan.alpha_max < self.gamma:
            raise ConfigError("scan alpha_max must lie below gamma")

    def with_solver(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, solver=self.solver.replace(**changes)) if changes else self

    def check_sweep_widths(self, alpha_star: float):
        """Reject bridge widths above a quarter of the room left below ``gamma``."""
        if math.isfinite(self.gamma):
            limit = (self.gamma - alpha_star) / 4.0
            for w in self.sweep.widths:
                if w > limit:
                    raise ConfigError(
                        f"sweep width {w} exceeds (gamma - alpha_star)/4 = {limit}")

    # -- serialization ---------------------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["nonlinearity"] = {"p": _fmt(float(self.base.p)), "N": str(self.base.N),
                              "gamma": _fmt(float(self.gamma)),
                              "supercritical": "yes" if self.base.supercritical else "no"}
        for j, blk in enumerate(self.blocks):
            sec = {k: (", ".join(_fmt(float(x)) for x in v) if isinstance(v, (list, tuple))
                       else _fmt(float(v)) if isinstance(v, (int, float)) else str(v))
                   for k, v in blk.kind.items()}
            sec.update({"amplitude_sq": _fmt(float(blk.amplitude_sq)),
                        "bridge_width": _fmt(float(blk.bridge_width)),
                        "start": blk.start})
            cp[f"block.{j + 2}"] = sec
        cp["solver"] = {"rel_tol": _fmt(self.solver.rel_tol),
                        "abs_tol": _fmt(self.solver.abs_tol),
                        "r_max": _fmt(self.solver.r_max)}
        sc = self.scan
        cp["scan"] = {"alpha_max": "auto" if sc.alpha_max is None else _fmt(sc.alpha_max),
                      "step": "auto" if sc.step is None else _fmt(sc.step),
                      "tol": _fmt(sc.tol),
                      "expected": "" if sc.expected is None else str(sc.expected)}
        tu = self.tuning
        sec = {"k": str(tu.k), "theta": _fmt(tu.theta), "doubling_cap": str(tu.doubling_cap),
               "halving_cap": str(tu.halving_cap)}
        sec.update({k: _fmt(float(v)) if isinstance(v, (int, float)) else str(v)
                    for k, v in tu.kind.items()})
        cp["tuning"] = sec
        cp["sweep"] = {"amplitudes": ", ".join(_fmt(a) for a in self.sweep.amplitudes),
                       "widths": ", ".join(_fmt(w) for w in self.sweep.widths),
                       "probe_factor": _fmt(self.sweep.probe_factor)}
        cp["output"] = {"directory": self.output.directory,
                        "formats": ", ".join(self.output.formats)}
        buf = io.StringIO()
        if self.name:
            buf.write(f"# {self.name}\n")
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, name: str = "") -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        try:
            return _from_parser(cp, name)
        except (KeyError, ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_ini(fh.read(), name=str(path))


_KIND_KEYS = {"kind", "q", "c0", "c1", "omega", "xs", "ys"}


def _kind_from(sec) -> dict:
    kind = sec.get("kind", "power")
    out = {"kind": kind}
    for key in ("q", "c0", "c1", "omega"):
        if key in sec:
            out[key] = float(sec[key])
    for key in ("xs", "ys"):
        if key in sec:
            out[key] = list(_floats(sec[key]))
    make_kind(out)
    return out


def _check_keys(sec, name, allowed):
    extra = set(sec.keys()) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")


def _opt_float(text):
    text = str(text).strip()
    return None if text in ("", "auto") else float(text)


def _from_parser(cp, name) -> ExperimentConfig:
    known = {"nonlinearity", "solver", "scan", "tuning", "sweep", "output"}
    block_secs = []
    for sec in cp.sections():
        m = re.fullmatch(r"block\.(\d+)", sec)
        if m:
            block_secs.append((int(m.group(1)), sec))
        elif sec not in known:
            raise ConfigError(f"unknown section [{sec}]")
    block_secs.sort()
    idx = [i for i, _ in block_secs]
    if idx and idx != list(range(2, 2 + len(idx))):
        raise ConfigError(f"block sections must be numbered 2, 3, ... without gaps, got {idx}")

    nlsec = cp["nonlinearity"] if cp.has_section("nonlinearity") else {}
    _check_keys(nlsec, "nonlinearity", {"p", "N", "gamma", "supercritical"})
    sup = str(nlsec.get("supercritical", "no")).strip().lower() in ("yes", "true", "1", "on")
    base = BaseModel(float(nlsec.get("p", 2.0)), int(nlsec.get("N", 4)), sup)
    gamma = float(nlsec.get("gamma", "inf"))

    blocks = []
    for _, sname in block_secs:
        sec = cp[sname]
        _check_keys(sec, sname, _KIND_KEYS | {"amplitude_sq", "bridge_width", "start"})
        blocks.append(BlockConfig(_kind_from(sec), float(sec["amplitude_sq"]),
                                  float(sec["bridge_width"]), sec.get("start", "auto").strip()))

    kw = {}
    if cp.has_section("solver"):
        sec = cp["solver"]
        _check_keys(sec, "solver", {"rel_tol", "abs_tol", "r_max"})
        d = SolverControls()
        kw["solver"] = SolverControls(float(sec.get("rel_tol", d.rel_tol)),
                                      float(sec.get("abs_tol", d.abs_tol)),
                                      float(sec.get("r_max", d.r_max)))
    if cp.has_section("scan"):
        sec = cp["scan"]
        _check_keys(sec, "scan", {"alpha_max", "step", "tol", "expected"})
        exp = str(sec.get("expected", "")).strip()
        kw["scan"] = ScanConfig(_opt_float(sec.get("alpha_max", "auto")),
                                _opt_float(sec.get("step", "auto")),
                                float(sec.get("tol", 1e-10)),
                                int(exp) if exp else None)
    if cp.has_section("tuning"):
        sec = cp["tuning"]
        _check_keys(sec, "tuning", _KIND_KEYS | {"k", "theta", "doubling_cap", "halving_cap"})
        d = TuningConfig()
        kind = _kind_from(sec) if any(k in sec for k in _KIND_KEYS) else d.kind
        kw["tuning"] = TuningConfig(int(sec.get("k", d.k)), float(sec.get("theta", d.theta)),
                                    int(sec.get("doubling_cap", d.doubling_cap)),
                                    int(sec.get("halving_cap", d.halving_cap)), kind)
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        _check_keys(sec, "sweep", {"amplitudes", "widths", "probe_factor"})
        d = SweepConfig()
        kw["sweep"] = SweepConfig(_floats(sec["amplitudes"]) if "amplitudes" in sec
                                  else d.amplitudes,
                                  _floats(sec["widths"]) if "widths" in sec else d.widths,
                                  float(sec.get("probe_factor", d.probe_factor)))
    if cp.has_section("output"):
        sec = cp["output"]
        _check_keys(sec, "output", {"directory", "formats"})
        fm = tuple(t.strip() for t in sec.get("formats", ", ".join(FORMATS)).split(",")
                   if t.strip())
        kw["output"] = OutputConfig(sec.get("directory", "out"), fm)
    return ExperimentConfig(base, tuple(blocks), gamma, name=name, **kw)


# -- built-in examples -----------------------------------------------------------------

_COMMON = """
[solver]
rel_tol = 1e-10
abs_tol = 1e-12
r_max = 1000.0

[output]
directory = out
formats = csv, json, svg
"""

BUILTIN = {
    "base": """# base model only: a single ground state
[nonlinearity]
p = 2.0
N = 4
gamma = inf

[scan]
alpha_max = auto
step = auto
tol = 1e-10
expected = 1

[tuning]
k = 4
theta = 0.5
kind = power
q = 2.0
""" + _COMMON,
    "example1": """# bounded oscillating upper block 2 + sin(s)
[nonlinearity]
p = 2.0
N = 4
gamma = inf

[block.2]
kind = affine-sine
c0 = 2.0
c1 = 1.0
omega = 1.0
amplitude_sq = 100.0
bridge_width = 0.1
start = alpha_star + 0.1

[scan]
alpha_max = 30.0
step = auto
tol = 1e-10
expected = 2
""" + _COMMON,
    "example2": """# s^2 - s below, 100 s^2 above: three ground states below 30
[nonlinearity]
p = 2.0
N = 4
gamma = inf

[block.2]
kind = power
q = 2.0
amplitude_sq = 100.0
bridge_width = 0.1
start = alpha_star + 0.1

[scan]
alpha_max = 30.0
step = auto
tol = 1e-10
expected = 3

[sweep]
amplitudes = 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20
widths = 0.1
probe_factor = 2.0
""" + _COMMON,
    "example3": """# supercritical tail 100 s^5: large initial values stay positive
[nonlinearity]
p = 2.0
N = 4
gamma = inf

[block.2]
kind = power
q = 5.0
amplitude_sq = 100.0
bridge_width = 9e-05
start = alpha_star + 9e-05

[scan]
alpha_max = 30.0
step = auto
tol = 1e-10
""" + _COMMON,
    "example4": """# five alternating blocks s^2 with amplitudes 10 and 1/10
[nonlinearity]
p = 2.0
N = 4
gamma = inf

[block.2]
kind = power
q = 2.0
amplitude_sq = 10.0
bridge_width = 0.1
start = alpha_star + 0.1

[block.3]
kind = power
q = 2.0
amplitude_sq = 0.1
bridge_width = 0.1
start = auto

[block.4]
kind = power
q = 2.0
amplitude_sq = 10.0
bridge_width = 0.1
start = auto

[block.5]
kind = power
q = 2.0
amplitude_sq = 0.1
bridge_width = 0.1
start = auto

[scan]
alpha_max = 12.0
step = auto
tol = 1e-10
expected = 5
""" + _COMMON,
}


def builtin(name: str) -> ExperimentConfig:
    """One of the embedded configurations: ``base``, ``example1`` .. ``example4``."""
    key = name if name in BUILTIN else f"example{name}"
    if key not in BUILTIN:
        raise ConfigError(f"unknown built-in configuration {name!r}; "
                          f"choose from {sorted(BUILTIN)}")
    return ExperimentConfig.from_ini(BUILTIN[key], name=key)
