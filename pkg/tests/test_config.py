import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radshoot.config import (BUILTIN, BlockConfig, ConfigError, ExperimentConfig, ScanConfig,
                             SweepConfig, builtin, parse_start)
from radshoot.experiments import run_sweep
from radshoot.nonlinearity import BaseModel
from radshoot.odeint import SolverControls


def strip_name(cfg):
    return dataclasses.replace(cfg, name="")


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtin_round_trip(name):
    cfg = builtin(name)
    again = ExperimentConfig.from_ini(cfg.to_ini())
    assert strip_name(again) == strip_name(cfg)
    assert strip_name(again).to_ini() == strip_name(cfg).to_ini()


@settings(max_examples=40, deadline=None)
@given(p=st.floats(1.1, 2.9), N=st.integers(3, 4), rel=st.floats(1e-12, 1e-4),
       amp=st.floats(1e-3, 1e3), width=st.floats(1e-4, 1.0), k=st.integers(2, 8),
       theta=st.floats(0.05, 0.95), gamma=st.one_of(st.just(math.inf), st.floats(50, 1e4)))
def test_random_round_trip(p, N, rel, amp, width, k, theta, gamma):
    if p >= (N + 2) / (N - 2):
        p = 1.5
    cfg = ExperimentConfig(
        BaseModel(p, N), (BlockConfig({"kind": "power", "q": 2.0}, amp, width,
                                      f"alpha_star + {width!r}"),),
        gamma, SolverControls(rel, rel / 100, 500.0), ScanConfig(20.0, None, 1e-9, 3),
        dataclasses.replace(builtin("base").tuning, k=k, theta=theta))
    assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg


def test_load_from_file(tmp_path):
    path = tmp_path / "ex.ini"
    path.write_text(BUILTIN["example4"])
    cfg = ExperimentConfig.load(path)
    assert len(cfg.blocks) == 4 and cfg.name == str(path)
    assert [b.amplitude_sq for b in cfg.blocks] == [10.0, 0.1, 10.0, 0.1]
    assert cfg.blocks[1].start == "auto"


@pytest.mark.parametrize("text,expected", [
    ("auto", ("auto", None)), ("alpha_star + 0.1", ("offset", 0.1)),
    ("alpha_star+1e-3", ("offset", 1e-3)), ("9.5", ("value", 9.5))])
def test_parse_start(text, expected):
    assert parse_start(text) == expected


def test_parse_start_rejects():
    with pytest.raises(ConfigError):
        parse_start("alpha * 2")


def test_resolve_start():
    blk = BlockConfig({"kind": "power", "q": 2.0}, 1.0, 0.1, "alpha_star + 0.25")
    assert blk.resolve_start(8.0) == 8.25
    assert dataclasses.replace(blk, start="auto").resolve_start(8.0) is None


@pytest.mark.parametrize("patch", [
    ("[nonlinearity]", "[nonlinearity]\ncolour = red"),
    ("[scan]", "[scans]"),
    ("[block.3]", "[block.7]"),
    ("rel_tol = 1e-10", "rel_tol = 0"),
    ("rel_tol = 1e-10", "rel_tol = nan"),
    ("formats = csv, json, svg", "formats = csv, png"),
    ("kind = power\nq = 2.0\namplitude_sq = 10.0", "kind = cubic\nq = 2.0\namplitude_sq = 10.0"),
    ("amplitude_sq = 0.1", "amplitude_sq = -0.1"),
    ("alpha_max = 12.0", "alpha_max = 12.0\n\n[tuning]\ntheta = 1.5"),
])
def test_rejections(patch):
    old, new = patch
    text = BUILTIN["example4"]
    assert old in text
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini(text.replace(old, new, 1))


def test_alpha_max_below_gamma():
    text = BUILTIN["example2"].replace("gamma = inf", "gamma = 20.0")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini(text)


def test_malformed_ini():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini("no section header")


def test_builtin_names():
    assert builtin("2") == builtin("example2")
    with pytest.raises(ConfigError):
        builtin("example9")


def test_sweep_width_guard(alpha_star):
    cfg = dataclasses.replace(builtin("example2"), gamma=alpha_star + 1.0,
                              scan=ScanConfig(None), sweep=SweepConfig((1.0,), (0.3,)))
    with pytest.raises(ConfigError):
        run_sweep(cfg, alpha_star)
    ok = dataclasses.replace(cfg, sweep=SweepConfig((1.0,), (0.2,)))
    assert len(run_sweep(ok, alpha_star)) == 1


def test_sweep_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig((), (0.1,))
    with pytest.raises(ValueError):
        SweepConfig((1.0,), (-0.1,))
