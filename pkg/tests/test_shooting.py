import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radshoot.config import builtin
from radshoot.experiments import resolve
from radshoot.nonlinearity import (AffineSine, BaseModel, BlockSpec, Power,
                                   compile_nonlinearity)
from radshoot.odeint import SolverControls
from radshoot.shooting import (ClassificationError, GroundStateBracket, bisect_boundary,
                               classify, crossing_moment, find_alpha_star,
                               find_ground_states, intersections, scan_ground_states)


# -- classify ----------------------------------------------------------------------------

def test_alpha_three_is_P(nl22):
    c = classify(nl22, 3.0)
    assert c.tag == "P"
    full = classify(nl22, 3.0, early_exit=False)
    assert full.tag == "P" and full.reason == "turn"
    assert full.state.u > 0 and abs(full.state.v) < 1e-9


def test_alpha_twenty_is_N(nl22):
    c = classify(nl22, 20.0)
    assert c.tag == "N" and c.reason == "zero"
    assert c.state.u == pytest.approx(0.0, abs=1e-10) and c.state.v < 0
    assert c.R == c.state.r


@pytest.mark.parametrize("alpha", [1.0, 0.5, -2.0])
def test_alpha_at_or_below_b_rejected(nl22, alpha):
    with pytest.raises(ValueError):
        classify(nl22, alpha)


def test_undetermined_when_r_max_too_small(nl22):
    c = classify(nl22, 20.0, SolverControls(r_max=1e-3))
    assert c.tag == "Undetermined" and not c.definite
    assert c.R is None


def test_levels_recorded(nl22, alpha_star):
    c = classify(nl22, 20.0, levels=[alpha_star, 2.0])
    cr = c.crossing_at(alpha_star)
    assert cr is not None and cr.r < c.R
    r, m = crossing_moment(nl22, 20.0, alpha_star)
    assert cr.r == pytest.approx(r, rel=1e-12)
    assert cr.momentum == pytest.approx(m, rel=1e-12)
    assert c.crossing_at(123.0) is None


# -- alpha* ------------------------------------------------------------------------------

def test_alpha_star_bracket(star_bracket):
    assert star_bracket.width <= 1e-10
    assert star_bracket.tag_lo == "P" and star_bracket.tag_hi == "N"
    assert star_bracket.alpha_lo > 3.0


def test_alpha_star_seed_independent(nl22):
    b1 = find_alpha_star(nl22, (3.0, 100.0), tol=1e-10)
    b2 = find_alpha_star(nl22, (3.0, 50.0), tol=1e-10)
    assert abs(b1.midpoint - b2.midpoint) <= 1e-10


def test_alpha_star_tolerance_halving(nl22, alpha_star):
    finer = SolverControls(rel_tol=5e-11, abs_tol=5e-13)
    shifted = find_alpha_star(nl22, (3.0, 100.0), tol=1e-10, controls=finer).midpoint
    assert abs(shifted - alpha_star) < 1e-6


def test_alpha_star_bad_seeds(nl22):
    with pytest.raises(ClassificationError):
        find_alpha_star(nl22, (20.0, 30.0))


def test_bracket_validation():
    with pytest.raises(ValueError):
        GroundStateBracket(2.0, 1.0, "P", "N")
    with pytest.raises(ValueError):
        GroundStateBracket(1.0, 2.0, "P", "P")
    with pytest.raises(ValueError):
        GroundStateBracket(1.0, 2.0, "P", "Undetermined")


def test_bisect_equal_tags(nl22):
    a, b = classify(nl22, 2.0), classify(nl22, 3.0)
    with pytest.raises(ClassificationError):
        bisect_boundary(nl22, a, b)


# -- scans -------------------------------------------------------------------------------

def test_base_scan_single_bracket(nl22, alpha_star):
    res = scan_ground_states(nl22, 100.0)
    assert len(res.brackets) == 1
    assert res.transitions() == [("P", "N")]
    assert res.brackets[0].alpha_lo <= alpha_star + 1e-10
    assert res.brackets[0].alpha_hi >= alpha_star - 1e-10
    assert not res.undetermined


def test_scan_parallel_matches_serial(nl22):
    a = find_ground_states(nl22, 20.0, 0.5, 1e-9)
    b = find_ground_states(nl22, 20.0, 0.5, 1e-9, n_jobs=2)
    assert a == b


def test_scan_arguments(nl22):
    with pytest.raises(ValueError):
        scan_ground_states(nl22, 0.5)
    with pytest.raises(ValueError):
        scan_ground_states(nl22, 10.0, scan_step=0.0)
    nl = compile_nonlinearity(BaseModel(2.0, 4), gamma=20.0)
    with pytest.raises(ValueError):
        scan_ground_states(nl, 25.0)


def test_scan_csv(nl22, alpha_star):
    res = scan_ground_states(nl22, 12.0, 1.0, 1e-8, levels=[alpha_star])
    buf = io.StringIO()
    res.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "alpha,tag,R,r_star,momentum"
    assert len(lines) == len(res.samples) + 1
    n_rows = [ln for ln in lines[1:] if ln.split(",")[1] == "N"]
    assert n_rows and all(ln.split(",")[3] != "" for ln in n_rows)


def test_open_sets(nl22, alpha_star):
    grid = [a for a in np.linspace(1.05, 2 * alpha_star, 40) if abs(a - alpha_star) > 1e-3]
    for a in grid:
        tag = classify(nl22, a).tag
        assert tag in ("P", "N")
        assert classify(nl22, a - 1e-6).tag == tag
        assert classify(nl22, a + 1e-6).tag == tag


def test_single_intersection_below_alpha_star(nl22, alpha_star):
    rng = np.random.default_rng(5)
    for _ in range(25):
        a1, a2 = sorted(rng.uniform(1.0 + 1e-3, alpha_star - 1e-3, 2))
        if a2 - a1 < 1e-3:
            continue
        t1 = classify(nl22, a1, early_exit=False, keep_trajectory=True).trajectory
        t2 = classify(nl22, a2, early_exit=False, keep_trajectory=True).trajectory
        hits = intersections(t1, t2, floor=1.0)
        assert len(hits) == 1, (a1, a2, hits)
        assert hits[0][1] > 1.0


# -- crossing moments --------------------------------------------------------------------

def constant_chain(c, start=2.0, width=0.01):
    return compile_nonlinearity(BaseModel(2.0, 4), [BlockSpec(AffineSine(c), 1.0, start, width)])


@pytest.mark.parametrize("c,delta", [(3.0, 0.5), (0.7, 1.0), (25.0, 2.5)])
def test_constant_block_moment(c, delta):
    nl, N, alpha = constant_chain(c), 4, 5.0
    r, m = crossing_moment(nl, alpha, alpha - delta)
    assert r == pytest.approx(math.sqrt(2 * N * delta / c), rel=1e-8)
    assert m == pytest.approx(2 * delta, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(q=st.floats(0.5, 4.0), amp=st.floats(1e-2, 1e2), lift=st.floats(0.05, 3.0),
       frac=st.floats(0.05, 1.0))
def test_moment_sandwich(q, amp, lift, frac):
    N, start, width = 4, 9.0, 0.1
    top = start + width
    nl = compile_nonlinearity(BaseModel(2.0, N), [BlockSpec(Power(q), amp, start, width)])
    alpha = top + lift
    delta = frac * lift
    r, m = crossing_moment(nl, alpha, alpha - delta)
    g = amp * np.array([(alpha - delta) ** q, alpha ** q])
    lo, hi = g.min(), g.max()
    slack = 1e-9
    assert math.sqrt(2 * N * delta / hi) * (1 - slack) <= r <= math.sqrt(2 * N * delta / lo) * (1 + slack)
    assert 2 * delta * lo / hi * (1 - slack) <= m <= 2 * delta * hi / lo * (1 + slack)


def test_crossing_moment_never_reached(nl22):
    with pytest.raises(ClassificationError):
        crossing_moment(nl22, 3.0, 0.2)
    with pytest.raises(ValueError):
        crossing_moment(nl22, 3.0, 4.0)


def test_example2_momentum_window():
    # first P shot above the bridge top: momentum at alpha* inside [a_bar, b_bar]
    rs = resolve(builtin("example2"))
    nl, a_star = rs.nonlinearity, rs.alpha_star
    N, b = nl.N, nl.base.b
    a_bar, b_bar = (N - 2) / 4, (a_star - b) * (N - 2) / 2
    alpha = rs.alphas[2]
    assert classify(nl, alpha).tag == "P"
    _, m = crossing_moment(nl, alpha, a_star)
    assert m <= b_bar
    assert a_bar <= m, f"momentum {m} below a_bar {a_bar}"
