import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radshoot.hypotheses import (FAIL, INCONCLUSIVE, PASS, HypothesisReport,
                                 HypothesisResult, check_H1, check_H2, check_H3, check_H4,
                                 check_H5, check_H6, find_b_and_beta, verify)
from radshoot.nonlinearity import (AffineSine, BaseModel, BlockSpec, compile_nonlinearity,
                                   power_chain)


def base(p, N):
    return BaseModel(p, N, supercritical=p >= (N + 2) / (N - 2))


def tail_chain(q, amp=1.0, alpha_star=8.6719343):
    return power_chain(BaseModel(2.0, 4), [alpha_star + 0.1], [0.1], [amp], q=q)


# -- b and beta ----------------------------------------------------------------------

@pytest.mark.parametrize("p,expected", [(2.0, (1.0, 1.5)), (3.0, (1.0, math.sqrt(2.0)))])
def test_b_and_beta(p, expected):
    b, beta = find_b_and_beta(base(p, 4))
    assert b == expected[0]
    assert beta == pytest.approx(expected[1], rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(p=st.floats(1.05, 6.0))
def test_F_vanishes_at_beta(p):
    bm = base(p, 3)
    _, beta = find_b_and_beta(bm)
    assert abs(bm.F(beta)) < 1e-12


# -- H1 to H5 ------------------------------------------------------------------------

def test_H1_base():
    res = check_H1(BaseModel(2.0, 4))
    assert res.verdict == PASS
    assert res.witness["beta"] == 1.5


def test_H2_subcritical_pass():
    res = check_H2(BaseModel(2.0, 4))
    assert res.verdict == PASS
    assert res.witness["tail_margin"] == pytest.approx(1 / 3 - 1 / 4)
    assert res.margin > 0


def test_H2_critical_inconclusive():
    res = check_H2(base(3.0, 4))
    assert res.verdict == INCONCLUSIVE
    assert res.witness["tail_margin"] == pytest.approx(0.0, abs=1e-15)


def test_H2_high_dimension_fails():
    res = check_H2(base(2.0, 10))
    assert res.verdict == FAIL
    assert "s" in res.witness
    # 1/3 < 8/20 at the tail
    assert res.witness["tail_margin"] == pytest.approx(1 / 3 - 0.4)


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5])
@pytest.mark.parametrize("n", [50, 500, 5000])
def test_H2_H3_grid_independent(p, n):
    bm = BaseModel(p, 4)
    grid2 = np.linspace(bm.beta, 10 * bm.beta, n + 1)[1:]
    grid3 = np.linspace(bm.b, 10 * bm.beta, n + 1)[1:]
    assert check_H2(bm, grid2).verdict == PASS
    assert check_H3(bm, grid3).verdict == PASS


def test_H2_grid_must_lie_above_beta():
    with pytest.raises(ValueError):
        check_H2(BaseModel(2.0, 4), [1.0, 2.0])


@pytest.mark.parametrize("p", [2.0, 1.5])
def test_H3_base_pass(p):
    assert check_H3(BaseModel(p, 4)).verdict == PASS


def test_H3_p2_is_identity():
    # f/(s-1) = s for s^2 - s
    s = np.linspace(1.1, 9.0, 7)
    nl = compile_nonlinearity(BaseModel(2.0, 4))
    np.testing.assert_allclose(nl.f(s) / (s - 1), s, rtol=1e-14)


def test_H3_constant_block_fails_with_witness():
    nl = compile_nonlinearity(BaseModel(2.0, 4), [BlockSpec(AffineSine(5.0), 1.0, 3.0, 0.1)])
    res = check_H3(nl)
    assert res.verdict == FAIL
    s1, s2 = res.witness["s1"], res.witness["s2"]
    assert s1 < s2
    assert nl.f(s2) / (s2 - 1) < nl.f(s1) / (s1 - 1)


def test_H4_witness(alpha_star):
    res = check_H4(BaseModel(2.0, 4))
    assert res.verdict == PASS
    assert res.witness["alpha_lo"] < res.witness["alpha_hi"]
    assert res.witness["alpha_star"] == pytest.approx(alpha_star, abs=1e-9)


def test_H5(alpha_star):
    assert check_H5(tail_chain(2.0), alpha_star).verdict == PASS
    assert check_H5(compile_nonlinearity(BaseModel(2.0, 4)), alpha_star).verdict == PASS


# -- H6 ------------------------------------------------------------------------------

@pytest.mark.parametrize("theta", [0.3, 0.5, 0.9])
def test_H6_discriminates_tails(theta):
    assert check_H6(tail_chain(2.0), theta).verdict == PASS
    res = check_H6(tail_chain(5.0), theta)
    assert res.verdict == FAIL
    assert res.witness


@pytest.mark.parametrize("q", [2.0, 5.0])
def test_H6_amplitude_invariant(q):
    verdicts = {check_H6(tail_chain(q, amp)).verdict for amp in (1e-2, 0.1, 1.0, 10.0, 1e2)}
    assert len(verdicts) == 1


def test_H6_arguments():
    with pytest.raises(ValueError):
        check_H6(tail_chain(2.0), theta=1.0)
    with pytest.raises(ValueError):
        check_H6(tail_chain(2.0), ladder=[1e2, 1e3])
    nl = compile_nonlinearity(BaseModel(2.0, 4), gamma=1e4)
    with pytest.raises(ValueError):
        check_H6(nl)


# -- report --------------------------------------------------------------------------

def test_fail_needs_witness():
    with pytest.raises(ValueError):
        HypothesisResult("H1", FAIL)
    with pytest.raises(ValueError):
        HypothesisResult("H1", "maybe")


@pytest.mark.parametrize("verdicts,code", [((PASS, PASS), 0), ((PASS, INCONCLUSIVE), 3),
                                           ((INCONCLUSIVE, FAIL), 2)])
def test_exit_codes(verdicts, code):
    res = {f"H{i + 1}": HypothesisResult(f"H{i + 1}", v, witness={"s": 1.0})
           for i, v in enumerate(verdicts)}
    assert HypothesisReport(res, 1.0, 1.5).exit_code == code


def test_verify_reports(alpha_star):
    rep = verify(tail_chain(2.0), alpha_star=alpha_star)
    assert rep.verdict == PASS and rep.exit_code == 0
    rep = verify(tail_chain(5.0), alpha_star=alpha_star)
    assert {k: r.verdict for k, r in rep.results.items()} == {
        "H1": PASS, "H2": PASS, "H3": PASS, "H4": PASS, "H5": PASS, "H6": FAIL}
    assert rep.exit_code == 2
    d = json.loads(rep.to_json())
    for name, r in d["hypotheses"].items():
        if r["verdict"] == FAIL:
            assert r["witness"]


def test_verify_finite_gamma_inconclusive(alpha_star):
    nl = compile_nonlinearity(BaseModel(2.0, 4), gamma=50.0)
    rep = verify(nl, alpha_star=alpha_star)
    assert rep["H6"].verdict == INCONCLUSIVE and rep.exit_code == 3


def test_verify_base_runs_H4():
    rep = verify(compile_nonlinearity(BaseModel(2.0, 4)))
    assert rep["H4"].verdict == PASS and rep.verdict == PASS
