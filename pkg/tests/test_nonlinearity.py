import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from radshoot.nonlinearity import (AffineSine, BaseModel, BlockSpec, ConstructionError,
                                   DomainError, Power, Sampled, compile_nonlinearity,
                                   make_kind, power_chain)


def chain4(alpha_star):
    # five-block example: amplitudes 10, 1/10, 10, 1/10, widths 0.1
    starts = [alpha_star + 0.1, 8.99, 9.25, 9.36]
    return power_chain(BaseModel(2.0, 4), starts, [0.1] * 4, [10.0, 0.1, 10.0, 0.1])


# -- base model ------------------------------------------------------------------------

@pytest.mark.parametrize("p,N,beta", [(2.0, 4, 1.5), (3.0, 4, math.sqrt(2.0)),
                                      (1.5, 3, 1.25 ** 2), (2.0, 10, 1.5)])
def test_beta_closed_form(p, N, beta):
    base = BaseModel(p, N, supercritical=p >= (N + 2) / (N - 2))
    assert base.b == 1.0
    assert base.beta == pytest.approx(beta, rel=1e-15)
    assert abs(base.F(base.beta)) < 1e-12


def test_subcritical_flag():
    with pytest.raises(ValueError):
        BaseModel(5.0, 4)
    assert BaseModel(5.0, 4, supercritical=True).critical_exponent == 3.0
    with pytest.raises(ValueError):
        BaseModel(2.0, 2)


def test_empty_chain_is_base(nl22):
    s = np.linspace(0.0, 20.0, 101)
    np.testing.assert_allclose(nl22.f(s), s ** 2 - s, rtol=1e-15, atol=0)
    np.testing.assert_allclose(nl22.F(s), s ** 3 / 3 - s ** 2 / 2, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("s,expected", [(0.0, 0.0), (1.0, 0.0), (1.5, 0.75), (3.0, 6.0)])
def test_eval_f_base(nl22, s, expected):
    assert nl22.f(s) == expected


def test_F_at_beta_and_zero(nl22):
    assert nl22.F(0.0) == 0.0
    assert nl22.F(1.5) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("s", [0.3, 1.0, 2.0, 3.0, 7.5])
def test_Q_expansion_and_quadrature(nl22, s):
    # Q = (2/3) s^3 - 2 s^2, and F by independent quadrature
    Fq = quad(lambda t: t * t - t, 0.0, s, epsabs=1e-14)[0]
    assert nl22.Q(s) == pytest.approx(2 / 3 * s ** 3 - 2 * s ** 2, rel=1e-13, abs=1e-13)
    assert nl22.Q(s) == pytest.approx(8 * Fq - 2 * s * nl22.f(s), rel=1e-12, abs=1e-12)
    if s == 3.0:
        assert abs(nl22.Q(s)) < 1e-12


def test_domain_errors():
    nl = compile_nonlinearity(BaseModel(2.0, 4), gamma=20.0)
    for bad in (-1e-9, 20.0, 25.0):
        with pytest.raises(DomainError):
            nl.f(bad)
        with pytest.raises(DomainError):
            nl.F(bad)


# -- blocks and bridges ----------------------------------------------------------------

def test_bridge_endpoints(base22, alpha_star):
    a1 = alpha_star + 0.1
    nl = power_chain(base22, [a1], [0.1], [10.0])
    assert nl.f(a1) == pytest.approx(a1 ** 2 - a1, rel=1e-14)
    assert nl.f(a1 + 0.1) == pytest.approx(10 * (a1 + 0.1) ** 2, rel=1e-14)
    mid = a1 + 0.05
    assert nl.f(mid) == pytest.approx(0.5 * (a1 ** 2 - a1 + 10 * (a1 + 0.1) ** 2), rel=1e-13)


def test_example4_third_block(alpha_star):
    nl = chain4(alpha_star)
    a2, eps2 = 8.99, 0.1
    s = a2 + eps2
    assert nl.f(s) == pytest.approx(0.1 * s ** 2, rel=1e-14)
    assert nl.f(s + 1e-9) == pytest.approx(0.1 * (s + 1e-9) ** 2, rel=1e-14)


@pytest.mark.parametrize("kind", [Power(2.0), Power(0.5), AffineSine(2.0, 1.0, 1.0),
                                  AffineSine(3.0, -1.0, 4.0),
                                  Sampled((9.0, 10.0, 12.0, 15.0), (5.0, 7.0, 7.5, 11.0))])
def test_block_integral_matches_quadrature(kind, base22):
    nl = compile_nonlinearity(base22, [BlockSpec(kind, 3.0, 9.0, 0.2)])
    for s in (9.1, 9.2, 10.7, 13.3, 20.0):
        ref = quad(nl.f, 0.0, s, points=[1.0, 9.0, 9.2, 10.0, 12.0, 15.0], limit=200,
                   epsabs=1e-12, epsrel=1e-13)[0]
        assert nl.F(s) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_construction_errors(base22):
    with pytest.raises(ConstructionError):
        BlockSpec(Power(2.0), 0.0, 9.0, 0.1)
    with pytest.raises(ConstructionError):
        BlockSpec(Power(2.0), 1.0, 9.0, -0.1)
    with pytest.raises(ConstructionError):  # overlapping bridges
        power_chain(base22, [9.0, 9.05], [0.1, 0.1], [1.0, 1.0])
    with pytest.raises(ConstructionError):  # block below b
        power_chain(base22, [0.5], [0.1], [1.0])
    with pytest.raises(ConstructionError):  # not positive on its segment
        compile_nonlinearity(base22, [BlockSpec(AffineSine(0.5, 1.0), 1.0, 9.0, 0.1)])


def test_to_dict_round_trip():
    for kind in (Power(3.0), AffineSine(2.0, 1.0, 0.5), Sampled((1.0, 2.0), (1.0, 4.0))):
        assert make_kind(kind.to_dict()) == kind
        spec = BlockSpec(kind, 2.0, 9.0, 0.1)
        assert BlockSpec.from_dict(spec.to_dict()) == spec


# -- properties ------------------------------------------------------------------------

def _random_chain(rng, n_blocks=None):
    base = BaseModel(float(rng.uniform(1.2, 2.9)), 4)
    n = int(rng.integers(1, 6)) if n_blocks is None else n_blocks
    starts, widths, kinds, amps = [], [], [], []
    s = float(rng.uniform(1.5, 10.0))
    for _ in range(n):
        w = float(rng.uniform(1e-3, 0.5))
        starts.append(s)
        widths.append(w)
        kinds.append(Power(float(rng.uniform(0.5, 4.0))) if rng.random() < 0.6
                     else AffineSine(float(rng.uniform(1.5, 4.0)), float(rng.uniform(-1, 1)),
                                     float(rng.uniform(0.1, 5.0))))
        amps.append(float(10.0 ** rng.uniform(-3, 3)))
        s = s + w + float(rng.uniform(1e-3, 2.0))
    blocks = [BlockSpec(k, a, s0, w) for k, a, s0, w in zip(kinds, amps, starts, widths)]
    return compile_nonlinearity(base, blocks)


def test_continuity_random_chains():
    rng = np.random.default_rng(20241019)
    worst = 0.0
    for _ in range(10_000):
        nl = _random_chain(rng)
        for j in range(1, len(nl.segments)):
            x = nl.segments[j].lo
            left = nl.segments[j - 1].f(x)
            right = nl.segments[j].f(x)
            worst = max(worst, abs(left - right) / max(abs(left), abs(right), 1e-300))
    assert worst < 1e-12


def test_F_finite_difference_per_segment():
    rng = np.random.default_rng(7)
    for _ in range(5):
        nl = _random_chain(rng)
        for seg in nl.segments:
            hi = seg.hi if math.isfinite(seg.hi) else seg.lo + 5.0
            pts = rng.uniform(seg.lo, hi, 1000)
            h = 1e-5 * np.maximum(1.0, pts)
            ok = (pts - h > seg.lo) & (pts + h < hi) & (np.abs(nl.f(pts)) > 1e-3)
            pts, h = pts[ok], h[ok]
            fd = (nl.F(pts + h) - nl.F(pts - h)) / (2 * h)
            # rounding floor of a central difference of F
            floor = 8 * np.finfo(float).eps * np.abs(nl.F(pts)) / h
            # truncation h^2 |f''| / 6, with f'' from a second difference
            floor += np.abs(nl.f(pts + h) - 2 * nl.f(pts) + nl.f(pts - h)) / 3
            assert np.all(np.abs(fd - nl.f(pts)) <= 1e-8 * np.abs(nl.f(pts)) + floor)


def test_positive_above_b():
    rng = np.random.default_rng(11)
    for _ in range(200):
        nl = _random_chain(rng)
        s = np.linspace(1.0 + 1e-9, nl.segments[-1].lo + 10, 4000)
        assert np.all(nl.f(s) > 0)


@settings(max_examples=60, deadline=None)
@given(amp=st.floats(1e-3, 1e3), q=st.floats(0.5, 4.0), frac=st.floats(0.0, 1.0))
def test_amplitude_scaling(amp, q, frac):
    base = BaseModel(2.0, 4)
    s = 9.2 + 5.0 * frac + 1e-9
    f1 = power_chain(base, [9.0], [0.2], [amp], q=q).f(s)
    f2 = power_chain(base, [9.0], [0.2], [2 * amp], q=q).f(s)
    assert f2 == pytest.approx(2 * f1, rel=4e-16)


@settings(max_examples=80, deadline=None)
@given(s=st.floats(0.0, 50.0))
def test_Q_consistent(s):
    nl = power_chain(BaseModel(2.0, 4), [9.0], [0.1], [10.0])
    assert nl.Q(s) == pytest.approx(8 * nl.F(s) - 2 * s * nl.f(s), rel=1e-12, abs=1e-9)


def test_arrays_and_scalars_agree(nl22):
    s = np.array([0.2, 1.3, 4.4])
    np.testing.assert_array_equal(nl22.f(s), [nl22.f(x) for x in s])
    np.testing.assert_array_equal(nl22.F(s), [nl22.F(x) for x in s])
