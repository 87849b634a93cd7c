import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from switchheat.engine import (
    Flow,
    FlowPair,
    PullbackDivergence,
    backward_orbit,
    certify_contraction,
    exponential_flow,
    forward_orbit,
    invariance_pairs,
    process_at,
    process_batch,
    pullback_batch,
    pullback_sample,
    stationary_batch,
    stationary_sample,
    stationary_stream,
)
from switchheat.params import Params
from switchheat.spectral import Basis, SpectralField, evaluate, make_flow_pair, project_ramp
from switchheat.switching import (
    Environment,
    EnvironmentBatch,
    GeneralLaw,
    SwitchingLaws,
    environment_stream_id,
    sample_environment,
)
from switchheat.verify.stats import ks_two_sample

UNIT = Params()
DD = make_flow_pair("DD", UNIT)
DN = make_flow_pair("DN", UNIT)
SCALAR = FlowPair(exponential_flow(2.0, 1.0), exponential_flow(3.0, 0.0), norm=np.abs, origin=0.0)


def random_field(seed, K=64):
    rng = np.random.default_rng(seed)
    basis = Basis("DD", 1.0, 1.0, K)
    return SpectralField(basis, rng.normal(size=K) / np.arange(1, K + 1), rng.uniform(0, 1))


def test_forward_zero_and_one_step():
    env = sample_environment(UNIT.laws(), 1, 2)
    x = random_field(0)
    assert forward_orbit(DD, env, x, 0) is x
    t0, t1 = env.pair(1)
    one = forward_orbit(DD, env, x, 1)
    direct = DD.phi1(t1, DD.phi0(t0, x))
    assert np.array_equal(one.remainder, direct.remainder)
    gamma = forward_orbit(DD, env, x, 1, "gamma")
    assert np.array_equal(gamma.remainder, DD.phi0(t0, DD.phi1(t1, x)).remainder)
    assert np.array_equal(backward_orbit(DD, env, x, 1).remainder, one.remainder)
    assert backward_orbit(DD, env, x, 0) is x


def test_dd_one_step_closed_form():
    env = sample_environment(UNIT.laws(), 2, 1)
    t0, t1 = env.pair(1)
    basis = Basis("DD")
    f = forward_orbit(DD, env, basis.zero(), 1)
    lam = basis.eigenvalues
    ck = project_ramp(basis, 1.0).coeffs
    assert np.allclose(f.coeffs, ck * (1 - np.exp(-lam * t0)) * np.exp(-lam * t1), atol=1e-15)


def test_backward_is_forward_on_reversed_environment():
    env = sample_environment(UNIT.laws(), 3, 6)
    rev = Environment.from_pairs(env.pairs[:6][::-1])
    x = random_field(1)
    for pair in (DD, DN):
        a, b = forward_orbit(pair, rev, x, 6), backward_orbit(pair, env, x, 6)
        assert np.allclose(a.coeffs, b.coeffs, rtol=1e-12, atol=1e-15)


@pytest.mark.xfail(strict=True, reason="the step maps are affine with different offsets, so their order matters")
def test_dd_forward_equals_backward_literal():
    env = sample_environment(UNIT.laws(), 3, 6)
    x = random_field(1)
    a, b = forward_orbit(DD, env, x, 6), backward_orbit(DD, env, x, 6)
    assert np.allclose(a.coeffs, b.coeffs, rtol=1e-12, atol=1e-15)


def test_pullback_independent_of_initial_state():
    env = sample_environment(UNIT.laws(), 4, 0)
    tol = 1e-10
    for pair in (DD, DN):
        a = pullback_sample(pair, env, pair.origin, tol)
        b = pullback_sample(pair, env, random_field(5), tol)
        assert float((a.value - b.value).norm()) <= 2 * tol


def test_pullback_loose_tolerance_stops_immediately():
    env = sample_environment(UNIT.laws(), 4, 0)
    res = pullback_sample(DD, env, DD.origin, tol=10.0)
    assert res.depth <= 1


def test_pullback_divergence_carries_history():
    stuck = Flow(lambda t, x: x + t, lambda t: 1.0)
    pair = FlowPair(stuck, stuck)
    env = sample_environment(UNIT.laws(), 0, 0)
    with pytest.raises(PullbackDivergence) as info:
        pullback_sample(pair, env, 0.0, tol=1e-10, max_depth=5)
    assert len(info.value.diagnostics["residuals"]) == 5
    with pytest.raises(ValueError):
        pullback_sample(DD, env, DD.origin, tol=0.0)


def test_process_at_start_and_first_interval():
    env = Environment.from_pairs([(1.0, 2.0), (0.5, 0.5), (1.0, 1.0)])
    x = random_field(2)
    u0 = process_at(DD, env, x, 0.0)
    assert np.array_equal(u0.remainder, x.remainder) and u0.edge == x.edge
    u = process_at(DD, env, x, 0.4)
    assert np.allclose(u.coeffs, DD.phi0(0.4, x).coeffs, atol=1e-15)


def test_process_batch_matches_single():
    idx = np.arange(5, dtype=np.uint64)
    batch = EnvironmentBatch(UNIT.laws(), 8, environment_stream_id(idx))
    out = process_batch(DN, batch, DN.origin, 2.7)
    for i in range(5):
        env = sample_environment(UNIT.laws(), 8, 0, index=i)
        one = process_at(DN, env, DN.origin, 2.7)
        assert np.allclose(out[i].coeffs, one.coeffs, atol=1e-13)


def test_stationary_batch_matches_single():
    st = stationary_batch(DD, UNIT.laws(), 7, np.arange(6))
    for i in range(6):
        one = stationary_sample(DD, UNIT.laws(), stationary_stream(7, i))
        assert np.array_equal(one.remainder, st.values[i].remainder)
        assert one.edge == st.values[i].edge
    # the DN transfer goes through matrix products whose rounding depends on batch shape
    st = stationary_batch(DN, UNIT.laws(), 7, np.arange(6))
    for i in range(6):
        one = stationary_sample(DN, UNIT.laws(), stationary_stream(7, i))
        assert np.allclose(one.remainder, st.values[i].remainder, rtol=0, atol=1e-15)
        assert one.edge == st.values[i].edge


def test_stationary_occupancy_fraction():
    st = stationary_batch(SCALAR, SwitchingLaws.exponential(3.0, 1.0), 0, np.arange(10_000))
    p = 0.75
    assert abs(st.xi.mean() - p) <= 3 * math.sqrt(p * (1 - p) / 1e4)


def test_general_sampler_agrees_with_exponential_form():
    # exponential laws wrapped as general laws route through the age-based sampler
    def wrap(rate):
        return GeneralLaw(1 / rate, lambda x: -math.expm1(-rate * x), lambda u: -math.log1p(-u) / rate, f"exp{rate}")

    params = Params(r0=2.0, r1=1.0)
    pair = make_flow_pair("DD", params)
    exp_laws = params.laws()
    gen_laws = SwitchingLaws(wrap(2.0), wrap(1.0))
    a = stationary_batch(pair, exp_laws, 1, np.arange(3000)).values.coeffs[:, 0]
    b = stationary_batch(pair, gen_laws, 2, np.arange(3000)).values.coeffs[:, 0]
    assert ks_two_sample(a, b, 0.01).passed


def test_certificates():
    dd = certify_contraction(DD, UNIT.laws())
    assert dd.product == pytest.approx((1 / (1 + math.pi**2)) ** 2)
    assert dd.passed
    dn = certify_contraction(DN, UNIT.laws())
    assert dn.product == pytest.approx(1 / (1 + math.pi**2 / 4) / (1 + math.pi**2))
    assert dn.passed
    flat = Flow(lambda t, x: x, lambda t: 1.0)
    bad = certify_contraction(FlowPair(flat, flat), UNIT.laws(), n_mc=200)
    assert bad.product == 1.0 and not bad.passed
    with pytest.raises(ValueError):
        certify_contraction(DD, UNIT.laws(), n_mc=10)


def test_certificate_monte_carlo_branch():
    # no decay_rate declared, so the product is estimated by sampling
    pair = FlowPair(Flow(DD.phi0.apply, DD.phi0.contraction_modulus), Flow(DD.phi1.apply, DD.phi1.contraction_modulus))
    c = certify_contraction(pair, UNIT.laws(), n_mc=20_000)
    assert abs(c.product - (1 / (1 + math.pi**2)) ** 2) <= 5 * c.stderr + 1e-4
    assert c.passed


def test_invariance_pairs_sizes():
    a, b = invariance_pairs(DD, UNIT.laws(), 0, 1)
    assert len(a) == 1 and len(b) == 1
    with pytest.raises(ValueError):
        invariance_pairs(DD, UNIT.laws(), 0, 0)


def test_scalar_engine_and_batch():
    env = sample_environment(UNIT.laws(), 0, 0)
    one = pullback_sample(SCALAR, env, 0.0, 1e-12)
    batch = EnvironmentBatch(UNIT.laws(), 0, environment_stream_id(np.arange(1, dtype=np.uint64)))
    many = pullback_batch(SCALAR, batch, 0.0, 1e-12)
    assert abs(many.values[0] - one.value) <= 2e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 6))
def test_initial_condition_forgetting(seed, n):
    env = sample_environment(UNIT.laws(), seed, n)
    x1, x2 = random_field(seed % 1000), random_field(seed % 1000 + 1)
    gap = float((backward_orbit(DN, env, x1, n) - backward_orbit(DN, env, x2, n)).norm())
    t0, t1 = env.tau0(n), env.tau1(n)
    bound = np.prod([DN.phi0.contraction_modulus(a) * DN.phi1.contraction_modulus(b) for a, b in zip(t0, t1)])
    # DN moduli hold for the untruncated flows; allow a small truncation slack
    assert gap <= bound * float((x1 - x2).norm()) * (1 + 1e-6) + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_residuals_nonincreasing_after_first_step(seed):
    env = sample_environment(UNIT.laws(), seed, 0)
    hist = pullback_sample(DD, env, DD.origin, 1e-12).history
    assert all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(hist[1:], hist[2:]))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_orbit_stays_in_box(seed):
    # start between 0 and the ramp; DD orbit points stay there up to truncation
    basis = Basis("DD")
    x = np.linspace(0, 1, 2049)
    f = SpectralField.from_grid(basis, x, 0.5 * x, edge=0.5)
    env = sample_environment(UNIT.laws(), seed, 5)
    grid = np.arange(1, 256) / 256
    for n in range(1, 6):
        v = evaluate(forward_orbit(DD, env, f, n), grid)
        assert v.min() >= -7e-3 and np.all(v <= grid + 7e-3)
