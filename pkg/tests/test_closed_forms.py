import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import stats

from switchheat import closed_forms as cf
from switchheat.params import Params

UNIT = Params()
RATES = [0.5, 1.0, 2.0, 4.0, 8.0]
positive = st.floats(0.05, 20.0)


def test_dn_slope_unit_value():
    g = math.sqrt(2)
    assert cf.dn_slope(UNIT) == pytest.approx(1 / (1 + math.tanh(g) / g), rel=1e-15)
    assert cf.dn_slope(UNIT) == pytest.approx(0.6142, abs=5e-5)


def test_dn_slope_limits():
    slow = UNIT.with_total_rate(1e-6)
    assert cf.dn_slope(slow) == pytest.approx((1 - slow.p) * slow.b / slow.L, rel=1e-6)
    fast = UNIT.with_total_rate(1e8)
    assert cf.dn_slope(fast) == pytest.approx(fast.b / fast.L, rel=1e-4)


def test_dn_series_converges_with_bound():
    s = cf.dn_slope(UNIT)
    prev = None
    for K in (1, 2, 10, 100, 1000, 100_000):
        v = cf.dn_slope_series(UNIT, K)
        gap = abs(v.value - s)
        assert gap <= v.tail_bound * (1 + 1e-9) + 1e-15
        if prev is not None:
            assert gap <= prev
        prev = gap
    assert prev / s <= 1e-4
    with pytest.raises(ValueError):
        cf.dn_slope_series(UNIT, 0)


def test_dn_series_without_absorbing_state():
    p = Params(r0=1e-12, r1=1.0)
    assert cf.dn_slope_series(p, 3).value == pytest.approx(1.0, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(positive, positive, positive, positive, st.floats(0.0, 5.0))
def test_flux_identity(r0, r1, D, L, b):
    p = Params(r0, r1, D, L, b)
    assert cf.insect_flux(p) == D * cf.dn_slope(p)


def test_flux_fast_switching():
    p = Params(D=2.0, b=3.0).with_total_rate(1e9)
    assert cf.insect_flux(p) == pytest.approx(p.b * p.D / p.L, rel=1e-4)


def test_dd_mean_examples():
    assert cf.dd_mean(UNIT, 1.0) == 0.5
    assert cf.dd_mean(Params(r0=3.0), 1.0) == pytest.approx(0.25)
    assert cf.dd_mean(UNIT, 0.0) == 0.0
    with pytest.raises(ValueError):
        cf.dd_mean(UNIT, 1.1)


def test_beta_marginal_unit():
    a, b, c = cf.beta_marginal(UNIT, 1, "Y0")
    assert (a, b) == pytest.approx((1 + 1 / math.pi**2, 1 / math.pi**2))
    assert a == pytest.approx(1.10132, abs=1e-5)
    assert c == pytest.approx(math.sqrt(2) / math.pi)
    with pytest.raises(ValueError):
        cf.beta_marginal(UNIT, 0, "Y0")
    with pytest.raises(ValueError):
        cf.beta_marginal(UNIT, 1, "Y2")


@pytest.mark.parametrize("which", ["Y0", "Y1"])
@pytest.mark.parametrize("k", [1, 2, 5, 40])
def test_beta_moments_match_scipy(which, k):
    p = Params(r0=2.0, r1=0.7)
    a, b, _ = cf.beta_marginal(p, k, which)
    assert a > 0 and b > 0
    dist = stats.beta(a, b)
    assert cf.beta_mean(p, k, which) == pytest.approx(dist.mean(), rel=1e-12)
    assert cf.beta_second_moment(p, k, which) == pytest.approx(dist.moment(2), rel=1e-12)


def test_variance_unit_value():
    g = math.sqrt(2)
    assert cf.dd_l2_variance(UNIT) == pytest.approx((g / math.tanh(g) - 1) / 8, rel=1e-14)
    assert cf.dd_l2_variance(UNIT) == pytest.approx(0.0739865, abs=1e-7)


def test_variance_series_plain_partial_sum():
    v = cf.dd_l2_variance_series(UNIT, 10_000, tail=False)
    assert abs(v.value - cf.dd_l2_variance(UNIT)) <= v.tail_bound


@pytest.mark.parametrize("r0", RATES)
@pytest.mark.parametrize("r1", RATES)
def test_variance_series_grid(r0, r1):
    p = Params(r0=r0, r1=r1)
    v = cf.dd_l2_variance_series(p, 10_000)
    assert abs(v.value - cf.dd_l2_variance(p)) <= 1e-6
    assert abs(v.value - cf.dd_l2_variance(p)) <= v.tail_bound + 1e-13


def test_variance_vanishes_without_decay_state():
    assert cf.dd_l2_variance(Params(r0=1e-12)) < 1e-12
    assert cf.dd_l2_variance(Params(b=0.0)) == 0.0


@pytest.mark.parametrize("g", [1e-6, 5e-5, 1e-4, 2e-4, 0.3, 19.9, 20.1, 300.0])
def test_gamma_coth_branches(g):
    from mpmath import coth, mp, mpf

    mp.dps = 40
    exact = float(mpf(g) * coth(mpf(g)) - 1)
    assert cf.gamma_coth_minus_one(g) == pytest.approx(exact, rel=1e-12)


def test_joint_moment_diagonal_is_beta_moment():
    for k in range(1, 6):
        lhs = cf.dd_joint_second_moment(UNIT, k, k)
        rhs = float(cf.dd_ramp_coeff(UNIT, k)) ** 2 * cf.beta_second_moment(UNIT, k, "Y0")
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), positive, positive)
def test_joint_moment_symmetric(n, m, r0, r1):
    p = Params(r0=r0, r1=r1)
    assert cf.dd_joint_second_moment(p, n, m) == pytest.approx(cf.dd_joint_second_moment(p, m, n), rel=1e-13)


def test_joint_moment_pinned_limit():
    p = Params(r1=1e8)
    for n, m in ((1, 2), (2, 5)):
        c = float(cf.dd_ramp_coeff(p, n) * cf.dd_ramp_coeff(p, m))
        assert cf.dd_joint_second_moment(p, n, m) == pytest.approx(c, rel=1e-6)
    with pytest.raises(ValueError):
        cf.dd_joint_second_moment(p, 0, 1)


def test_sandwich_examples():
    assert cf.sandwich_bounds(1, 2, 0.0) == (0.0, 0.0)
    assert cf.sandwich_bounds(1, 2, 1.0) == (1.0, 1.0)
    assert cf.sandwich_bounds(1, 2, 0.5) == pytest.approx((0.0625, 0.9375))
    for bad in ((2, 2, 0.5), (3, 1, 0.5), (1, 2, 1.5), (1, 2, -0.1)):
        with pytest.raises(ValueError):
            cf.sandwich_bounds(*bad)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 50), st.integers(1, 50), st.floats(0.0, 1.0))
def test_sandwich_ordered(k, n, x):
    assume(k < n)
    lo, hi = cf.sandwich_bounds(k, n, x)
    assert 0.0 <= lo <= hi <= 1.0


def test_envelopes():
    lo, hi = cf.regularity_envelope(UNIT, 4, 0.4, 1.0, "Y1")
    assert lo == -hi
    lo, hi = cf.regularity_envelope(UNIT, 10**8, 0.4, 1.0, "Y0")
    assert hi - lo < 1e-2 and lo < 1 < hi
    with pytest.raises(ValueError):
        cf.regularity_envelope(UNIT, 1, 0.5, 1.0, "Y0")
    lo, hi = cf.refined_envelope(UNIT, 1, 0.4, 0.5, "Y1", 0.0)
    assert (lo, hi) == pytest.approx((0.5, 1.5))
    lo, hi = cf.refined_envelope(UNIT, 3, 0.4, 0.5, "Y0", 10.0)
    assert (lo, hi) == pytest.approx((1.0, 1.0))


def test_fit_envelope_constant():
    k = np.array([1.0, 4.0])
    y = np.array([[0.5, 0.9], [1.0, 1.0]])
    M = cf.fit_envelope_constant(y, k, 0.4, "Y0")
    assert M == pytest.approx([0.5, 0.0])
    inside = [cf.regularity_envelope(UNIT, int(kk), 0.4, M[0], "Y0") for kk in k]
    assert all(lo - 1e-12 <= v <= hi + 1e-12 for (lo, hi), v in zip(inside, y[0]))
