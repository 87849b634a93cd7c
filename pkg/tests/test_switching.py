import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from switchheat.rng import CounterStream
from switchheat.switching import (
    ConfigurationError,
    Environment,
    EnvironmentBatch,
    Exponential,
    GeneralLaw,
    SwitchingLaws,
    environment_from_json,
    environment_stream_id,
    locate,
    locate_batch,
    occupancy_p,
    sample_environment,
    sample_stationary_age,
    stationary_age_cdf,
    switch_count,
)

UNIT = SwitchingLaws.exponential(1.0, 1.0)
FIXED = Environment.from_pairs([(1.0, 2.0), (0.5, 0.5)])


def uniform_law(lo, hi):
    return GeneralLaw((lo + hi) / 2, lambda x: min(max((x - lo) / (hi - lo), 0.0), 1.0), lambda u: lo + u * (hi - lo), "uniform")


def test_sample_environment_reproducible():
    a = sample_environment(UNIT, 42, 3)
    b = sample_environment(UNIT, 42, 3)
    assert len(a) == 3
    assert np.array_equal(a.pairs, b.pairs)
    assert np.all(a.pairs > 0)


def test_empty_environment():
    env = sample_environment(UNIT, 1, 0)
    assert len(env) == 0
    assert env.pairs.shape == (0, 2)


def test_environment_law_of_large_numbers():
    env = sample_environment(SwitchingLaws.exponential(2.0, 1.0), 5, 100_000)
    assert abs(env.tau0(100_000).mean() - 0.5) <= 3 * 0.5 / math.sqrt(1e5)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_invalid_rate(bad):
    with pytest.raises(ConfigurationError):
        SwitchingLaws.exponential(bad, 1.0)


def test_general_law_rejects_atoms():
    def cdf(x):
        return 0.0 if x < 1 else 1.0

    with pytest.raises(ConfigurationError):
        GeneralLaw(1.0, cdf, lambda u: 1.0)
    with pytest.raises(ConfigurationError):
        GeneralLaw(-1.0, lambda x: x, lambda u: u)


def test_general_law_roundtrip_grid():
    law = uniform_law(0.5, 2.5)
    x = np.linspace(0.6, 2.4, 50)
    assert np.allclose(law.inverse_cdf(law.cdf(x)), x, atol=1e-12)


@pytest.mark.parametrize(
    "t, expected",
    [(0.5, (0, 0, 0.5)), (2.0, (0, 1, 1.0)), (3.2, (1, 0, 0.2))],
)
def test_locate_examples(t, expected):
    p = locate(FIXED, t)
    assert (p.n, p.state) == expected[:2]
    assert p.age == pytest.approx(expected[2], abs=1e-12)


def test_locate_epoch_conventions():
    assert locate(FIXED, 1.0).state == 1  # S'_1
    assert locate(FIXED, 3.0).state == 0  # S_1
    assert locate(FIXED, 0.0).age == 0.0


@pytest.mark.parametrize("s, t, n", [(0.5, 2.0, 1), (0.5, 3.6, 3), (0.1, 0.2, 0)])
def test_switch_count_examples(s, t, n):
    assert switch_count(FIXED, s, t) == n


@pytest.mark.parametrize("s, t", [(0.0, 1.0), (2.0, 1.0), (-1.0, 1.0)])
def test_switch_count_rejects(s, t):
    with pytest.raises(ValueError):
        switch_count(FIXED, s, t)


def test_occupancy():
    assert occupancy_p(UNIT) == 0.5
    assert occupancy_p(SwitchingLaws.exponential(3.0, 1.0)) == 0.75
    laws = SwitchingLaws(uniform_law(1.0, 3.0), uniform_law(0.5, 1.5))
    assert occupancy_p(laws) == pytest.approx(1 / 3)


def test_stationary_age_cdf_examples():
    assert stationary_age_cdf(UNIT, 1, math.log(2)) == pytest.approx(0.5)
    assert stationary_age_cdf(UNIT, 0, 0.0) == 0.0
    assert stationary_age_cdf(SwitchingLaws.exponential(2.0, 2.0), 0, math.inf) == 1.0
    with pytest.raises(ValueError):
        stationary_age_cdf(UNIT, 0, -1.0)


def test_general_age_cdf_properties():
    laws = SwitchingLaws(uniform_law(1.0, 3.0), uniform_law(0.5, 1.5))
    xs = np.linspace(0, 4, 200)
    vals = [stationary_age_cdf(laws, 0, x) for x in xs]
    assert vals[0] == 0.0
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[-1] == pytest.approx(1.0)


def test_stationary_age_sampler_exponential():
    rng = CounterStream(11, 0)
    a = sample_stationary_age(UNIT, 1, rng, size=100_000)
    assert abs(a.mean() - 1.0) <= 3 / math.sqrt(1e5)
    b = sample_stationary_age(SwitchingLaws.exponential(2.0, 2.0), 0, CounterStream(12, 0), size=10_000)
    d = stats.kstest(b, lambda x: 1 - np.exp(-2 * x)).statistic
    assert d <= stats.kstwo.ppf(0.99, 10_000)


def test_stationary_age_sampler_general_inverts_cdf():
    laws = SwitchingLaws(uniform_law(1.0, 3.0), uniform_law(0.5, 1.5))
    a = sample_stationary_age(laws, 0, CounterStream(3, 0), size=2000)
    d = stats.kstest(a, lambda x: np.array([stationary_age_cdf(laws, 0, v) for v in np.atleast_1d(x)])).statistic
    assert d <= stats.kstwo.ppf(0.99, 2000)


def test_stationary_age_zero_uniform():
    class Zero:
        def random(self, size=None):
            return 0.0

    laws = SwitchingLaws(uniform_law(1.0, 3.0), uniform_law(0.5, 1.5))
    assert sample_stationary_age(laws, 0, Zero()) == 0.0
    assert sample_stationary_age(UNIT, 0, Zero()) == 0.0


def test_json_roundtrip():
    env = sample_environment(UNIT, 9, 5)
    back = environment_from_json(env.to_json())
    assert np.array_equal(back.pairs, env.pairs)


def test_batch_matches_single():
    idx = np.arange(6, dtype=np.uint64)
    batch = EnvironmentBatch(UNIT, 4, environment_stream_id(idx))
    t0, t1 = batch.taus(50)
    for i in range(6):
        env = sample_environment(UNIT, 4, 50, index=i)
        assert np.array_equal(env.tau0(50), t0[i])
        assert np.array_equal(env.tau1(50), t1[i])
    n, state, age, _ = locate_batch(batch, 7.3)
    for i in range(6):
        p = locate(sample_environment(UNIT, 4, 0, index=i), 7.3)
        assert (p.n, p.state) == (n[i], state[i])
        assert p.age == pytest.approx(age[i], abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.0, 40.0))
def test_locate_invariants(seed, t):
    env = sample_environment(UNIT, seed, 0)
    p = locate(env, t)
    assert p.s_n <= t
    assert p.state in (0, 1)
    assert p.age >= 0
    if p.state == 0:
        assert p.s_n <= t < p.s_prime
        assert p.age == pytest.approx(t - p.s_n)
    else:
        assert p.s_prime <= t
        assert p.age == pytest.approx(t - p.s_prime)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.01, 10.0), st.floats(0.0, 1.0), st.floats(0.0, 10.0))
def test_switch_count_additive(seed, s, frac, span):
    env = sample_environment(UNIT, seed, 0)
    t = s + span
    m = s + frac * span
    starts, primes = env.epochs_until(t)
    if np.any(np.isclose(np.concatenate([starts, primes]), m, rtol=0, atol=1e-12)):
        return
    assert switch_count(env, s, t) == switch_count(env, s, m) + switch_count(env, m, t)


def test_long_run_occupancy():
    laws = SwitchingLaws.exponential(2.0, 1.0)
    env = sample_environment(laws, 3, 0)
    grid = np.linspace(0, 5000, 200_001)
    starts, primes = env.epochs_until(grid[-1])
    n = np.searchsorted(starts, grid, side="right") - 1
    on = grid >= primes[n]
    # successive grid points are correlated, so allow a generous band
    assert abs(on.mean() - 2 / 3) < 0.03
