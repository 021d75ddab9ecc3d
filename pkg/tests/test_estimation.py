import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirtypaper.errors import DegenerateError
from dirtypaper.estimation import (
    ChannelParams,
    EstimationQuality,
    Scenario,
    TrainingConfig,
    achievable_delta,
    eta_for_length,
    mean_estimate,
    ml_estimate,
    ml_estimation_quality,
    noise_reduction_factor,
    optimal_training_symbol,
    posterior_params,
    required_training_length,
    scenario2_estimation_quality,
    training_length_for_eta,
    training_success_probability,
)

STATE = Scenario.PILOT_PLUS_STATE


def cn(rng, var, size):
    return math.sqrt(var / 2) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def state_cfg(n=10, pt=1.0, delta=0.0, gamma=1e-2):
    return TrainingConfig(n, pt, delta, gamma, STATE)


class TestTypes:
    @pytest.mark.parametrize("field", ["fading_var", "noise_var", "input_power", "state_power"])
    def test_channel_params_positive(self, field):
        with pytest.raises(ValueError):
            ChannelParams(**{field: 0.0})

    def test_from_db(self):
        ch = ChannelParams.from_db(10.0, 20.0, noise_var=2.0)
        assert ch.input_power == pytest.approx(20.0)
        assert ch.state_power == pytest.approx(2000.0)
        assert ch.snr == pytest.approx(10.0)

    @pytest.mark.parametrize("kwargs", [
        dict(length=0, pilot_power=1.0),
        dict(length=2, pilot_power=-1.0),
        dict(length=2, pilot_power=1.0, reduction=1.0, scenario=STATE),
        dict(length=2, pilot_power=1.0, failure_tolerance=1.0, scenario=STATE),
        dict(length=2, pilot_power=1.0, reduction=0.3),  # pilot-only fixes Delta = 0
    ])
    def test_training_config_invariants(self, kwargs):
        with pytest.raises(ValueError):
            TrainingConfig(**kwargs)


class TestQuality:
    def test_pilot_only_substitution(self):
        q = ml_estimation_quality(TrainingConfig(10, 1.0), ChannelParams())
        assert q.error_var == pytest.approx(0.1)
        assert q.training_snr == pytest.approx(10.0)
        assert q.shrinkage == pytest.approx(1 / 1.1)

    def test_perfect_estimation_limit(self):
        q = ml_estimation_quality(TrainingConfig(10**12, 1.0), ChannelParams())
        assert q.error_var < 1e-11
        assert q.shrinkage == pytest.approx(1.0, abs=1e-11)

    def test_state_scenario_no_loss(self):
        ch = ChannelParams()
        assert scenario2_estimation_quality(state_cfg(10), ch) == ml_estimation_quality(
            TrainingConfig(10, 1.0), ch)

    def test_state_scenario_substitution(self):
        q = scenario2_estimation_quality(state_cfg(10, delta=0.5), ChannelParams())
        assert q.error_var == pytest.approx(0.2)

    @given(st.integers(1, 10_000), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3),
           st.floats(0.0, 0.999))
    def test_error_ratio_is_one_over_one_minus_delta(self, n, pt, noise, delta):
        ch = ChannelParams(noise_var=noise)
        e1 = ml_estimation_quality(TrainingConfig(n, pt), ch).error_var
        e2 = scenario2_estimation_quality(state_cfg(n, pt, delta), ch).error_var
        assert e2 / e1 == pytest.approx(1.0 / (1.0 - delta), rel=1e-12)
        assert e2 >= e1
        if delta == 0.0:
            assert e2 == e1
        elif delta > 1e-9:
            assert e2 > e1

    def test_from_error_var(self):
        q = EstimationQuality.from_error_var(0.25, 1.0)
        assert q.training_snr == pytest.approx(4.0)
        assert q.shrinkage == pytest.approx(0.8)
        assert EstimationQuality.from_error_var(0.0, 2.0) == EstimationQuality.perfect()


class TestNoiseReduction:
    @pytest.mark.parametrize("n,delta,eta", [(1, 0.0, 1.0), (10, 0.0, 0.1), (4, 0.5, 0.5)])
    def test_values(self, n, delta, eta):
        assert noise_reduction_factor(n, delta) == pytest.approx(eta)

    def test_degenerate(self):
        with pytest.raises(DegenerateError):
            noise_reduction_factor(3, 1.0)


class TestOptimalTrainingSymbol:
    def test_no_state(self):
        assert optimal_training_symbol(0.0, state_cfg(pt=2.0)) == pytest.approx(math.sqrt(2.0))

    def test_state_cancels_itself(self):
        cfg = state_cfg(pt=2.0, delta=0.3)
        assert optimal_training_symbol(math.sqrt(0.7 * 2.0), cfg) == 0.0

    def test_power_violation_returns_zero(self):
        cfg = state_cfg(pt=1.0, delta=0.19)
        s_mean = -0.2 + 0.1j
        x0 = math.sqrt(0.81) - s_mean
        assert abs(x0) ** 2 > 1.0  # direct inequality oracle
        assert optimal_training_symbol(s_mean, cfg) == 0.0
        ok_mean = 0.05j
        assert abs(math.sqrt(0.81) - ok_mean) ** 2 <= 1.0
        assert optimal_training_symbol(ok_mean, cfg) == pytest.approx(math.sqrt(0.81) - ok_mean)

    def test_vectorized(self):
        out = optimal_training_symbol(np.array([0.0, 5.0]), state_cfg())
        np.testing.assert_allclose(out, [1.0, 0.0])

    def test_requires_state_scenario(self):
        with pytest.raises(ValueError):
            optimal_training_symbol(0.0, TrainingConfig(3, 1.0))


def empirical_failure_rate(n, delta, pt, q, draws, seed):
    """Fraction of state realizations whose cancelling pilot exceeds the budget."""
    rng = np.random.default_rng(seed)
    s_mean = cn(rng, q / n, draws)  # mean of N iid CN(0, Q) samples
    x0 = math.sqrt((1 - delta) * pt) - s_mean
    return np.mean(np.abs(x0) ** 2 > pt)


class TestTrainingLength:
    def test_fig1_operating_point(self):
        n, delta = training_length_for_eta(0.1, 1e-2, 1.0, 100.0)
        assert 450 <= n <= 550
        assert noise_reduction_factor(n, delta) <= 0.1
        assert required_training_length(delta, 1e-2, 1.0, 100.0) <= n

    def test_vacuous_tolerance(self):
        assert required_training_length(0.5, 1 - 1e-12, 1.0, 100.0) == 1

    def test_is_smallest(self):
        n = required_training_length(0.9, 1e-2, 1.0, 100.0)
        assert training_success_probability(n, 0.9, 1.0, 100.0) >= 0.99
        assert training_success_probability(n - 1, 0.9, 1.0, 100.0) < 0.99

    def test_monotone_in_gamma_and_q(self):
        ns = [required_training_length(0.9, g, 1.0, 100.0) for g in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert ns == sorted(ns)
        ns = [required_training_length(0.9, 1e-2, 1.0, q) for q in (10.0, 100.0, 1000.0)]
        assert ns == sorted(ns)

    @pytest.mark.parametrize("gamma,q", [(1e-1, 100.0), (1e-2, 100.0), (1e-2, 30.0)])
    def test_monte_carlo_failure_rate(self, gamma, q):
        delta = 0.9
        n = required_training_length(delta, gamma, 1.0, q)
        draws = 10**6
        sigma = math.sqrt(gamma * (1 - gamma) / draws)
        assert empirical_failure_rate(n, delta, 1.0, q, draws, 7) <= gamma + 3 * sigma
        # constraint is active: half the length fails more often than allowed
        assert empirical_failure_rate(max(n // 2, 1), delta, 1.0, q, draws, 8) > gamma

    def test_success_probability_matches_monte_carlo(self):
        n, delta, q = 120, 0.6, 100.0
        p = 1 - training_success_probability(n, delta, 1.0, q)
        draws = 10**6
        emp = empirical_failure_rate(n, delta, 1.0, q, draws, 9)
        assert abs(emp - p) <= 4 * math.sqrt(p * (1 - p) / draws)


class TestAchievableDelta:
    @pytest.mark.parametrize("n", [470, 500, 800, 3000])
    def test_round_trip(self, n):
        delta = achievable_delta(n, 1e-2, 1.0, 100.0)
        assert required_training_length(delta, 1e-2, 1.0, 100.0) <= n

    def test_smallest_feasible(self):
        delta = achievable_delta(700, 1e-2, 1.0, 100.0)
        assert training_success_probability(700, delta, 1.0, 100.0) >= 0.99
        assert training_success_probability(700, delta - 1e-6, 1.0, 100.0) < 0.99

    def test_zero_when_unconstrained(self):
        # at Delta = 0 the success region is a disc through the origin, so a
        # concentrated state mean succeeds about half the time
        assert achievable_delta(10, 0.6, 1.0, 0.01) == 0.0

    def test_infeasible_is_nan(self):
        assert math.isnan(achievable_delta(10, 1e-2, 1.0, 100.0))
        assert eta_for_length(10, 1e-2, 1.0, 100.0) == math.inf

    def test_fig1_curve_passes_near_500(self):
        lengths = np.arange(440, 700, 2)
        etas = np.array([eta_for_length(int(n), 1e-2, 1.0, 100.0) for n in lengths])
        first = lengths[np.nonzero(etas <= 0.1)[0][0]]
        assert 450 <= first <= 550

    def test_looser_tolerance_gives_lower_eta(self):
        for n in [10, 300, 700, 1000, 3000, 10_000]:
            etas = [eta_for_length(n, g, 1.0, 100.0) for g in (1e-1, 1e-2, 1e-3)]
            assert etas[0] <= etas[1] <= etas[2]
        for n in [700, 1000, 3000, 10_000]:
            etas = [eta_for_length(n, g, 1.0, 100.0) for g in (1e-1, 1e-2, 1e-3)]
            assert etas[0] < etas[1] < etas[2]

    def test_eta_decreasing_in_length(self):
        etas = [eta_for_length(n, 1e-2, 1.0, 100.0) for n in range(470, 3000, 37)]
        assert np.all(np.diff(etas) < 0)


class TestPosterior:
    def test_perfect(self):
        assert posterior_params(ChannelParams(), EstimationQuality.perfect()) == (1.0, 0.0)

    def test_equal_variances(self):
        ch = ChannelParams(fading_var=2.0)
        assert posterior_params(ch, EstimationQuality.from_error_var(2.0, 2.0)) == (0.5, 1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_conditional_statistics_monte_carlo(self, seed):
        rng = np.random.default_rng(100 + seed)
        sh2 = rng.uniform(0.2, 3.0)
        se2 = rng.uniform(0.01, 2.0)
        n = 10**6
        h = cn(rng, sh2, n)
        est = h + cn(rng, se2, n)
        delta, var = posterior_params(ChannelParams(fading_var=sh2),
                                      EstimationQuality.from_error_var(se2, sh2))
        # least-squares slope of H on Ĥ and the residual spread
        slope = np.vdot(est, h) / np.vdot(est, est)
        resid = h - delta * est
        r2 = np.abs(resid) ** 2
        assert abs(r2.mean() - var) <= 4 * r2.std() / math.sqrt(n)
        prod = (resid * np.conj(est)).real
        assert abs(prod.mean()) <= 4 * prod.std() / math.sqrt(n)
        assert abs(slope.real - delta) < 5e-3 and abs(slope.imag) < 5e-3


class TestEstimators:
    def test_ml_noiseless(self):
        x = np.array([1.0, -2.0 + 1j, 0.5j])
        h = 0.3 - 0.7j
        assert ml_estimate(x, h * x) == pytest.approx(h)

    def test_ml_constant_pilot(self):
        rng = np.random.default_rng(1)
        x0, h = 1.5, 0.2 + 0.4j
        z = cn(rng, 1.0, 8)
        assert ml_estimate(np.full(8, x0), h * x0 + z) == pytest.approx(h + z.mean() / x0)

    def test_ml_degenerate(self):
        with pytest.raises(DegenerateError):
            ml_estimate(np.zeros(3), np.ones(3))
        with pytest.raises(ValueError):
            ml_estimate(np.ones(3), np.ones(2))

    def test_ml_error_variance(self):
        rng = np.random.default_rng(2)
        n_pilots, pt, noise, trials = 10, 1.0, 1.0, 10**5
        h = cn(rng, 1.0, trials)
        x = np.full((trials, n_pilots), math.sqrt(pt))
        err = ml_estimate(x, h[:, None] * x + cn(rng, noise, (trials, n_pilots))) - h
        e2 = np.abs(err) ** 2
        assert abs(e2.mean() - noise / (n_pilots * pt)) <= 4 * e2.std() / math.sqrt(trials)

    def test_mean_estimate_noiseless(self):
        delta, pt, h = 0.3, 2.0, 0.9 - 0.1j
        nu = math.sqrt((1 - delta) * pt)
        assert mean_estimate(np.full(5, h * nu), delta, pt) == pytest.approx(h)

    def test_mean_estimate_zero(self):
        assert mean_estimate(np.zeros(4), 0.2, 1.0) == 0.0
        with pytest.raises(DegenerateError):
            mean_estimate(np.zeros(4), 1.0, 1.0)

    def test_mean_estimate_error_variance(self):
        rng = np.random.default_rng(3)
        n_pilots, pt, delta, q, noise, trials = 20, 1.0, 0.5, 4.0, 1.0, 10**5
        cfg = state_cfg(n_pilots, pt, delta)
        h = cn(rng, 1.0, trials)
        s = cn(rng, q, (trials, n_pilots))
        x0 = optimal_training_symbol(s.mean(axis=1), cfg)
        ok = x0 != 0
        y = h[:, None] * (x0[:, None] + s) + cn(rng, noise, (trials, n_pilots))
        e2 = np.abs(mean_estimate(y, delta, pt) - h)[ok] ** 2
        expected = noise / (n_pilots * (1 - delta) * pt)
        assert abs(e2.mean() - expected) <= 4 * e2.std() / math.sqrt(e2.size)
