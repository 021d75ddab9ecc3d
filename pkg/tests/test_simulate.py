import math

import numpy as np
import pytest

from dirtypaper import rates, simulate
from dirtypaper.estimation import (
    ChannelParams,
    Scenario,
    TrainingConfig,
    eta_for_length,
    scenario2_estimation_quality,
    training_success_probability,
)
from dirtypaper.simulate import SimConfig
from dirtypaper.specfun import noncentral_chi2_cdf
from dirtypaper.validation import format_report, run_validation

SEED = 20070101


def cfg_at(snr_db, q_db, n, trials=200_000, seed=SEED, workers=1):
    ch = ChannelParams.from_db(snr_db, q_db)
    return SimConfig(trials, seed, ch, TrainingConfig(n, ch.input_power), workers)


class TestStreams:
    def test_substreams_reproducible(self):
        a = simulate.substream(7, "estimate", 3).standard_normal(5)
        b = simulate.substream(7, "estimate", 3).standard_normal(5)
        assert np.array_equal(a, b)

    def test_substreams_distinct(self):
        base = simulate.substream(7, "estimate", 3).standard_normal(5)
        for other in (simulate.substream(8, "estimate", 3), simulate.substream(7, "channel", 3),
                      simulate.substream(7, "estimate", 4)):
            assert not np.array_equal(base, other.standard_normal(5))

    def test_complex_normal_variance(self):
        z = simulate.complex_normal(np.random.default_rng(0), 3.0, 400_000)
        assert np.mean(np.abs(z) ** 2) == pytest.approx(3.0, rel=0.01)
        assert np.mean(z.real ** 2) == pytest.approx(1.5, rel=0.01)

    def test_config_validation(self):
        ch = ChannelParams()
        with pytest.raises(ValueError):
            SimConfig(0, 1, ch, TrainingConfig(1, 1.0))
        with pytest.raises(ValueError):
            SimConfig(10, -1, ch, TrainingConfig(1, 1.0))


class TestDeterminism:
    def test_same_seed_same_result(self):
        cfg = cfg_at(10.0, 20.0, 10)
        assert simulate.mc_rate(0.4, cfg) == simulate.mc_rate(0.4, cfg)

    def test_parallel_is_bit_identical(self):
        serial = cfg_at(10.0, 20.0, 10, trials=300_001)
        parallel = cfg_at(10.0, 20.0, 10, trials=300_001, workers=4)
        assert simulate.mc_rate(0.4, serial) == simulate.mc_rate(0.4, parallel)
        assert simulate.simulate_training(SimConfig(
            50_000, SEED, serial.ch, TrainingConfig(20, 1.0), 1)) == simulate.simulate_training(
            SimConfig(50_000, SEED, serial.ch, TrainingConfig(20, 1.0), 3))

    def test_seed_changes_result(self):
        assert simulate.mc_rate(0.4, cfg_at(10.0, 20.0, 10)) != simulate.mc_rate(
            0.4, cfg_at(10.0, 20.0, 10, seed=SEED + 1))

    def test_standard_error_scaling(self):
        small = simulate.mc_rate(0.4, cfg_at(10.0, 20.0, 10, trials=100_000)).std_error
        big = simulate.mc_rate(0.4, cfg_at(10.0, 20.0, 10, trials=200_000)).std_error
        assert small / big == pytest.approx(math.sqrt(2.0), rel=0.05)


class TestTraining:
    def test_pilot_only_error_variance(self):
        cfg = cfg_at(10.0, 20.0, 5, trials=200_000)
        res = simulate.simulate_training(cfg)
        assert res.failures == 0
        assert res.error_var.agrees(cfg.quality().error_var)
        assert res.bias_real.agrees(0.0) and res.bias_imag.agrees(0.0)

    def test_noiseless_training_is_exact(self):
        ch = ChannelParams(noise_var=1e-300, input_power=1.0, state_power=1.0)
        res = simulate.simulate_training(SimConfig(1000, 1, ch, TrainingConfig(3, 1.0)))
        assert res.error_var.mean < 1e-20

    def test_state_scenario(self):
        ch = ChannelParams.from_db(10.0, 20.0)
        tr = TrainingConfig(40, ch.input_power, 0.9, 1e-2, Scenario.PILOT_PLUS_STATE)
        res = simulate.simulate_training(SimConfig(100_000, SEED, ch, tr, 2))
        assert res.error_var.agrees(scenario2_estimation_quality(tr, ch).error_var)
        p_fail = 1.0 - training_success_probability(tr.length, tr.reduction, ch.input_power,
                                                    ch.state_power)
        assert abs(res.failure_rate - p_fail) <= 3 * max(res.failure_std, 1e-6)


class TestErgodic:
    @pytest.mark.parametrize("snr,q,n", [(0.0, 10.0, 1), (10.0, 20.0, 10), (25.0, 30.0, 30)])
    def test_rate_matches_quadrature(self, snr, q, n):
        cfg = cfg_at(snr, q, n)
        ch, qual = cfg.ch, cfg.quality()
        for a in (0.0, 0.5, rates.optimal_alpha(ch, qual)):
            assert simulate.mc_rate(a, cfg).agrees(rates.capacity_rx(a, ch, qual))

    def test_other_estimators(self):
        cfg = cfg_at(10.0, 20.0, 10)
        ch, q = cfg.ch, cfg.quality()
        assert simulate.mc_mean_alpha(cfg).agrees(rates.mean_alpha(ch, q))
        assert simulate.mc_capacity_txrx(cfg).agrees(rates.capacity_txrx(ch, q))
        assert simulate.mc_perfect_csi(cfg).agrees(rates.perfect_csi_capacity(ch))

    def test_paired_ordering(self):
        # shared estimate stream: the pointwise bound holds for the sample means too
        cfg = cfg_at(10.0, 20.0, 10, trials=50_000)
        txrx = simulate.mc_capacity_txrx(cfg).mean
        for a in (0.0, 0.3, 0.9):
            assert simulate.mc_rate(a, cfg).mean <= txrx

    def test_more_state_hurts_txrx(self):
        lo = simulate.mc_capacity_txrx(cfg_at(10.0, 20.0, 10))
        hi = simulate.mc_capacity_txrx(cfg_at(10.0, 23.0103, 10))
        assert hi.mean < lo.mean

    def test_high_snr_alpha(self):
        ch = ChannelParams.from_db(60.0, 0.0)
        cfg = SimConfig(50_000, SEED, ch, TrainingConfig(1000, ch.input_power))
        assert simulate.mc_mean_alpha(cfg).mean > 0.99

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            simulate.mc_rate(1.5, cfg_at(10.0, 20.0, 10, trials=10))

    def test_posterior(self):
        cfg = cfg_at(5.0, 20.0, 3)
        from dirtypaper.estimation import posterior_params
        _, post_var = posterior_params(cfg.ch, cfg.quality())
        re, im, sq, corr = simulate.mc_posterior(cfg)
        assert re.agrees(0.0) and im.agrees(0.0) and corr.agrees(0.0)
        assert sq.agrees(post_var)

    def test_chi2(self):
        for x, lam in [(1.0, 3.0), (20.0, 18.0)]:
            est = simulate.mc_noncentral_chi2_cdf(x, lam, 200_000, SEED)
            assert est.agrees(noncentral_chi2_cdf(x, lam))


class TestValidation:
    def test_small_run_passes(self):
        checks = run_validation(trials=100_000, n_configs=3)
        failed = [c.name for c in checks if not c.passed]
        assert not failed

    def test_canary_fails(self):
        checks = run_validation(trials=100_000, n_configs=3, perturb_shrinkage=0.01)
        assert any(not c.passed for c in checks)

    def test_report_format(self):
        checks = run_validation(trials=20_000, n_configs=1)
        lines = format_report(checks).splitlines()
        assert lines[0] == "check,statistic,threshold,passed"
        assert len(lines) == len(checks) + 1


def test_eta_uses_smallest_reduction():
    eta = eta_for_length(500, 1e-2, 1.0, 100.0)
    assert 0.1 < eta < 0.12
