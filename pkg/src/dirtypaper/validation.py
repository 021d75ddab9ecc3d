"""
Closed form versus oracle checks.

Each check pairs a production code path with an independent route to the
same number: a seeded Monte Carlo estimate (pass within 4 standard
errors), a different quadrature, or a brute-force search. ``run_validation``
returns one :class:`Check` per comparison; the CLI prints them as a table.

``perturb_shrinkage`` scales ``δ`` on the closed-form side only. It exists
to show the suite is sensitive: a 1 % error must trip at least one check.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import rates, simulate
from .estimation import (
    ChannelParams,
    EstimationQuality,
    Scenario,
    TrainingConfig,
    estimation_quality,
    posterior_params,
    training_length_for_eta,
)
from .specfun import exp_integral_e1, expect_exponential, noncentral_chi2_cdf

__all__ = ["Check", "run_validation", "format_report", "random_configs"]

N_SIGMA = 4.0


@dataclass(frozen=True)
class Check:
    name: str
    statistic: float
    threshold: float
    passed: bool


def _mc_check(name: str, est: simulate.McEstimate, reference: float) -> Check:
    z = est.z_score(reference)
    return Check(name, float(z), N_SIGMA, bool(z <= N_SIGMA))


def _tol_check(name: str, error: float, tol: float) -> Check:
    return Check(name, float(error), tol, bool(error <= tol))


def random_configs(seed: int, count: int):
    """Deterministic ``(ChannelParams, TrainingConfig, alpha)`` draws for sweeps."""
    rng = simulate.substream(seed, "configs", 0)
    out = []
    for _ in range(count):
        snr_db = rng.uniform(-5.0, 30.0)
        q_db = rng.uniform(0.0, 30.0)
        n = int(rng.integers(1, 51))
        alpha = float(rng.uniform(0.0, 1.0))
        ch = ChannelParams.from_db(snr_db, q_db)
        out.append((ch, TrainingConfig(n, ch.input_power), alpha))
    return out


def run_validation(trials: int = 10**6, seed: int = 20070101,
                   perturb_shrinkage: float = 0.0, quad_order: int = 64,
                   n_configs: int = 10) -> list[Check]:
    rate_trials = max(trials // 10, 1000)
    checks: list[Check] = []

    def closed_quality(tr: TrainingConfig, ch: ChannelParams) -> EstimationQuality:
        q = estimation_quality(tr, ch)
        if perturb_shrinkage:
            q = dataclasses.replace(q, shrinkage=q.shrinkage * (1.0 + perturb_shrinkage))
        return q

    # --- special functions -------------------------------------------------
    series = -np.euler_gamma + sum((-1) ** (k + 1) / (k * math.factorial(k)) for k in range(1, 40))
    checks.append(_tol_check("e1_series_at_1", abs(exp_integral_e1(1.0) / series - 1.0), 1e-12))
    zs = np.logspace(-3, 2, 60)
    e1 = exp_integral_e1(zs)
    sandwich = np.all((0.5 * np.exp(-zs) * np.log1p(2.0 / zs) < e1)
                      & (e1 < np.exp(-zs) * np.log1p(1.0 / zs)))
    checks.append(Check("e1_sandwich_bound", 0.0 if sandwich else 1.0, 0.0, bool(sandwich)))

    pts_rng = simulate.substream(seed, "chi2-points", 0)
    worst = 0.0
    for i in range(20):
        lam = float(pts_rng.uniform(0.0, 20.0))
        x = float(pts_rng.uniform(0.05, 40.0))
        emp = simulate.mc_noncentral_chi2_cdf(x, lam, trials, seed + 1 + i)
        worst = max(worst, abs(emp.mean - noncentral_chi2_cdf(x, lam)))
    bound = 4.0 / math.sqrt(trials)
    checks.append(_tol_check("noncentral_chi2_vs_empirical", worst, bound))

    # --- estimation ---------------------------------------------------------
    ch0 = ChannelParams()
    tr0 = TrainingConfig(10, 1.0)
    res = simulate.simulate_training(simulate.SimConfig(trials, seed, ch0, tr0))
    checks.append(_mc_check("training_pilot_only_error_var", res.error_var,
                            closed_quality(tr0, ch0).error_var))

    q_over_pt = 100.0
    gamma = 1e-2
    n_star, delta = training_length_for_eta(0.1, gamma, 1.0, q_over_pt)
    ch1 = ChannelParams(state_power=q_over_pt)
    tr1 = TrainingConfig(n_star, 1.0, delta, gamma, Scenario.PILOT_PLUS_STATE)
    res = simulate.simulate_training(simulate.SimConfig(rate_trials, seed, ch1, tr1))
    checks.append(_mc_check("training_state_error_var", res.error_var,
                            closed_quality(tr1, ch1).error_var))
    excess = (res.failure_rate - gamma) / math.sqrt(gamma * (1 - gamma) / res.trials)
    checks.append(Check("training_state_failure_rate", float(excess), 3.0, bool(excess <= 3.0)))

    ch2 = ChannelParams.from_db(10.0, 20.0)
    tr2 = TrainingConfig(10, ch2.input_power)
    cfg2 = simulate.SimConfig(trials, seed, ch2, tr2)
    q2 = closed_quality(tr2, ch2)
    delta2, post_var = posterior_params(ch2, q2)
    if perturb_shrinkage:
        delta2 = q2.shrinkage
        post_var = delta2 * q2.error_var
    re, im, sq, cross = simulate.mc_posterior(cfg2, shrinkage=delta2)
    checks.append(_mc_check("posterior_mean_real", re, 0.0))
    checks.append(_mc_check("posterior_mean_imag", im, 0.0))
    checks.append(_mc_check("posterior_variance", sq, post_var))
    checks.append(_mc_check("posterior_orthogonality", cross, 0.0))

    # --- rates --------------------------------------------------------------
    checks.append(_mc_check("mean_alpha_vs_mc", simulate.mc_mean_alpha(cfg2),
                            rates.mean_alpha(ch2, q2)))
    rho = rates.rho_parameter(ch2, q2)
    quad = expect_exponential(lambda t: t / (t + rho), quad_order)
    checks.append(_tol_check("mean_alpha_vs_quadrature",
                             abs(quad - rates.mean_alpha(ch2, q2)) / quad, 1e-9))

    for i, (ch, tr, alpha) in enumerate(random_configs(seed, n_configs)):
        cfg = simulate.SimConfig(rate_trials, seed + i, ch, tr)
        q = closed_quality(tr, ch)
        checks.append(_mc_check(f"capacity_rx_vs_mc_{i}", simulate.mc_rate(alpha, cfg),
                                rates.capacity_rx(alpha, ch, q, quad_order)))
        checks.append(_mc_check(f"capacity_txrx_vs_mc_{i}", simulate.mc_capacity_txrx(cfg),
                                rates.capacity_txrx(ch, q, quad_order)))
        closed = rates.capacity_txrx_closed_form(ch, q)
        checks.append(_tol_check(f"capacity_txrx_closed_form_{i}",
                                 abs(rates.capacity_txrx(ch, q, quad_order) / closed - 1.0), 1e-8))
        checks.append(_mc_check(f"perfect_csi_vs_mc_{i}", simulate.mc_perfect_csi(cfg),
                                rates.perfect_csi_capacity(ch, quad_order)))

    # per-estimate optimum collapses the rate to log2(1 + P/N)
    rng = simulate.substream(seed, "triples", 0)
    trip = rates.CompositeTriple(*(10.0 ** rng.uniform(-3, 3, size=(3, 100))))
    astar = rates.alpha_star_conditional(trip)
    gap = np.max(np.abs(rates.rate_conditional(astar, trip) - np.log2(1.0 + trip.effP / trip.effN)))
    checks.append(_tol_check("conditional_optimum_identity", float(gap), 1e-12))

    # closed-form objective vs direct quadrature of the log-denominator
    grid = np.linspace(0.0, 1.0 - 1e-6, 2001)
    for i, (ch, tr, _) in enumerate(random_configs(seed, 3)):
        q = closed_quality(tr, ch)
        m = ch.fading_var + q.error_var

        def log_den(t, q=q, ch=ch, m=m):
            tp = rates.composite_triple((m * t)[:, None], ch, q)
            return np.log2(tp.effP * tp.effQ * (1 - grid) ** 2 + tp.effN * (tp.effP + grid ** 2 * tp.effQ))

        direct = grid[int(np.argmin(expect_exponential(log_den, quad_order, check=False)))]
        checks.append(_tol_check(f"optimal_alpha_vs_direct_{i}",
                                 abs(rates.optimal_alpha(ch, q) - direct), 1e-3))
    return checks


def format_report(checks: list[Check]) -> str:
    lines = ["check,statistic,threshold,passed"]
    for c in checks:
        lines.append(f"{c.name},{c.statistic!r},{c.threshold!r},{'pass' if c.passed else 'fail'}")
    return "\n".join(lines) + "\n"
