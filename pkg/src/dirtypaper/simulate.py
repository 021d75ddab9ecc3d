"""
Seeded Monte Carlo ground truth for the closed forms.

Randomness comes from Philox-4x64, a counter-based generator. A draw
stream is addressed by ``(seed, tag, block)``: the 128-bit key is
``(seed, tag)`` and the block index sits in the top word of the 256-bit
counter. Trials are cut into fixed-size blocks, each block is simulated
from its own substream and reduced to ``(count, sum, sum of squares)``,
and the partial sums are merged in block order. The result is therefore
bit-identical whether blocks run serially or on a thread pool.

Tags keep independent quantities on independent streams. All rate-type
estimators share the ``"estimate"`` tag so, at a fixed seed, they see the
same channel estimates and can be compared pairwise.
"""
from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rates
from .estimation import (
    ChannelParams,
    EstimationQuality,
    Scenario,
    TrainingConfig,
    estimation_quality,
    mean_estimate,
    ml_estimate,
    optimal_training_symbol,
    posterior_params,
)

__all__ = [
    "SimConfig",
    "McEstimate",
    "TrainingSimResult",
    "substream",
    "complex_normal",
    "simulate_training",
    "mc_rate",
    "mc_mean_alpha",
    "mc_capacity_txrx",
    "mc_perfect_csi",
    "mc_posterior",
    "mc_noncentral_chi2_cdf",
]

BLOCK_TRIALS = 1 << 16
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int
    ch: ChannelParams
    training: TrainingConfig
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def quality(self) -> EstimationQuality:
        return estimation_quality(self.training, self.ch)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int

    def z_score(self, reference: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean == reference else math.inf
        return abs(self.mean - reference) / self.std_error

    def agrees(self, reference: float, n_sigma: float = 4.0) -> bool:
        return self.z_score(reference) <= n_sigma


@dataclass(frozen=True)
class TrainingSimResult:
    error_var: McEstimate
    bias_real: McEstimate
    bias_imag: McEstimate
    failures: int
    trials: int

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials

    @property
    def failure_std(self) -> float:
        p = self.failure_rate
        return math.sqrt(p * (1.0 - p) / self.trials)


def _tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def substream(seed: int, tag: str, block: int) -> np.random.Generator:
    """Independent generator for one block of one tagged quantity."""
    key = np.array([seed & _MASK64, _tag_id(tag)], dtype=np.uint64)
    counter = np.array([0, 0, 0, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def complex_normal(rng: np.random.Generator, var: float, size) -> np.ndarray:
    """Circularly symmetric ``CN(0, var)``: two real normals of variance ``var/2``."""
    scale = math.sqrt(0.5 * var)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


# ---------------------------------------------------------------------------
# block machinery


def _blocks(trials: int, block_trials: int):
    n_blocks = -(-trials // block_trials)
    return [(b, min(block_trials, trials - b * block_trials)) for b in range(n_blocks)]


def _run_blocks(cfg: SimConfig, tag: str, kernel: Callable, block_trials: int = BLOCK_TRIALS):
    """
    Apply ``kernel(rng, n) -> array of shape (k, n)`` per block and merge.

    Returns per-row ``(sum, sum of squares)`` plus the total count.
    """
    def one(job):
        b, n = job
        vals = np.atleast_2d(np.asarray(kernel(substream(cfg.seed, tag, b), n), dtype=np.float64))
        return vals.sum(axis=1), (vals * vals).sum(axis=1)

    jobs = _blocks(cfg.trials, block_trials)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(one, jobs))
    else:
        parts = [one(j) for j in jobs]
    s = np.zeros_like(parts[0][0])
    ss = np.zeros_like(parts[0][1])
    for ps, pss in parts:
        s = s + ps
        ss = ss + pss
    return s, ss, cfg.trials


def _estimate(s: float, ss: float, n: int) -> McEstimate:
    mean = s / n
    if n < 2:
        return McEstimate(float(mean), math.inf, n)
    var = max(ss - n * mean * mean, 0.0) / (n - 1)
    return McEstimate(float(mean), math.sqrt(var / n), n)


def _mc_mean(cfg: SimConfig, tag: str, kernel: Callable) -> McEstimate:
    s, ss, n = _run_blocks(cfg, tag, kernel)
    return _estimate(s[0], ss[0], n)


# ---------------------------------------------------------------------------
# training


def simulate_training(cfg: SimConfig) -> TrainingSimResult:
    """
    Simulate whole training blocks and measure ``E|Ĥ - H|²``.

    Pilot-only: constant pilots ``sqrt(P_T)`` and the ML estimator.
    Pilot-plus-state: ``s ~ CN(0, Q I_N)``, the state-cancelling pilot and
    the mean estimator. Trials whose pilot had to be zeroed count as
    failures and are left out of the error statistics.
    """
    ch, tr = cfg.ch, cfg.training
    n_pilots = tr.length
    block_trials = max(1, min(BLOCK_TRIALS, (1 << 22) // n_pilots))

    def kernel(rng, n):
        h = complex_normal(rng, ch.fading_var, n)
        z = complex_normal(rng, ch.noise_var, (n, n_pilots))
        if tr.scenario is Scenario.PILOT_ONLY:
            x = np.full((n, n_pilots), math.sqrt(tr.pilot_power), dtype=np.complex128)
            est = ml_estimate(x, h[:, None] * x + z)
            ok = np.ones(n, dtype=bool)
        else:
            s = complex_normal(rng, ch.state_power, (n, n_pilots))
            x0 = optimal_training_symbol(s.mean(axis=1), tr)
            ok = x0 != 0.0
            y = h[:, None] * (x0[:, None] + s) + z
            est = mean_estimate(y, tr.reduction, tr.pilot_power)
        err = np.where(ok, est - h, 0.0)
        okf = ok.astype(np.float64)
        return np.stack([okf, np.abs(err) ** 2, err.real, err.imag])

    s, ss, _ = _run_blocks(cfg, "training", kernel, block_trials)
    successes = int(round(s[0]))
    stats = [_estimate(s[i], ss[i], successes) if successes else McEstimate(math.nan, math.inf, 0)
             for i in (1, 2, 3)]
    return TrainingSimResult(stats[0], stats[1], stats[2], cfg.trials - successes, cfg.trials)


# ---------------------------------------------------------------------------
# ergodic quantities


def _estimates(rng, n, ch: ChannelParams, q: EstimationQuality):
    # Ĥ = H + error, error ~ CN(0, σ_E²) independent of H
    h = complex_normal(rng, ch.fading_var, n)
    e = complex_normal(rng, q.error_var, n)
    return h, h + e


def mc_rate(alpha: float, cfg: SimConfig, clamp: bool = False) -> McEstimate:
    """Sample average of the per-estimate DPC rate at a fixed ``α``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    q = cfg.quality()

    def kernel(rng, n):
        _, est = _estimates(rng, n, cfg.ch, q)
        trip = rates.composite_triple(np.abs(est) ** 2, cfg.ch, q)
        return rates.rate_conditional(alpha, trip, clamp=clamp)

    return _mc_mean(cfg, "estimate", kernel)


def mc_mean_alpha(cfg: SimConfig) -> McEstimate:
    q = cfg.quality()

    def kernel(rng, n):
        _, est = _estimates(rng, n, cfg.ch, q)
        return rates.alpha_star_conditional(rates.composite_triple(np.abs(est) ** 2, cfg.ch, q))

    return _mc_mean(cfg, "estimate", kernel)


def mc_capacity_txrx(cfg: SimConfig) -> McEstimate:
    q = cfg.quality()

    def kernel(rng, n):
        _, est = _estimates(rng, n, cfg.ch, q)
        trip = rates.composite_triple(np.abs(est) ** 2, cfg.ch, q)
        return np.log2(1.0 + trip.effP / trip.effN)

    return _mc_mean(cfg, "estimate", kernel)


def mc_perfect_csi(cfg: SimConfig) -> McEstimate:
    snr = cfg.ch.input_power / cfg.ch.noise_var

    def kernel(rng, n):
        h = complex_normal(rng, cfg.ch.fading_var, n)
        return np.log2(1.0 + np.abs(h) ** 2 * snr)

    return _mc_mean(cfg, "channel", kernel)


def mc_posterior(cfg: SimConfig, shrinkage: float | None = None) -> tuple[McEstimate, ...]:
    """
    Residual statistics of ``R = H - δ Ĥ``.

    If ``H | Ĥ ~ CN(δĤ, v)`` then ``R`` has zero mean, ``E|R|² = v`` and
    ``R`` is uncorrelated with ``Ĥ``. Returns estimates of
    ``(Re R, Im R, |R|², Re(R conj Ĥ))``. ``shrinkage`` overrides ``δ``.
    """
    q = cfg.quality()
    delta = posterior_params(cfg.ch, q)[0] if shrinkage is None else shrinkage

    def kernel(rng, n):
        h, est = _estimates(rng, n, cfg.ch, q)
        r = h - delta * est
        return np.stack([r.real, r.imag, np.abs(r) ** 2, (r * np.conj(est)).real])

    s, ss, n = _run_blocks(cfg, "posterior", kernel)
    return tuple(_estimate(s[i], ss[i], n) for i in range(4))


def mc_noncentral_chi2_cdf(x: float, noncentrality: float, trials: int, seed: int) -> McEstimate:
    """Empirical ``P(|G + m|² <= x)`` with ``G`` two unit real normals, ``|m|² = λ``."""
    shift = math.sqrt(noncentrality)
    cfg = SimConfig(trials, seed, ChannelParams(), TrainingConfig(1, 1.0))

    def kernel(rng, n):
        g = rng.standard_normal((2, n))
        return ((g[0] + shift) ** 2 + g[1] ** 2 <= x).astype(np.float64)

    return _mc_mean(cfg, "chi2", kernel)
