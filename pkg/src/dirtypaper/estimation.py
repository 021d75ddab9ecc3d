"""
Pilot-based channel estimation.

Two training scenarios are covered:

* ``PILOT_ONLY``: the receiver sees ``y = H x + z``; a constant pilot and
  the least-squares (ML) estimator give error variance ``σ_Z² / (N P_T)``.
* ``PILOT_PLUS_STATE``: the state ``s`` rides on top of the pilots,
  ``y = H (x + s) + z``. The transmitter knows ``s`` and picks the constant
  pilot ``x0 = sqrt((1-Δ) P_T) - <s>`` so the mean of ``x + s`` hits a
  target amplitude. This only fits the power budget when ``|x0|² <= P_T``;
  the probability of that event is a non-central chi-square CDF, which is
  what fixes the training length.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, UnsatisfiableError
from .specfun import noncentral_chi2_cdf

__all__ = [
    "Scenario",
    "ChannelParams",
    "TrainingConfig",
    "EstimationQuality",
    "ml_estimation_quality",
    "scenario2_estimation_quality",
    "estimation_quality",
    "noise_reduction_factor",
    "optimal_training_symbol",
    "training_success_probability",
    "required_training_length",
    "achievable_delta",
    "eta_for_length",
    "training_length_for_eta",
    "posterior_params",
    "ml_estimate",
    "mean_estimate",
]

MAX_TRAINING_LENGTH = 10**9


class Scenario(enum.Enum):
    PILOT_ONLY = "pilot_only"
    PILOT_PLUS_STATE = "pilot_plus_state"


def _positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class ChannelParams:
    """Fading Costa channel ``Y = H (X + S) + Z`` (all powers linear)."""

    fading_var: float = 1.0
    noise_var: float = 1.0
    input_power: float = 1.0
    state_power: float = 100.0

    def __post_init__(self):
        _positive("fading_var", self.fading_var)
        _positive("noise_var", self.noise_var)
        _positive("input_power", self.input_power)
        _positive("state_power", self.state_power)

    @classmethod
    def from_db(cls, snr_db: float, q_over_p_db: float, fading_var: float = 1.0,
                noise_var: float = 1.0) -> "ChannelParams":
        """SNR is ``P̄/σ_Z²``; the state power is given relative to ``P̄``."""
        power = noise_var * 10.0 ** (snr_db / 10.0)
        return cls(fading_var, noise_var, power, power * 10.0 ** (q_over_p_db / 10.0))

    @property
    def snr(self) -> float:
        return self.input_power / self.noise_var


@dataclass(frozen=True)
class TrainingConfig:
    length: int
    pilot_power: float
    reduction: float = 0.0
    failure_tolerance: float = 1e-2
    scenario: Scenario = Scenario.PILOT_ONLY

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 1:
            raise ValueError("training length must be a positive integer")
        _positive("pilot_power", self.pilot_power)
        if not 0.0 <= self.reduction < 1.0:
            raise ValueError("reduction must lie in [0, 1)")
        if not 0.0 < self.failure_tolerance < 1.0:
            raise ValueError("failure_tolerance must lie in (0, 1)")
        if self.scenario is Scenario.PILOT_ONLY and self.reduction != 0.0:
            raise ValueError("pilot-only training has no reduction (Delta = 0)")


@dataclass(frozen=True)
class EstimationQuality:
    """Error variance of the estimate and the posterior shrinkage ``δ``."""

    error_var: float
    shrinkage: float
    training_snr: float

    @classmethod
    def from_error_var(cls, error_var: float, fading_var: float) -> "EstimationQuality":
        if error_var < 0.0:
            raise ValueError("error variance must be >= 0")
        snr = math.inf if error_var == 0.0 else 1.0 / error_var
        return cls(error_var, fading_var / (fading_var + error_var), snr)

    @classmethod
    def perfect(cls) -> "EstimationQuality":
        return cls(0.0, 1.0, math.inf)


def ml_estimation_quality(cfg: TrainingConfig, ch: ChannelParams) -> EstimationQuality:
    if cfg.scenario is not Scenario.PILOT_ONLY:
        raise ValueError("expected a pilot-only training config")
    snr = cfg.length * cfg.pilot_power / ch.noise_var
    return EstimationQuality(1.0 / snr, ch.fading_var / (ch.fading_var + 1.0 / snr), snr)


def scenario2_estimation_quality(cfg: TrainingConfig, ch: ChannelParams) -> EstimationQuality:
    """Same as the pilot-only case with the pilot power scaled by ``1 - Δ``."""
    if cfg.scenario is not Scenario.PILOT_PLUS_STATE:
        raise ValueError("expected a pilot-plus-state training config")
    remaining = 1.0 - cfg.reduction
    if remaining <= 0.0:
        raise DegenerateError("no pilot power left (Delta = 1)")
    snr = cfg.length * remaining * cfg.pilot_power / ch.noise_var
    return EstimationQuality(1.0 / snr, ch.fading_var / (ch.fading_var + 1.0 / snr), snr)


def estimation_quality(cfg: TrainingConfig, ch: ChannelParams) -> EstimationQuality:
    if cfg.scenario is Scenario.PILOT_ONLY:
        return ml_estimation_quality(cfg, ch)
    return scenario2_estimation_quality(cfg, ch)


def noise_reduction_factor(length: int, reduction: float) -> float:
    """``η = 1 / (N (1 - Δ))``: estimation error variance relative to ``σ_Z²/P_T``."""
    if reduction >= 1.0:
        raise DegenerateError("noise reduction factor undefined for Delta = 1")
    return 1.0 / (length * (1.0 - reduction))


def optimal_training_symbol(state_mean, cfg: TrainingConfig):
    """
    Constant pilot cancelling the state mean, or 0 when it would exceed ``P_T``.

    ``state_mean`` may be an array (one entry per training block).
    """
    if cfg.scenario is not Scenario.PILOT_PLUS_STATE:
        raise ValueError("expected a pilot-plus-state training config")
    target = math.sqrt((1.0 - cfg.reduction) * cfg.pilot_power)
    x0 = target - np.asarray(state_mean, dtype=np.complex128)
    # relative slack so the exact-boundary case sqrt(P_T)**2 is not lost to rounding
    ok = cfg.length * np.abs(x0) ** 2 <= cfg.length * cfg.pilot_power * (1.0 + 1e-12)
    out = np.where(ok, x0, 0.0 + 0.0j)
    return complex(out) if out.ndim == 0 else out


def training_success_probability(length: int, reduction: float, pilot_power: float,
                                 state_power: float) -> float:
    """
    ``Pr(|x0|² <= P_T)`` over ``s ~ CN(0, Q I_N)``.

    ``2N |x0|² / Q`` is non-central chi-square (2 dof) with noncentrality
    ``2N (1-Δ) P_T / Q``; the budget is hit at ``r = 2N P_T / Q``.
    """
    r = 2.0 * length * pilot_power / state_power
    return noncentral_chi2_cdf(r, r * (1.0 - reduction))


def required_training_length(reduction: float, failure_tolerance: float,
                             pilot_power: float, state_power: float,
                             max_length: int = MAX_TRAINING_LENGTH) -> int:
    """Smallest ``N`` with training failure probability at most ``γ``."""
    if not 0.0 <= reduction < 1.0:
        raise ValueError("reduction must lie in [0, 1)")
    if not 0.0 < failure_tolerance < 1.0:
        raise ValueError("failure_tolerance must lie in (0, 1)")
    _positive("pilot_power", pilot_power)
    _positive("state_power", state_power)
    target = 1.0 - failure_tolerance

    def ok(n: int) -> bool:
        return training_success_probability(n, reduction, pilot_power, state_power) >= target

    if ok(1):
        return 1
    lo, hi = 1, 2
    while not ok(hi):
        lo, hi = hi, 2 * hi
        if lo >= max_length:
            raise UnsatisfiableError(f"no training length <= {max_length} meets the tolerance")
    hi = min(hi, max_length)
    if not ok(hi):
        raise UnsatisfiableError(f"no training length <= {max_length} meets the tolerance")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def achievable_delta(length: int, failure_tolerance: float, pilot_power: float,
                     state_power: float, tol: float = 1e-9) -> float:
    """
    Smallest reduction ``Δ`` for which ``length`` pilots meet the tolerance.

    Giving up more pilot power (larger ``Δ``) lowers the target amplitude
    and so makes cancellation easier, but worsens the estimate. The best
    usable ``Δ`` is therefore the smallest feasible one. Returns ``nan``
    when even ``Δ -> 1`` fails.
    """
    target = 1.0 - failure_tolerance

    def ok(delta: float) -> bool:
        return training_success_probability(length, delta, pilot_power, state_power) >= target

    if ok(0.0):
        return 0.0
    if not ok(1.0):
        return math.nan
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    # hi may have stayed at 1.0 if the feasible set is a sliver near 1
    return min(hi, math.nextafter(1.0, 0.0))


def eta_for_length(length: int, failure_tolerance: float, pilot_power: float,
                   state_power: float) -> float:
    """
    Best noise reduction factor reachable with ``length`` pilots.

    Infeasible lengths return ``inf``, the ``Δ -> 1`` limit of ``1/(N(1-Δ))``.
    """
    delta = achievable_delta(length, failure_tolerance, pilot_power, state_power)
    if math.isnan(delta):
        return math.inf
    return noise_reduction_factor(length, delta)


def training_length_for_eta(eta: float, failure_tolerance: float, pilot_power: float,
                            state_power: float,
                            max_length: int = MAX_TRAINING_LENGTH) -> tuple[int, float]:
    """
    Shortest training reaching noise reduction ``eta`` in the state scenario.

    Returns ``(N, Δ)`` with ``Δ`` the smallest feasible reduction at ``N``.
    """
    _positive("eta", eta)

    def ok(n: int) -> bool:
        value = eta_for_length(n, failure_tolerance, pilot_power, state_power)
        return value <= eta

    unreachable = UnsatisfiableError(f"eta={eta} not reachable with N <= {max_length}")
    # eta >= 1/N for every reduction
    if eta * max_length < 1.0:
        raise unreachable
    lo, hi = 0, 1
    while not ok(hi):
        lo, hi = hi, 2 * hi
        if lo >= max_length:
            raise unreachable
    hi = min(hi, max_length)
    if not ok(hi):
        raise unreachable
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi, achievable_delta(hi, failure_tolerance, pilot_power, state_power)


def posterior_params(ch: ChannelParams, q: EstimationQuality) -> tuple[float, float]:
    """``H | Ĥ ~ CN(δ Ĥ, δ σ_E²)``; returns ``(δ, δ σ_E²)``."""
    delta = ch.fading_var / (ch.fading_var + q.error_var)
    return delta, delta * q.error_var


def ml_estimate(pilots, observations):
    """
    Least-squares channel estimate ``Σ conj(x) y / Σ |x|²``.

    Works on the last axis, so a batch of training blocks can be passed as
    a 2-D array.
    """
    x = np.asarray(pilots, dtype=np.complex128)
    y = np.asarray(observations, dtype=np.complex128)
    if x.shape[-1:] != y.shape[-1:] or x.shape[-1] < 1:
        raise ValueError("pilots and observations must have the same non-zero length")
    energy = np.sum(np.abs(x) ** 2, axis=-1)
    if np.any(energy == 0.0):
        raise DegenerateError("all-zero pilot sequence")
    est = np.sum(np.conj(x) * y, axis=-1) / energy
    return complex(est) if np.ndim(est) == 0 else est


def mean_estimate(observations, reduction: float, pilot_power: float):
    """Sample mean of the observations divided by the target amplitude ``sqrt((1-Δ)P_T)``."""
    if reduction >= 1.0:
        raise DegenerateError("no pilot power left (Delta = 1)")
    y = np.asarray(observations, dtype=np.complex128)
    est = np.mean(y, axis=-1) / math.sqrt((1.0 - reduction) * pilot_power)
    return complex(est) if np.ndim(est) == 0 else est
