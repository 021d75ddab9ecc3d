"""
Achievable rates of dirty-paper coding with an estimated fading gain.

Given ``|Ĥ|²`` the receiver sees a composite Gaussian channel with
effective powers

    ℙ = δ²|Ĥ|² P̄,   ℚ = δ²|Ĥ|² Q,   ℕ = σ_Z² + δ σ_E² (P̄ + Q)

and ``U = X + αS`` achieves

    R(α) = log2( ℙ(ℙ+ℚ+ℕ) / (ℙℚ(1-α)² + ℕ(ℙ+α²ℚ)) )

per estimate. Ergodic rates average over ``|Ĥ|² ~ Exp(σ_h² + σ_E²)``.
Everything accepts numpy arrays for the estimate magnitude (and for ``α``
where noted) so expectations are a single quadrature call.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError
from .estimation import ChannelParams, EstimationQuality
from .specfun import exp_scaled_e1, expect_exponential

__all__ = [
    "AlphaOrigin",
    "DpcPolicy",
    "CompositeTriple",
    "composite_triple",
    "effective_noise",
    "rho_parameter",
    "alpha_star_conditional",
    "mutual_info_uy",
    "mutual_info_us",
    "rate_conditional",
    "capacity_txrx",
    "capacity_txrx_closed_form",
    "capacity_rx",
    "mean_alpha",
    "optimal_alpha_objective",
    "optimal_alpha",
    "perfect_csi_capacity",
    "perfect_csi_capacity_closed_form",
    "golden_section_minimize",
]

LOG2E = 1.0 / math.log(2.0)
ALPHA_GRID_POINTS = 1001
ALPHA_MAX = 1.0 - 1e-6


class AlphaOrigin(enum.Enum):
    CONDITIONAL = "conditional"
    MEAN_ALPHA = "mean_alpha"
    OPTIMAL_ALPHA = "optimal_alpha"
    MANUAL = "manual"


@dataclass(frozen=True)
class DpcPolicy:
    alpha: float
    origin: AlphaOrigin = AlphaOrigin.MANUAL

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


@dataclass(frozen=True)
class CompositeTriple:
    """Effective signal, state and noise powers; fields may be arrays."""

    effP: float
    effQ: float
    effN: float


def effective_noise(ch: ChannelParams, q: EstimationQuality) -> float:
    return ch.noise_var + q.shrinkage * q.error_var * (ch.input_power + ch.state_power)


def composite_triple(est_mag_sq, ch: ChannelParams, q: EstimationQuality) -> CompositeTriple:
    g = q.shrinkage ** 2 * np.asarray(est_mag_sq, dtype=np.float64)
    if np.any(g < 0.0):
        raise ValueError("|Ĥ|² must be >= 0")
    if g.ndim == 0:
        g = float(g)
    return CompositeTriple(g * ch.input_power, g * ch.state_power, effective_noise(ch, q))


def rho_parameter(ch: ChannelParams, q: EstimationQuality) -> float:
    """``ρ = ℕ / (δ² P̄ (σ_h² + σ_E²))``, the inverse mean effective SNR."""
    return effective_noise(ch, q) / (
        q.shrinkage ** 2 * ch.input_power * (ch.fading_var + q.error_var))


def alpha_star_conditional(t: CompositeTriple):
    """Costa's inflation factor for the composite channel, ``ℙ/(ℙ+ℕ)``."""
    return t.effP / (t.effP + t.effN)


def _denominator(alpha, t: CompositeTriple):
    return t.effP * t.effQ * (1.0 - alpha) ** 2 + t.effN * (t.effP + alpha ** 2 * t.effQ)


def _check_alpha_p(alpha, t: CompositeTriple) -> None:
    if np.any((np.asarray(t.effP) == 0.0) & (np.asarray(alpha) == 0.0)):
        raise DegenerateError("rate undefined for zero signal power and alpha = 0")


def mutual_info_uy(alpha, t: CompositeTriple):
    _check_alpha_p(alpha, t)
    a2q = alpha ** 2 * t.effQ
    return np.log2((t.effP + t.effQ + t.effN) * (t.effP + a2q) / _denominator(alpha, t))


def mutual_info_us(alpha, t: CompositeTriple):
    if np.any(np.asarray(t.effP) == 0.0):
        raise DegenerateError("I(U;S) undefined for zero signal power")
    return np.log2((t.effP + alpha ** 2 * t.effQ) / t.effP)


def rate_conditional(alpha, t: CompositeTriple, clamp: bool = False):
    """
    DPC rate for one estimate, ``I(U;Y) - I(U;S)``.

    Can be negative for a poor ``α``; ``clamp=True`` reports ``max(R, 0)``.
    """
    _check_alpha_p(alpha, t)
    rate = np.log2(t.effP * (t.effP + t.effQ + t.effN) / _denominator(alpha, t))
    return np.maximum(rate, 0.0) if clamp else rate


def _estimate_power(ch: ChannelParams, q: EstimationQuality) -> float:
    # E|Ĥ|² ; |Ĥ|² is exponential with this mean
    return ch.fading_var + q.error_var


def capacity_txrx(ch: ChannelParams, q: EstimationQuality, quad_order: int = 64) -> float:
    """Ergodic rate when the transmitter also knows ``Ĥ``: ``E log2(1 + ℙ/ℕ)``."""
    m = _estimate_power(ch, q)

    def integrand(t):
        trip = composite_triple(m * t, ch, q)
        return np.log2(1.0 + trip.effP / trip.effN)

    return expect_exponential(integrand, quad_order)


def capacity_txrx_closed_form(ch: ChannelParams, q: EstimationQuality) -> float:
    return LOG2E * exp_scaled_e1(rho_parameter(ch, q))


def _clamp_threshold(alpha: np.ndarray, ch: ChannelParams, q: EstimationQuality,
                     m: float) -> np.ndarray:
    """
    Normalised ``t`` below which the per-estimate rate is negative.

    With ``ℙ = p t`` and ``ℚ = c t`` (``ℕ`` fixed) the rate is nonnegative
    exactly when ``t >= ℕ α² c / (p (p + c (1 - (1 - α)²)))``.
    """
    unit = composite_triple(m, ch, q)
    p, c, n = unit.effP, unit.effQ, unit.effN
    return n * alpha ** 2 * c / (p * (p + c * (1.0 - (1.0 - alpha) ** 2)))


def capacity_rx(alpha, ch: ChannelParams, q: EstimationQuality, quad_order: int = 64,
                clamp: bool = False):
    """
    Ergodic DPC rate with a fixed ``α`` (scalar or 1-D array).

    The expectation is of the literal per-estimate rate; ``clamp`` averages
    ``max(R, 0)`` instead. The clamped integrand has a kink at the sign
    change ``t0``, so it is integrated as ``e^{-t0} E[R(t0 + T)]`` (the
    exponential is memoryless), which keeps the integrand smooth.
    """
    alpha_arr = np.asarray(alpha, dtype=np.float64)
    if np.any((alpha_arr < 0.0) | (alpha_arr > 1.0)):
        raise ValueError("alpha must lie in [0, 1]")
    m = _estimate_power(ch, q)
    shift = _clamp_threshold(alpha_arr, ch, q, m) if clamp else np.zeros_like(alpha_arr)

    def integrand(t):
        tt = t[:, None] + shift if alpha_arr.ndim else t + shift
        rate = rate_conditional(alpha_arr, composite_triple(m * tt, ch, q))
        return np.maximum(rate, 0.0) if clamp else rate

    value = expect_exponential(integrand, quad_order)
    return value * np.exp(-shift) if clamp else value


def mean_alpha(ch: ChannelParams, q: EstimationQuality) -> float:
    """``E[α*(Ĥ)] = 1 - ρ e^ρ E1(ρ)``."""
    rho = rho_parameter(ch, q)
    return 1.0 - rho * exp_scaled_e1(rho)


def optimal_alpha_objective(alpha, ch: ChannelParams, q: EstimationQuality):
    """
    ``log2(P̄/Q + α²) + log2(e) e^z E1(z)``, ``z = ρ(P̄/Q + α²)/(1-α)²``.

    Minimizing this over ``α`` maximizes :func:`capacity_rx`. At ``α = 1``
    the limit ``log2(P̄/Q + 1)`` is returned.
    """
    a = np.asarray(alpha, dtype=np.float64)
    flat = np.atleast_1d(a)
    ratio = ch.input_power / ch.state_power
    base = ratio + flat ** 2
    out = np.log2(base)
    inner = flat < 1.0
    if inner.any():
        z = rho_parameter(ch, q) * base[inner] / (1.0 - flat[inner]) ** 2
        out[inner] += LOG2E * exp_scaled_e1(z)
    return float(out[0]) if a.ndim == 0 else out.reshape(a.shape)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f, lo: float, hi: float, tol: float = 1e-8,
                            max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search on ``[lo, hi]``; returns ``(argmin, min)``."""
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    x = 0.5 * (lo + hi)
    return x, f(x)


def optimal_alpha(ch: ChannelParams, q: EstimationQuality,
                  grid_points: int = ALPHA_GRID_POINTS, tol: float = 1e-8) -> float:
    """
    Transmitter-blind optimal inflation factor.

    A uniform grid on ``[0, 1-1e-6]`` locates the best cell; golden-section
    search then refines inside the two neighbouring cells. The analytic
    ``α = 1`` endpoint is compared last.
    """
    grid = np.linspace(0.0, ALPHA_MAX, grid_points)
    values = optimal_alpha_objective(grid, ch, q)
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    best, best_val = golden_section_minimize(
        lambda a: optimal_alpha_objective(a, ch, q), lo, hi, tol)
    if values[i] < best_val:
        best, best_val = float(grid[i]), float(values[i])
    if optimal_alpha_objective(1.0, ch, q) < best_val:
        # optimum squeezed against alpha = 1; the top grid point is within 1e-6
        return ALPHA_MAX
    return float(best)


def perfect_csi_capacity(ch: ChannelParams, quad_order: int = 64) -> float:
    """``E log2(1 + |H|² P̄/σ_Z²)`` with the channel known at both ends."""
    snr = ch.fading_var * ch.input_power / ch.noise_var
    return expect_exponential(lambda t: np.log2(1.0 + snr * t), quad_order)


def perfect_csi_capacity_closed_form(ch: ChannelParams) -> float:
    return LOG2E * exp_scaled_e1(ch.noise_var / (ch.input_power * ch.fading_var))
