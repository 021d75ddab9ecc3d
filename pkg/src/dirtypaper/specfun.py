"""
Special functions and expectation quadrature.

Everything the closed-form rate expressions need:

    E1(z)        = ∫_z^∞ e^{-t}/t dt
    e^z E1(z)    (scaled form, finite for every z > 0)
    F(x; 2, λ)   non-central chi-square CDF with two degrees of freedom
    E[f(T)]      for T ~ Exp(1)

E1 uses the classic three-regime split: power series below 1, a modified
Lentz continued fraction on [1, 700] and the divergent asymptotic series
above 700 (scaled form only, so nothing overflows).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import ive

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureRule",
    "quadrature_rule",
    "exp_integral_e1",
    "exp_scaled_e1",
    "noncentral_chi2_cdf",
    "expect_exponential",
]

_SERIES_TERMS = 30
_CF_MAX_ITER = 500
_CF_EPS = 1e-16
_ASYMPTOTIC_SWITCH = 700.0
_TINY = 1e-300


def _as_positive_array(z) -> np.ndarray:
    arr = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("argument must be finite and > 0")
    return arr


def _e1_series(z: np.ndarray) -> np.ndarray:
    # -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k / (k k!)
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, _SERIES_TERMS + 1):
        term = -term * z / k
        total -= term / k
    return -np.euler_gamma - np.log(z) + total


def _scaled_e1_cf(z: np.ndarray) -> np.ndarray:
    """e^z E1(z) by the modified Lentz continued fraction (valid for z >= 1)."""
    b = z + 1.0
    c = np.full_like(z, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(z.shape, dtype=bool)
    for i in range(1, _CF_MAX_ITER + 1):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _CF_EPS
        if not active.any():
            return h
    raise ConvergenceError("E1 continued fraction did not converge")


def _scaled_e1_asymptotic(z: np.ndarray) -> np.ndarray:
    # (1/z) sum_k (-1)^k k! / z^k; for z > 700 twelve terms are far below eps
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, 12):
        term = -term * k / z
        total += term
    return total / z


def exp_scaled_e1(z):
    """
    Return ``exp(z) * E1(z)`` without intermediate overflow.

    Accepts a scalar or an array; returns the same shape (a Python float
    for scalar input). Satisfies ``1/(z+1) < exp_scaled_e1(z) < 1/z``.
    """
    arr = _as_positive_array(z)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)

    small = flat < 1.0
    big = flat > _ASYMPTOTIC_SWITCH
    mid = ~(small | big)
    if small.any():
        zs = flat[small]
        out[small] = np.exp(zs) * _e1_series(zs)
    if mid.any():
        out[mid] = _scaled_e1_cf(flat[mid])
    if big.any():
        out[big] = _scaled_e1_asymptotic(flat[big])

    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def exp_integral_e1(z):
    """
    Exponential integral ``E1(z)`` for real ``z > 0``.

    Underflows to 0 beyond z ~ 745; use :func:`exp_scaled_e1` when the
    product ``e^z E1(z)`` is what is actually needed.
    """
    arr = _as_positive_array(z)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat < 1.0
    if small.any():
        out[small] = _e1_series(flat[small])
    if (~small).any():
        zl = flat[~small]
        with np.errstate(under="ignore"):
            out[~small] = np.exp(-zl) * exp_scaled_e1(zl)
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# non-central chi-square, 2 degrees of freedom


def _bessel_series(ratio: float, a: float, b: float, start: int, tol: float) -> float:
    """
    ``exp(-(a²+b²)/2) * sum_{k>=start} ratio^k I_k(ab)`` with ``0 < ratio <= 1``.

    Terms are formed in log space from the exponentially scaled Bessel
    function, so large ``ab`` never overflows.
    """
    z = a * b
    log_pref = -0.5 * (a - b) ** 2
    log_ratio = math.log(ratio)
    total = 0.0
    prev = math.nan
    k0 = start
    chunk = 256
    # Terms are non-increasing in k and, since I_k is log-concave in k, so
    # are their ratios: once q < 1 the tail is below term * q / (1 - q).
    while k0 < 10_000_000:
        ks = np.arange(k0, k0 + chunk, dtype=np.float64)
        with np.errstate(divide="ignore"):
            terms = np.exp(log_pref + ks * log_ratio + np.log(ive(ks, z)))
        cum = total + np.cumsum(terms)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = terms / np.concatenate(([prev], terms[:-1]))
            done = (terms == 0.0) | ((q < 1.0) & (terms * q / (1.0 - q) <= tol * cum))
        hit = np.flatnonzero(done)
        if hit.size:
            return float(cum[hit[0]])
        total = float(cum[-1])
        prev = float(terms[-1])
        k0 += chunk
    raise ConvergenceError("Marcum Q series did not converge")


def noncentral_chi2_cdf(x: float, noncentrality: float, tol: float = 1e-14) -> float:
    """
    CDF of a non-central chi-square variable with 2 degrees of freedom.

    Computed as ``1 - Q1(sqrt(λ), sqrt(x))`` with the first-order Marcum Q
    function. The Bessel series is summed on whichever side avoids
    cancellation: for ``x < λ`` the CDF itself is a positive series.
    """
    if not (math.isfinite(x) and math.isfinite(noncentrality)):
        raise DomainError("arguments must be finite")
    if x < 0.0 or noncentrality < 0.0:
        raise DomainError("arguments must be non-negative")
    if x == 0.0:
        return 0.0
    if noncentrality == 0.0:
        return -math.expm1(-0.5 * x)
    a = math.sqrt(noncentrality)
    b = math.sqrt(x)
    if b < a:
        value = _bessel_series(b / a, a, b, start=1, tol=tol)
    else:
        value = 1.0 - _bessel_series(a / b, a, b, start=0, tol=tol)
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# expectations over the unit exponential


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights approximating ``∫_0^∞ f(t) e^{-t} dt ≈ Σ w_i f(t_i)``."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if self.order < 1:
            raise ValueError("order must be positive")
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    def __call__(self, f: Callable[[np.ndarray], np.ndarray]):
        values = np.asarray(f(self.nodes), dtype=np.float64)
        return np.tensordot(self.weights, values, axes=(0, 0))


def _gauss_laguerre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n <= 128:
        return np.polynomial.laguerre.laggauss(n)
    # numpy's recurrence overflows past ~180 nodes; Golub-Welsch does not,
    # though far-tail weights come out as zero and are dropped
    k = np.arange(n, dtype=np.float64)
    x, v = eigh_tridiagonal(2.0 * k + 1.0, k[1:])
    w = v[0] ** 2
    keep = w > 0.0
    return x[keep], w[keep]


@lru_cache(maxsize=16)
def quadrature_rule(order: int = 64) -> QuadratureRule:
    """
    Composite rule for expectations under Exp(1).

    ``[0, 1]`` is covered by Gauss–Legendre panels that shrink geometrically
    (ratio 4) towards the origin down to 1e-16; ``[1, ∞)`` by ``order``-point
    Gauss–Laguerre after the shift ``t = 1 + s``. The graded panels resolve
    integrands such as ``log(1 + t/ρ)`` or ``t/(t+ρ)`` whose nearest
    singularity sits at ``-ρ`` with ``ρ`` as small as 1e-12, where plain
    Gauss–Laguerre stalls at a few digits.
    """
    if order < 8:
        raise ValueError("order must be >= 8")
    panel_pts = max(8, order // 4)
    x, w = np.polynomial.legendre.leggauss(panel_pts)

    edges = [1.0]
    while edges[-1] > 1e-16:
        edges.append(edges[-1] / 4.0)
    edges.append(0.0)
    edges.reverse()

    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        t = half * x + 0.5 * (hi + lo)
        nodes.append(t)
        weights.append(half * w * np.exp(-t))
    s, ws = _gauss_laguerre(order)
    nodes.append(1.0 + s)
    weights.append(math.exp(-1.0) * ws)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), order)


def expect_exponential(
    f: Callable[[np.ndarray], np.ndarray],
    order: int = 64,
    rtol: float = 1e-9,
    check: bool = True,
):
    """
    ``E[f(T)]`` for ``T ~ Exp(1)``.

    ``f`` receives the node array and may return extra trailing axes (for
    instance one column per inflation parameter); those are kept. With
    ``check`` the rule of twice the order is evaluated too and a
    :class:`ConvergenceError` is raised if the two disagree by more than
    ``rtol`` (relative, with a 1e-14 absolute floor for results near 0).

    Callers rescale: for ``|Ĥ|²`` with mean ``m`` use ``f(m * t)``.
    """
    value = quadrature_rule(order)(f)
    if check:
        refined = quadrature_rule(2 * order)(f)
        gap = np.abs(value - refined)
        if np.any(~np.isfinite(refined)) or np.any(gap > rtol * np.abs(refined) + 1e-14):
            raise ConvergenceError(
                f"quadrature order {order} vs {2 * order} differ by {np.max(gap):.3e}"
            )
    return float(value) if np.ndim(value) == 0 else value
