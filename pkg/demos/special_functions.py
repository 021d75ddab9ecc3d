"""
Special functions behind the rate formulas
==========================================

The ergodic rates reduce to the exponential integral E1, training design
to a non-central chi-square CDF, and everything else to expectations over
a unit exponential. This script pokes at all three.
"""
import numpy as np

from dirtypaper.specfun import (
    exp_integral_e1,
    exp_scaled_e1,
    expect_exponential,
    noncentral_chi2_cdf,
    quadrature_rule,
)

# E1 sits between two elementary bounds. The scaled form e^z E1(z) keeps
# working long after E1 itself underflows.
for z in [1e-3, 0.1, 1.0, 10.0, 100.0]:
    lo = 0.5 * np.exp(-z) * np.log1p(2 / z)
    hi = np.exp(-z) * np.log1p(1 / z)
    print(f"z={z:<7g} {lo:.6e} < E1={exp_integral_e1(z):.6e} < {hi:.6e}")
print("e^z E1(z) at z=1e6:", exp_scaled_e1(1e6), " (about 1/z)")

# Non-central chi-square with two degrees of freedom. Lower-tail values are
# summed directly, so tiny probabilities keep their relative accuracy.
print()
for x, lam in [(10.0, 5.0), (0.01, 80.0), (200.0, 100.0)]:
    print(f"F({x}; lambda={lam}) = {noncentral_chi2_cdf(x, lam):.6e}")

# The quadrature rule: graded panels near zero plus shifted Gauss-Laguerre.
# log2(1 + t/rho) with a small rho is the hard case for plain Laguerre.
rule = quadrature_rule(64)
print(f"\n{rule.nodes.size} nodes, weights sum to {rule.weights.sum():.15f}")
for rho in [1e-4, 1e-2, 1.0]:
    closed = np.exp(rho) * exp_integral_e1(rho) / np.log(2)
    quad = expect_exponential(lambda t: np.log2(1 + t / rho))
    x, w = np.polynomial.laguerre.laggauss(64)
    plain = np.sum(w * np.log2(1 + x / rho))
    print(f"rho={rho:<6g} closed {closed:.12f}  hybrid err {abs(quad - closed):.1e}"
          f"  plain Laguerre err {abs(plain - closed):.1e}")
