"""
How long must the training sequence be?
=======================================

With pilots only, the ML estimate has error variance sigma_Z^2 / (N P_T):
ten pilots give a tenfold noise reduction. When a known-to-the-transmitter
interference of power Q rides along with the pilots, the transmitter can
cancel its average, but only if the cancelling pilot fits the power budget.
Keeping a fraction Delta of the pilot amplitude in reserve makes that
easier, at the price of a weaker estimate. This script finds the trade-off.
"""
import numpy as np

from dirtypaper.estimation import (
    ChannelParams,
    Scenario,
    TrainingConfig,
    achievable_delta,
    eta_for_length,
    scenario2_estimation_quality,
    training_length_for_eta,
    training_success_probability,
)
from dirtypaper.simulate import SimConfig, simulate_training

pilot_power, state_power = 1.0, 100.0   # Q / P_T = 20 dB

# Noise reduction eta = 1 / (N (1 - Delta)) against N, for a few failure
# tolerances. inf marks lengths where no reserve makes training reliable.
print("     N   gamma=0.1  gamma=0.01  gamma=0.001")
for n in [100, 200, 300, 500, 1000, 3000, 10_000]:
    etas = [eta_for_length(n, g, pilot_power, state_power) for g in (0.1, 0.01, 0.001)]
    print(f"{n:6d}  " + "  ".join(f"{e:10.4g}" for e in etas))

# Shortest training reaching eta = 0.1 at a 1% failure rate.
n_star, delta = training_length_for_eta(0.1, 1e-2, pilot_power, state_power)
print(f"\nN* = {n_star}, Delta = {delta:.5f}; pilots alone would need N = 10")
print("P(success) at N*:", training_success_probability(n_star, delta, pilot_power, state_power))

# Check by simulating whole training blocks.
ch = ChannelParams(state_power=state_power)
tr = TrainingConfig(n_star, pilot_power, delta, 1e-2, Scenario.PILOT_PLUS_STATE)
res = simulate_training(SimConfig(50_000, 1, ch, tr, workers=4))
q = scenario2_estimation_quality(tr, ch)
print(f"failure rate {res.failure_rate:.4f} +- {res.failure_std:.4f}")
print(f"error variance {res.error_var.mean:.5f} +- {res.error_var.std_error:.5f}"
      f" (closed form {q.error_var:.5f})")

# Larger Delta only gets easier to satisfy; the smallest feasible one wins.
print("\nDelta at N=1000 for gamma=0.01:", achievable_delta(1000, 1e-2, pilot_power, state_power))
