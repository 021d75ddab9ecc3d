"""
Choosing the DPC inflation factor without knowing the channel
=============================================================

If the transmitter knew the channel estimate it would pick
alpha*(H) = P/(P+N) per realisation. It does not, so it needs one fixed
alpha. Two candidates: the one that maximises the ergodic rate, and the
plain average of the per-estimate optimum, which has a closed form.
"""
import numpy as np

from dirtypaper import rates
from dirtypaper.estimation import ChannelParams, TrainingConfig, ml_estimation_quality

print("snr_db   N   alpha_opt  alpha_mean   rate_opt  rate_mean  rate_0")
for snr_db in [0, 10, 15, 20, 30]:
    for n in [1, 10, 20]:
        ch = ChannelParams.from_db(snr_db, 20.0)
        q = ml_estimation_quality(TrainingConfig(n, ch.input_power), ch)
        a_opt, a_mean = rates.optimal_alpha(ch, q), rates.mean_alpha(ch, q)
        c = rates.capacity_rx(np.array([a_opt, a_mean, 0.0]), ch, q)
        print(f"{snr_db:6d} {n:3d}   {a_opt:9.4f}  {a_mean:9.4f}   "
              f"{c[0]:8.4f}  {c[1]:8.4f}  {c[2]:7.4f}")

# The mean alpha is close to the optimum over most of the range, but it is
# not always better than alpha = 0. With strong interference and a poor
# channel, averaging the per-estimate optimum overshoots and the literal
# rate expression goes negative.
ch = ChannelParams.from_db(6.25, 30.0)
q = ml_estimation_quality(TrainingConfig(10, ch.input_power), ch)
a_mean = rates.mean_alpha(ch, q)
print(f"\nQ/P = 30 dB, SNR 6.25 dB: rate(alpha_mean={a_mean:.3f}) = "
      f"{rates.capacity_rx(a_mean, ch, q):.4f}, rate(0) = {rates.capacity_rx(0.0, ch, q):.4f}")
print("clamped at zero per estimate:", rates.capacity_rx(a_mean, ch, q, clamp=True))
