"""
What imperfect channel knowledge costs
======================================

Where do the rate curves reach 2 bits per channel use? Compare perfect
channel knowledge with ML estimates from 1, 10 and 20 pilots, and the
receiver-only policy with the one where the transmitter also sees the
estimate. Interference is 20 dB above the input power throughout.
"""
from scipy.optimize import brentq

from dirtypaper import rates
from dirtypaper.estimation import ChannelParams, TrainingConfig, ml_estimation_quality


def at(snr_db, n):
    ch = ChannelParams.from_db(snr_db, 20.0)
    return ch, ml_estimation_quality(TrainingConfig(n, ch.input_power), ch)


def rx_opt(snr_db, n):
    ch, q = at(snr_db, n)
    return rates.capacity_rx(rates.optimal_alpha(ch, q), ch, q)


def txrx(snr_db, n):
    return rates.capacity_txrx(*at(snr_db, n))


def perfect(snr_db):
    return rates.perfect_csi_capacity(ChannelParams.from_db(snr_db, 20.0))


def snr_at(curve, level=2.0):
    return brentq(lambda s: curve(s) - level, -10.0, 60.0, xtol=1e-6)


base = snr_at(perfect)
print(f"perfect channel knowledge reaches 2 bits at {base:.2f} dB")
for n in [1, 10, 20]:
    s_rx = snr_at(lambda s: rx_opt(s, n))
    s_tx = snr_at(lambda s: txrx(s, n))
    print(f"N={n:2d}: receiver-only {s_rx:6.2f} dB (gap {s_rx - base:5.2f}),"
          f" transmitter-aware {s_tx:6.2f} dB (gains {s_rx - s_tx:4.2f} dB)")

# The same numbers as a sweep, straight from the command line:
#   dirtypaper fig3 --snr-start 0 --snr-stop 30 --snr-points 31
