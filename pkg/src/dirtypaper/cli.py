"""
Command line front end.

Subcommands write CSV (one header row, lowercase snake_case columns,
floats in shortest round-trip form) to ``--out`` or stdout:

    fig1             noise reduction factor vs training length
    fig2             optimal and mean inflation factor vs SNR
    fig3             ergodic rates vs SNR for several training lengths
    fig4             ergodic rates vs SNR for several state powers
    validate         closed forms vs Monte Carlo, non-zero exit on failure
    training-design  training length / reduction for a target
    rates            every rate quantity at one operating point

Exit codes: 0 ok, 1 usage error, 2 validation failure, 3 non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import enum
import io
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import rates, simulate
from .errors import ConvergenceError, UnsatisfiableError
from .estimation import (
    ChannelParams,
    TrainingConfig,
    eta_for_length,
    ml_estimation_quality,
    noise_reduction_factor,
    required_training_length,
    training_length_for_eta,
)
from .validation import format_report, run_validation

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3


class Axis(enum.Enum):
    SNR_DB = "snr_db"
    TRAIN_LEN = "train_len"
    Q_OVER_P_DB = "q_over_p_db"
    ALPHA = "alpha"
    N = "n"


class Scale(enum.Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class SweepSpec:
    axis: Axis
    start: float
    stop: float
    points: int
    scale: Scale = Scale.LINEAR

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError("sweep start must be below stop")
        if self.points < 2:
            raise ValueError("a sweep needs at least 2 points")
        if self.scale is Scale.LOG and self.start <= 0:
            raise ValueError("log sweep needs a positive start")

    def values(self) -> np.ndarray:
        if self.scale is Scale.LOG:
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


def preferred_lengths(start: int, stop: int) -> list[int]:
    """Round training lengths (1, 1.2, 1.5, 2, 2.5, 3, 4, 5, 6, 7, 8, 9 per decade)."""
    mantissas = (1.0, 1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0)
    out = set()
    decade = 1
    while decade <= stop:
        for m in mantissas:
            n = int(round(m * decade))
            if start <= n <= stop:
                out.add(n)
        decade *= 10
    return sorted(out)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _write_csv(header: list[str], rows: list[list], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _emit(buf.getvalue(), out)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _snr_sweep(args) -> np.ndarray:
    return SweepSpec(Axis.SNR_DB, args.snr_start, args.snr_stop, args.snr_points).values()


def _db_tag(x: float) -> str:
    return f"{x:g}".replace("-", "m").replace(".", "p")


def _operating_point(snr_db: float, q_over_p_db: float, length: int, pt_over_p_db: float):
    ch = ChannelParams.from_db(snr_db, q_over_p_db)
    tr = TrainingConfig(length, ch.input_power * 10.0 ** (pt_over_p_db / 10.0))
    return ch, tr, ml_estimation_quality(tr, ch)


def _mc_cfg(args, ch, tr, point: int) -> simulate.SimConfig:
    return simulate.SimConfig(args.trials, args.seed + point, ch, tr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_fig1(args) -> int:
    q_over_pt = 10.0 ** (args.q_over_pt_db / 10.0)
    if args.n_values:
        lengths = args.n_values
    else:
        if not 1 <= args.n_start < args.n_stop:
            raise ValueError("need 1 <= --n-start < --n-stop")
        lengths = preferred_lengths(args.n_start, args.n_stop)
    header = ["n"] + [f"eta_gamma_{g:g}" for g in args.gammas]
    rows = [[n] + [eta_for_length(n, g, 1.0, q_over_pt) for g in args.gammas] for n in lengths]
    _write_csv(header, rows, args.out)
    return 0


def cmd_fig2(args) -> int:
    header = ["snr_db"]
    for n in args.lengths:
        header += [f"alpha_star_n{n}", f"alpha_mean_n{n}"]
        if args.mc:
            header += [f"mc_alpha_mean_n{n}", f"mc_alpha_mean_se_n{n}"]
    rows = []
    for i, snr in enumerate(_snr_sweep(args)):
        row = [snr]
        for n in args.lengths:
            ch, tr, q = _operating_point(snr, args.q_over_p_db, n, args.pt_over_p_db)
            row += [rates.optimal_alpha(ch, q), rates.mean_alpha(ch, q)]
            if args.mc:
                est = simulate.mc_mean_alpha(_mc_cfg(args, ch, tr, i))
                row += [est.mean, est.std_error]
        rows.append(row)
    _write_csv(header, rows, args.out)
    return 0


def _rate_columns(ch, tr, q, args, point: int) -> dict[str, float]:
    a_opt = rates.optimal_alpha(ch, q)
    a_mean = rates.mean_alpha(ch, q)
    c_rx = rates.capacity_rx(np.array([a_opt, a_mean]), ch, q, args.quad_order, clamp=args.clamp)
    cols = {
        "c_txrx": rates.capacity_txrx(ch, q, args.quad_order),
        "c_rx_opt": float(c_rx[0]),
        "c_rx_mean": float(c_rx[1]),
    }
    if args.mc:
        cfg = _mc_cfg(args, ch, tr, point)
        est = simulate.mc_rate(a_opt, cfg, clamp=args.clamp)
        cols["mc_c_rx_opt"], cols["mc_c_rx_opt_se"] = est.mean, est.std_error
        est = simulate.mc_capacity_txrx(cfg)
        cols["mc_c_txrx"], cols["mc_c_txrx_se"] = est.mean, est.std_error
    return cols


def cmd_fig3(args) -> int:
    header = ["snr_db", "perfect_csi"]
    rows = []
    for i, snr in enumerate(_snr_sweep(args)):
        row = [snr, None]
        for n in args.lengths:
            ch, tr, q = _operating_point(snr, args.q_over_p_db, n, args.pt_over_p_db)
            row[1] = rates.perfect_csi_capacity(ch, args.quad_order)
            cols = _rate_columns(ch, tr, q, args, i)
            if i == 0:
                header += [f"{k}_n{n}" for k in cols]
            row += list(cols.values())
        rows.append(row)
    _write_csv(header, rows, args.out)
    return 0


def cmd_fig4(args) -> int:
    header = ["snr_db"]
    rows = []
    for i, snr in enumerate(_snr_sweep(args)):
        row = [snr]
        for qdb in args.q_over_p_dbs:
            ch, tr, q = _operating_point(snr, qdb, args.length, args.pt_over_p_db)
            cols = _rate_columns(ch, tr, q, args, i)
            del cols["c_rx_mean"]
            ordered = {"c_rx_opt": cols.pop("c_rx_opt"), "c_txrx": cols.pop("c_txrx"),
                       "perfect_csi": rates.perfect_csi_capacity(ch, args.quad_order)}
            ordered.update(cols)
            if i == 0:
                header += [f"{k}_q{_db_tag(qdb)}" for k in ordered]
            row += list(ordered.values())
        rows.append(row)
    _write_csv(header, rows, args.out)
    return 0


def cmd_validate(args) -> int:
    checks = run_validation(trials=args.trials, seed=args.seed,
                            perturb_shrinkage=args.perturb_shrinkage,
                            quad_order=args.quad_order)
    _emit(format_report(checks), args.out)
    return 0 if all(c.passed for c in checks) else EXIT_VALIDATION


def cmd_training_design(args) -> int:
    q_over_pt = 10.0 ** (args.q_over_pt_db / 10.0)
    state_power = args.pilot_power * q_over_pt
    if args.delta is not None:
        delta = args.delta
        n_star = required_training_length(delta, args.gamma, args.pilot_power, state_power)
    else:
        n_star, delta = training_length_for_eta(args.eta, args.gamma, args.pilot_power,
                                                state_power)
    eta = noise_reduction_factor(n_star, delta)
    sigma_e2 = args.noise_var / (n_star * args.pilot_power)
    header = ["n_star", "delta", "eta", "sigma_e2", "sigma_e2_tilde", "n_pilot_only"]
    # pilot-only training reaches the same eta with N = 1/eta
    target = eta if args.delta is not None else args.eta
    row = [n_star, delta, eta, sigma_e2, sigma_e2 / (1.0 - delta), math.ceil(1.0 / target - 1e-9)]
    _write_csv(header, [row], args.out)
    return 0


def cmd_rates(args) -> int:
    ch, tr, q = _operating_point(args.snr_db, args.q_over_p_db, args.length, args.pt_over_p_db)
    cols = {
        "snr_db": args.snr_db,
        "error_var": q.error_var,
        "shrinkage": q.shrinkage,
        "rho": rates.rho_parameter(ch, q),
        "alpha_star": rates.optimal_alpha(ch, q),
        "alpha_mean": rates.mean_alpha(ch, q),
    }
    cols.update(_rate_columns(ch, tr, q, args, 0))
    cols["perfect_csi"] = rates.perfect_csi_capacity(ch, args.quad_order)
    if args.alpha is not None:
        cols["c_rx_alpha"] = rates.capacity_rx(args.alpha, ch, q, args.quad_order,
                                               clamp=args.clamp)
    _write_csv(list(cols), [list(cols.values())], args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("expected positive integers")
    return values


def _common(p: argparse.ArgumentParser, mc: bool = True) -> None:
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--quad-order", type=int, default=64)
    p.add_argument("--seed", type=int, default=20070101)
    p.add_argument("--trials", type=int, default=10**5)
    if mc:
        p.add_argument("--mc", action="store_true", help="add Monte Carlo overlay columns")


def _snr_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--snr-start", type=float, default=-5.0)
    p.add_argument("--snr-stop", type=float, default=40.0)
    p.add_argument("--snr-points", type=int, default=91)
    p.add_argument("--pt-over-p-db", type=float, default=0.0,
                   help="training power relative to the input power")
    p.add_argument("--clamp", action="store_true",
                   help="average max(rate, 0) instead of the literal rate")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dirtypaper", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fig1", help="noise reduction factor vs training length")
    _common(p, mc=False)
    p.add_argument("--gammas", type=_float_list, default=[1e-1, 1e-2, 1e-3])
    p.add_argument("--q-over-pt-db", type=float, default=20.0)
    p.add_argument("--n-start", type=int, default=10)
    p.add_argument("--n-stop", type=int, default=10_000)
    p.add_argument("--n-values", type=_int_list, help="explicit comma-separated lengths")
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("fig2", help="optimal and mean alpha vs SNR")
    _common(p)
    _snr_args(p)
    p.add_argument("--lengths", type=_int_list, default=[1, 10, 20])
    p.add_argument("--q-over-p-db", type=float, default=20.0)
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("fig3", help="rates vs SNR for several training lengths")
    _common(p)
    _snr_args(p)
    p.add_argument("--lengths", type=_int_list, default=[1, 10, 20])
    p.add_argument("--q-over-p-db", type=float, default=20.0)
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("fig4", help="rates vs SNR for several state powers")
    _common(p)
    _snr_args(p)
    p.add_argument("--q-over-p-dbs", type=_float_list, default=[20.0, 30.0, 40.0])
    p.add_argument("--length", type=int, default=10)
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("validate", help="closed forms vs Monte Carlo")
    _common(p, mc=False)
    p.set_defaults(trials=10**6)
    p.add_argument("--perturb-shrinkage", type=float, default=0.0,
                   help="relative error injected into delta (sensitivity check)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("training-design", help="training length for a target")
    p.add_argument("--out")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--eta", type=float, default=0.1)
    target.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float, default=1e-2)
    p.add_argument("--pilot-power", type=float, default=1.0)
    p.add_argument("--q-over-pt-db", type=float, default=20.0)
    p.add_argument("--noise-var", type=float, default=1.0)
    p.set_defaults(func=cmd_training_design)

    p = sub.add_parser("rates", help="all rate quantities at one point")
    _common(p)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--q-over-p-db", type=float, default=20.0)
    p.add_argument("--length", type=int, default=10)
    p.add_argument("--pt-over-p-db", type=float, default=0.0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--clamp", action="store_true")
    p.set_defaults(func=cmd_rates)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"dirtypaper: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, UnsatisfiableError) as exc:
        print(f"dirtypaper: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
