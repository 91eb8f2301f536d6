"""Command-line surface: simulate / sweep / analyze / selftest.

Exit codes: 0 success, 2 usage error, 3 numerical self-test failure.
"""

import argparse
import json
import os
import sys

from .harness import (
    SimConfig,
    UsageError,
    analyze_points,
    record_to_dict,
    run_sweep,
    selftest,
    write_csv,
)


def _parse_float_list(text: str):
    """Accept a single value, a comma list, or start:step:stop (inclusive)."""
    if ":" in text:
        start, step, stop = (float(p) for p in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(round(v, 12))
            v += step
        return tuple(out)
    return tuple(float(p) for p in text.split(","))


def _parse_int_list(text: str):
    return tuple(int(p) for p in text.split(","))


def _add_point_args(sp):
    sp.add_argument("--method", choices=["dif", "ekf"], default="dif")
    sp.add_argument("--osc", choices=["clo", "slo"], default="slo")
    sp.add_argument("--antennas", type=_parse_int_list, default=(10,),
                    help="antenna count(s), comma separated")
    sp.add_argument("--snr-db", type=_parse_float_list, default=(40.0,),
                    help="SNR per symbol in dB: value, comma list, or start:step:stop")
    sp.add_argument("--var-tx", type=_parse_float_list, default=(0.01,),
                    help="transmitter innovation variance(s) [rad^2]")
    sp.add_argument("--var-rx", type=_parse_float_list, default=(0.01,),
                    help="receiver innovation variance(s) [rad^2]")
    sp.add_argument("--qam", type=int, choices=[4, 16, 64], default=16)
    sp.add_argument("--symbols", type=int, default=10_000,
                    help="symbols per trial")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--pilot-period", type=int, default=None,
                    help="pilot spacing (EKF only; 50 gives 2%% density)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--hold-receive-snr", action=argparse.BooleanOptionalAction,
                    default=True,
                    help="scale transmit power down by M to keep receive SNR fixed")
    sp.add_argument("--out", default=None, help="output path (default: stdout)")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--workers", type=int, default=None,
                    help="parallel worker processes (default: all cores)")


def _config_from_args(args) -> SimConfig:
    return SimConfig(
        method=args.method,
        osc_mode=args.osc,
        m_antennas=args.antennas,
        snr_db=args.snr_db,
        var_tx=args.var_tx,
        var_rx=args.var_rx,
        qam_order=args.qam,
        symbols_per_trial=args.symbols,
        trials=args.trials,
        pilot_period=args.pilot_period,
        master_seed=args.seed,
        hold_receive_snr=args.hold_receive_snr,
    )


def _emit(records, args) -> None:
    if args.format == "json":
        text = json.dumps([record_to_dict(r) for r in records], indent=2) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        if args.out:
            with open(args.out, "w") as fh:
                write_csv(records, fh)
        else:
            write_csv(records, sys.stdout)


def _maybe_plot(records, args) -> None:
    if not getattr(args, "plot", False):
        return
    from .plotting import save_figures

    stem = os.path.splitext(args.out)[0] if args.out else "simodiff"
    for path in save_figures(records, stem):
        print(f"wrote {path}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="simodiff",
        description="SIMO phase-noise link simulator: differential two-stage "
        "detection, EKF baseline, and closed-form SEP analysis.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="Monte Carlo at a single grid point")
    _add_point_args(sp)

    sp = sub.add_parser("sweep", help="Monte Carlo over parameter grids")
    _add_point_args(sp)
    sp.add_argument("--plot", action="store_true",
                    help="also render figure(s) next to the output file")

    sp = sub.add_parser("analyze", help="closed-form union bound and floors only")
    _add_point_args(sp)
    sp.add_argument("--plot", action="store_true",
                    help="also render figure(s) next to the output file")

    sp = sub.add_parser("selftest", help="run the numerical oracle calibrations")
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=12345)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            results = selftest(n_samples=args.samples, seed=args.seed)
            failed = False
            for r in results:
                status = "PASS" if r.passed else "FAIL"
                print(f"[{status}] {r.name}: {r.detail}")
                failed |= not r.passed
            return 3 if failed else 0

        config = _config_from_args(args)
        if args.command == "simulate":
            n_points = (
                len(config.snr_db) * len(config.m_antennas)
                * len(config.var_tx) * len(config.var_rx)
            )
            if n_points != 1:
                raise UsageError("simulate takes exactly one grid point; use sweep")
            records = run_sweep(config, workers=args.workers)
        elif args.command == "sweep":
            records = run_sweep(config, workers=args.workers)
        else:  # analyze
            records = analyze_points(config, fading_draws=config.trials)
        _emit(records, args)
        _maybe_plot(records, args)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
