"""Command-line surface: synth, estimate, acf, intraday, dynamics, discovery, run."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as bio
from .book import SIDES
from .convexity import summarize_log_convexity
from .errors import BookShapeError
from .pipeline import PreparedPanel, RunConfig, _stage, prepare_panel, run_pipeline
from .regression import ar1_kappa, dynamic_adjustment, price_discovery
from .stats import fit_long_memory, intraday_profile, panel_acf
from .synthetic import (
    ConstantProcess,
    LinearDriftProcess,
    LogAr1Process,
    SynthConfig,
    generate,
)

PROG = "bookshape"


def _add_panel_args(p: argparse.ArgumentParser, *, snapshots_required: bool = True) -> None:
    p.add_argument("--snapshots", required=snapshots_required, help="snapshot CSV to ingest")
    p.add_argument("--trades", default=None, help="optional trades CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--interval-seconds", type=int, default=300)
    p.add_argument("--spacing-seconds", type=int, default=10)
    p.add_argument("--n-intervals", type=int, default=48)
    p.add_argument("--min-snapshots", type=int, default=20)
    p.add_argument("--min-points", type=int, default=50)
    p.add_argument("--max-lag", type=int, default=40)
    p.add_argument("--min-pairs", type=int, default=5)
    p.add_argument("--ar1-min-pairs", type=int, default=100)
    p.add_argument("--lag-market-vars", action="store_true", help="lag r and g in the adjustment regression")
    p.add_argument("--include-degenerate", action="store_true", help="keep negative-exponent fits in interval records")
    p.add_argument("--min-days", type=int, default=0, help="drop stocks with fewer trading days (0 = keep all)")
    p.add_argument("--seed", type=int, default=None, help="generator seed (run --synth only)")


def _config_from_args(args: argparse.Namespace, snapshots: str | None = None, trades: str | None = None) -> RunConfig:
    return RunConfig(
        snapshots=snapshots if snapshots is not None else args.snapshots,
        out_dir=args.out,
        trades=trades if trades is not None else args.trades,
        interval_seconds=args.interval_seconds,
        spacing_seconds=args.spacing_seconds,
        n_intervals=args.n_intervals,
        min_snapshots=args.min_snapshots,
        min_points=args.min_points,
        max_lag=args.max_lag,
        min_pairs=args.min_pairs,
        ar1_min_pairs=args.ar1_min_pairs,
        lag_market_vars=args.lag_market_vars,
        include_degenerate=args.include_degenerate,
        min_days=args.min_days,
        seed=args.seed,
    )


def _add_synth_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stocks", type=int, default=1)
    p.add_argument("--days", type=int, default=1)
    p.add_argument("--n-intervals", type=int, default=48)
    p.add_argument("--interval-seconds", type=int, default=300)
    p.add_argument("--spacing-seconds", type=int, default=10)
    p.add_argument("--base-price", type=float, default=10.0)
    p.add_argument("--mid-sigma", type=float, default=0.0005)
    p.add_argument("--c-mean-bid", type=float, default=0.55)
    p.add_argument("--c-mean-ask", type=float, default=0.58)
    p.add_argument("--c-phi", type=float, default=0.5)
    p.add_argument("--c-sigma", type=float, default=0.15, help="0 freezes the exponent at its mean")
    p.add_argument("--c-drift", type=float, nargs=2, metavar=("START", "END"), default=None,
                   help="replace both exponent processes with a linear intraday drift")
    p.add_argument("--w-bid", type=float, default=2e-4)
    p.add_argument("--w-ask", type=float, default=2e-4)
    p.add_argument("--depth-total", type=float, default=2000.0)
    p.add_argument("--w-noise", type=float, default=0.0)
    p.add_argument("--tick", type=float, default=0.01, help="price grid; 0 writes exact prices")
    p.add_argument("--trade-intensity", type=float, default=6.0)
    p.add_argument("--trade-volume-mean", type=float, default=200.0)


def _synth_config(args: argparse.Namespace) -> SynthConfig:
    def c_process(mean: float):
        if args.c_drift is not None:
            return LinearDriftProcess(args.c_drift[0], args.c_drift[1])
        if args.c_sigma == 0:
            return ConstantProcess(mean)
        return LogAr1Process(mean, args.c_phi, args.c_sigma)

    return SynthConfig(
        seed=args.seed,
        n_stocks=args.stocks,
        n_days=args.days,
        n_intervals=args.n_intervals,
        interval_seconds=args.interval_seconds,
        spacing_seconds=args.spacing_seconds,
        base_price=args.base_price,
        mid_sigma=args.mid_sigma,
        bid_c=c_process(args.c_mean_bid),
        ask_c=c_process(args.c_mean_ask),
        bid_w=ConstantProcess(args.w_bid),
        ask_w=ConstantProcess(args.w_ask),
        depth_total=args.depth_total,
        w_noise=args.w_noise,
        tick=args.tick if args.tick else None,
        trade_intensity=args.trade_intensity,
        trade_volume_mean=args.trade_volume_mean,
    )


def _prepare(args: argparse.Namespace) -> tuple[RunConfig, PreparedPanel, Path]:
    config = _config_from_args(args)
    data = prepare_panel(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return config, data, out_dir


def _cmd_synth(args: argparse.Namespace) -> int:
    with _stage("synth"):
        counts = generate(_synth_config(args), args.out)
    print(f"wrote {counts['snapshots']} snapshots, {counts['trades']} trades, "
          f"{counts['truth']} truth rows to {args.out}")
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    _, data, out_dir = _prepare(args)
    with _stage("panel"):
        bio.write_rejects_csv(out_dir / "rejects.csv", data.rejected)
        bio.write_panel_csv(out_dir / "panel.csv", data.estimates)
        bio.write_failures_csv(out_dir / "failures.csv", data.failures)
    with _stage("summary"):
        bio.write_summary_csv(out_dir / "summary.csv", summarize_log_convexity(data.estimates))
    print(f"estimated {len(data.estimates)} window sides "
          f"({len(data.failures)} failures, {len(data.rejected)} rejected rows) -> {out_dir}")
    return 0


def _cmd_acf(args: argparse.Namespace) -> int:
    config, data, out_dir = _prepare(args)
    panel = data.panel
    with _stage("acf"):
        for side in SIDES:
            acf = panel_acf(panel.log_c(side), max_lag=config.max_lag, min_pairs=config.min_pairs)
            bio.write_acf_csv(out_dir / f"acf_logc_{side}.csv", acf)
            bio.write_long_memory_csv(out_dir / f"long_memory_{side}.csv", fit_long_memory(acf))
        for side in SIDES:
            acf = panel_acf(panel.kappa(side), max_lag=config.max_lag, min_pairs=config.min_pairs)
            bio.write_acf_csv(out_dir / f"acf_kappa_{side}.csv", acf)
    with _stage("ar1"):
        for side in SIDES:
            summary = ar1_kappa(panel, side, min_pairs=config.ar1_min_pairs)
            bio.write_regression_summary_csv(out_dir / f"ar1_kappa_{side}.csv", summary)
    print(f"wrote autocorrelation, long-memory, and fluctuation AR(1) reports -> {out_dir}")
    return 0


def _cmd_intraday(args: argparse.Namespace) -> int:
    _, data, out_dir = _prepare(args)
    with _stage("intraday"):
        for side in SIDES:
            profile = intraday_profile(data.panel.series(f"c_{side}"))
            bio.write_profile_csv(out_dir / f"intraday_{side}.csv", profile)
    print(f"wrote intraday profiles -> {out_dir}")
    return 0


def _cmd_dynamics(args: argparse.Namespace) -> int:
    config, data, out_dir = _prepare(args)
    with _stage("dynamics"):
        for side in SIDES:
            summary = dynamic_adjustment(data.panel, side, lag_market_vars=config.lag_market_vars)
            bio.write_regression_summary_csv(out_dir / f"dynamics_{side}.csv", summary)
    print(f"wrote dynamic-adjustment summaries -> {out_dir}")
    return 0


def _cmd_discovery(args: argparse.Namespace) -> int:
    if args.trades is None:
        print(f"{PROG}: discovery requires --trades", file=sys.stderr)
        return 2
    _, data, out_dir = _prepare(args)
    with _stage("discovery"):
        bio.write_regression_summary_csv(out_dir / "discovery.csv", price_discovery(data.panel))
    print(f"wrote price-discovery summary -> {out_dir}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    snapshots = args.snapshots
    trades = args.trades
    if args.synth:
        with _stage("synth"):
            synth = SynthConfig(
                seed=args.seed if args.seed is not None else 0,
                n_stocks=args.stocks,
                n_days=args.days,
                n_intervals=args.n_intervals,
                interval_seconds=args.interval_seconds,
                spacing_seconds=args.spacing_seconds,
            )
            in_dir = Path(args.out) / "input"
            generate(synth, in_dir)
            snapshots = str(in_dir / "snapshots.csv")
            trades = str(in_dir / "trades.csv")
    elif snapshots is None:
        print(f"{PROG}: run requires --snapshots (or --synth)", file=sys.stderr)
        return 2
    config = _config_from_args(args, snapshots=snapshots, trades=trades)
    result = run_pipeline(config)
    n_outputs = len(result.manifest["outputs"])
    print(f"run complete: {n_outputs} outputs -> {result.out_dir}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Order-book shape estimation and interval statistics.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("synth", help="generate a reproducible synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    _add_synth_args(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("estimate", help="fit the shape law per window and summarize")
    _add_panel_args(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("acf", help="panel autocorrelations, long-memory fit, fluctuation AR(1)")
    _add_panel_args(p)
    p.set_defaults(func=_cmd_acf)

    p = sub.add_parser("intraday", help="normalized intraday convexity profiles")
    _add_panel_args(p)
    p.set_defaults(func=_cmd_intraday)

    p = sub.add_parser("dynamics", help="dynamic-adjustment panel regressions")
    _add_panel_args(p)
    p.set_defaults(func=_cmd_dynamics)

    p = sub.add_parser("discovery", help="price-discovery panel regression (needs trades)")
    _add_panel_args(p)
    p.set_defaults(func=_cmd_discovery)

    p = sub.add_parser("run", help="full pipeline with manifest")
    _add_panel_args(p, snapshots_required=False)
    p.add_argument("--synth", action="store_true", help="generate inputs under OUT/input first")
    p.add_argument("--stocks", type=int, default=2, help="synthetic stocks (with --synth)")
    p.add_argument("--days", type=int, default=5, help="synthetic days (with --synth)")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BookShapeError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
