"""End-to-end orchestration: ingest, window, estimate, report.

The pipeline runs a fixed sequence of stages and writes its outputs in a
canonical order so that identical inputs and configuration produce
byte-identical files.  Any stage failure aborts the run with a stage-tagged
error and leaves behind a manifest marked ``failed``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from . import io as bio
from .book import SIDES, BookSnapshot, IntervalWindow, WindowGrid, build_windows
from .convexity import ConvexityEstimate, WindowFailure, estimate_panel, summarize_log_convexity
from .errors import InvalidConfig, StageError
from .stats import (
    IntervalRecord,
    RecordPanel,
    fit_long_memory,
    interval_stats,
    intraday_profile,
    panel_acf,
)
from .regression import ar1_kappa, dynamic_adjustment, price_discovery

NAN = float("nan")


@dataclass(frozen=True)
class RunConfig:
    """Inputs, thresholds, and switches for a full pipeline run."""

    snapshots: str
    out_dir: str
    trades: str | None = None
    interval_seconds: int = 300
    spacing_seconds: int = 10
    n_intervals: int = 48
    min_snapshots: int = 20
    min_points: int = 50
    max_lag: int = 40
    min_pairs: int = 5
    ar1_min_pairs: int = 100
    lag_market_vars: bool = False
    include_degenerate: bool = False
    min_days: int = 0
    seed: int | None = None

    def validate(self) -> None:
        if self.interval_seconds <= 0 or self.spacing_seconds <= 0:
            raise InvalidConfig("interval and spacing must be positive")
        if self.interval_seconds % self.spacing_seconds != 0:
            raise InvalidConfig("interval_seconds must be divisible by spacing_seconds")
        if self.n_intervals <= 0:
            raise InvalidConfig("n_intervals must be positive")
        for name in ("min_snapshots", "min_points", "max_lag", "min_pairs", "ar1_min_pairs"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be at least 1")
        if self.min_days < 0:
            raise InvalidConfig("min_days must be non-negative")

    @property
    def grid(self) -> WindowGrid:
        return WindowGrid(
            interval_seconds=self.interval_seconds,
            spacing_seconds=self.spacing_seconds,
            n_intervals=self.n_intervals,
        )


def config_digest(config: RunConfig) -> str:
    """Stable sha256 over the canonical JSON form of the configuration."""
    payload = json.dumps(dataclasses.asdict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@contextmanager
def _stage(name: str) -> Iterator[None]:
    # Tag any failure with the stage it came from; never double-wrap.
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _assemble_records(
    windows: list[IntervalWindow],
    estimates: list[ConvexityEstimate],
    volumes: dict[tuple[str, str, int], tuple[float, float]] | None,
    config: RunConfig,
) -> list[IntervalRecord]:
    """Build one interval record per window that passed the snapshot gate.

    Returns within each day are chained only across consecutive recorded
    intervals; a gap (missing or under-sampled window) breaks the chain.
    """
    est = {(e.stock_id, e.day_id, e.t, e.side): e for e in estimates}
    records: list[IntervalRecord] = []
    prev_key: tuple[str, str] | None = None
    prev_t = -1
    prev_mid: float | None = None
    for window in windows:
        key = (window.stock_id, window.day_id)
        if key != prev_key:
            prev_key, prev_t, prev_mid = key, -1, None
        if window.n_snapshots < config.min_snapshots:
            continue
        chained = prev_mid if window.t == prev_t + 1 else None
        stats = interval_stats(window, prev_mid=chained)
        params: dict[str, float] = {}
        for side in SIDES:
            e = est.get((window.stock_id, window.day_id, window.t, side))
            usable = e is not None and (config.include_degenerate or not e.degenerate)
            params[f"c_{side}"] = e.c if usable else NAN
            params[f"W_{side}"] = e.W if usable else NAN
        if volumes is None:
            v_buy = v_sell = NAN
        else:
            v_buy, v_sell = volumes.get((window.stock_id, window.day_id, window.t), (0.0, 0.0))
        records.append(
            IntervalRecord(
                stock_id=window.stock_id,
                day_id=window.day_id,
                t=window.t,
                c_bid=params["c_bid"],
                c_ask=params["c_ask"],
                W_bid=params["W_bid"],
                W_ask=params["W_ask"],
                mid=stats.mid,
                r=stats.r,
                g=stats.g,
                v_buy=v_buy,
                v_sell=v_sell,
            )
        )
        prev_t, prev_mid = window.t, stats.mid
    return records


@dataclass
class PreparedPanel:
    """Everything the reporting stages consume, computed once up front."""

    snapshots: list[BookSnapshot]
    rejected: list[bio.RejectedRow]
    out_of_session: int
    stocks_dropped: int
    windows: list[IntervalWindow]
    estimates: list[ConvexityEstimate]
    failures: list[WindowFailure]
    volumes: dict[tuple[str, str, int], tuple[float, float]] | None
    trade_rows: int
    records: list[IntervalRecord]
    panel: RecordPanel


def prepare_panel(config: RunConfig) -> PreparedPanel:
    """Run the data stages (ingest through record assembly) without writing."""
    with _stage("config"):
        config.validate()
        grid = config.grid

    with _stage("ingest"):
        snapshots, rejected = bio.ingest_snapshots(config.snapshots)

    with _stage("window"):
        windows, out_of_session = build_windows(snapshots, grid)
        stocks_dropped = 0
        if config.min_days > 0:
            days_per_stock: dict[str, set[str]] = {}
            for w in windows:
                days_per_stock.setdefault(w.stock_id, set()).add(w.day_id)
            keep = {s for s, days in days_per_stock.items() if len(days) >= config.min_days}
            stocks_dropped = len(days_per_stock) - len(keep)
            windows = [w for w in windows if w.stock_id in keep]

    with _stage("estimate"):
        estimates, failures = estimate_panel(
            windows,
            min_snapshots=config.min_snapshots,
            min_points=config.min_points,
        )

    volumes = None
    trade_rows = 0
    if config.trades is not None:
        with _stage("trades"):
            trades = bio.read_trades(config.trades)
            trade_rows = len(trades)
            volumes = bio.assemble_trades(trades, config.grid)

    with _stage("records"):
        records = _assemble_records(windows, estimates, volumes, config)
        panel = RecordPanel.from_records(records, n_intervals=config.n_intervals)

    return PreparedPanel(
        snapshots=snapshots,
        rejected=rejected,
        out_of_session=out_of_session,
        stocks_dropped=stocks_dropped,
        windows=windows,
        estimates=estimates,
        failures=failures,
        volumes=volumes,
        trade_rows=trade_rows,
        records=records,
        panel=panel,
    )


@dataclass
class RunResult:
    """Where the run wrote its outputs, plus the manifest that describes them."""

    out_dir: Path
    manifest: dict = field(default_factory=dict)


def run_pipeline(config: RunConfig) -> RunResult:
    """Execute every stage in order and write the full report bundle."""
    out_dir = Path(config.out_dir)
    manifest: dict = {
        "config": dataclasses.asdict(config),
        "config_sha256": config_digest(config),
        "counts": {},
        "outputs": [],
        "status": "failed",
    }
    counts: dict[str, int] = manifest["counts"]
    outputs: list[str] = manifest["outputs"]

    def emit(name: str, writer, payload) -> None:
        writer(out_dir / name, payload)
        outputs.append(name)

    try:
        with _stage("config"):
            config.validate()
            out_dir.mkdir(parents=True, exist_ok=True)

        data = prepare_panel(config)
        panel = data.panel

        with _stage("ingest"):
            counts["rows_total"] = len(data.snapshots) + len(data.rejected)
            counts["rows_accepted"] = len(data.snapshots)
            counts["rows_rejected"] = len(data.rejected)
            counts["rows_out_of_session"] = data.out_of_session
            emit("rejects.csv", bio.write_rejects_csv, data.rejected)

        with _stage("window"):
            counts["stocks_dropped_min_days"] = data.stocks_dropped
            counts["stocks"] = len({w.stock_id for w in data.windows})
            counts["stock_days"] = len({(w.stock_id, w.day_id) for w in data.windows})
            counts["windows_total"] = len(data.windows)
            counts["windows_empty"] = sum(1 for w in data.windows if w.n_snapshots == 0)

        with _stage("estimate"):
            counts["estimates"] = len(data.estimates)
            counts["estimates_degenerate"] = sum(1 for e in data.estimates if e.degenerate)
            counts["window_failures"] = len(data.failures)

        if config.trades is not None:
            counts["trade_rows"] = data.trade_rows

        with _stage("records"):
            counts["records"] = len(data.records)
            emit("records.csv", bio.write_records_csv, data.records)

        with _stage("panel"):
            emit("panel.csv", bio.write_panel_csv, data.estimates)
            emit("failures.csv", bio.write_failures_csv, data.failures)

        with _stage("summary"):
            emit("summary.csv", bio.write_summary_csv, summarize_log_convexity(data.estimates))

        with _stage("acf"):
            for side in SIDES:
                acf = panel_acf(panel.log_c(side), max_lag=config.max_lag, min_pairs=config.min_pairs)
                emit(f"acf_logc_{side}.csv", bio.write_acf_csv, acf)
                emit(f"long_memory_{side}.csv", bio.write_long_memory_csv, fit_long_memory(acf))
            for side in SIDES:
                acf = panel_acf(panel.kappa(side), max_lag=config.max_lag, min_pairs=config.min_pairs)
                emit(f"acf_kappa_{side}.csv", bio.write_acf_csv, acf)

        with _stage("ar1"):
            for side in SIDES:
                summary = ar1_kappa(panel, side, min_pairs=config.ar1_min_pairs)
                emit(f"ar1_kappa_{side}.csv", bio.write_regression_summary_csv, summary)

        with _stage("intraday"):
            for side in SIDES:
                profile = intraday_profile(panel.series(f"c_{side}"))
                emit(f"intraday_{side}.csv", bio.write_profile_csv, profile)

        with _stage("dynamics"):
            for side in SIDES:
                summary = dynamic_adjustment(panel, side, lag_market_vars=config.lag_market_vars)
                emit(f"dynamics_{side}.csv", bio.write_regression_summary_csv, summary)

        if data.volumes is None:
            manifest["discovery"] = "skipped (no trades)"
        else:
            with _stage("discovery"):
                emit("discovery.csv", bio.write_regression_summary_csv, price_discovery(panel))
                manifest["discovery"] = "written"

        with _stage("manifest"):
            if counts["rows_accepted"] + counts["rows_rejected"] != counts["rows_total"]:
                raise AssertionError("row accounting mismatch")
            manifest["status"] = "complete"
            _write_manifest(out_dir, manifest)
    except StageError as exc:
        manifest["status"] = "failed"
        manifest["failed_stage"] = exc.stage
        manifest["error"] = str(exc.cause)
        try:
            _write_manifest(out_dir, manifest)
        except OSError:
            pass
        raise
    return RunResult(out_dir=out_dir, manifest=manifest)


def _write_manifest(out_dir: Path, manifest: dict) -> None:
    path = out_dir / "manifest.json"
    if "manifest.json" not in manifest["outputs"]:
        manifest["outputs"].append("manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
