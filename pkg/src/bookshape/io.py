"""CSV wire formats: ingest with row-level rejection, plus all writers.

Every float is printed with 17 significant digits so values survive a
write/read round trip bit for bit; absent values are empty fields.  Files
are written in canonical (stock, day, interval, side) order, which makes
repeated runs byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .book import BookSnapshot, N_LEVELS, REASON_PARSE, WindowGrid
from .convexity import ConvexityEstimate, SummaryRow, WindowFailure
from .errors import BadHeader, InvalidSnapshot, UnknownSide
from .regression import PanelRegressionSummary
from .stats import AcfCurve, IntervalRecord, IntradayProfile, LongMemoryFit

__all__ = [
    "SNAPSHOT_COLUMNS",
    "TRADE_COLUMNS",
    "TRUTH_COLUMNS",
    "RECORD_COLUMNS",
    "PANEL_COLUMNS",
    "Trade",
    "TruthRow",
    "RejectedRow",
    "fmt",
    "ingest_snapshots",
    "read_trades",
    "assemble_trades",
    "write_snapshots_csv",
    "write_trades_csv",
    "write_truth_csv",
    "read_truth_csv",
    "write_panel_csv",
    "read_panel_csv",
    "write_records_csv",
    "read_records_csv",
    "write_summary_csv",
    "write_acf_csv",
    "write_long_memory_csv",
    "write_profile_csv",
    "write_regression_summary_csv",
    "write_failures_csv",
    "write_rejects_csv",
]

_LEVEL_RANGE = range(1, N_LEVELS + 1)

SNAPSHOT_COLUMNS = (
    ["stock_id", "day_id", "ts_sec"]
    + [f"bid_px_{i}" for i in _LEVEL_RANGE]
    + [f"bid_qty_{i}" for i in _LEVEL_RANGE]
    + [f"ask_px_{i}" for i in _LEVEL_RANGE]
    + [f"ask_qty_{i}" for i in _LEVEL_RANGE]
)
TRADE_COLUMNS = ["stock_id", "day_id", "ts_sec", "price", "volume", "aggressor_side"]
TRUTH_COLUMNS = ["stock_id", "day_id", "t", "side", "true_W", "true_c"]
PANEL_COLUMNS = ["stock_id", "day_id", "t", "side", "W", "c", "rho", "r_squared", "n_points", "degenerate"]
RECORD_COLUMNS = [
    "stock_id", "day_id", "t",
    "c_bid", "c_ask", "W_bid", "W_ask", "mid", "r", "g", "v_buy", "v_sell",
]


def fmt(x: float | None) -> str:
    """Format a float at 17 significant digits; NaN or None becomes empty."""
    if x is None:
        return ""

    if isinstance(x, float) and np.isnan(x):
        return ""
    return f"{x:.17g}"


def _parse_optional(text: str) -> float:
    return float(text) if text != "" else float("nan")


def _check_header(row: Sequence[str] | None, expected: Sequence[str], path: Path) -> None:
    if row is None or list(row) != list(expected):
        raise BadHeader(f"{path}: expected header {','.join(expected)}")


@dataclass(frozen=True)
class Trade:
    """One trade print with its aggressor side ('buy' or 'sell')."""

    stock_id: str
    day_id: str
    ts: float
    price: float
    volume: float
    side: str


@dataclass(frozen=True)
class TruthRow:
    """Generator ground truth for one (stock, day, interval, side)."""

    stock_id: str
    day_id: str
    t: int
    side: str
    true_W: float
    true_c: float


@dataclass(frozen=True)
class RejectedRow:
    """One input row that failed validation; line numbers count the header as 1."""

    line: int
    reason: str
    message: str = ""


def ingest_snapshots(path: str | Path) -> tuple[list[BookSnapshot], list[RejectedRow]]:
    """Read and validate a snapshot CSV.

    Returns the accepted snapshots sorted by (stock, day, timestamp) and a
    rejection report carrying one stable reason code per bad row, so
    accepted + rejected always equals the number of data rows.
    """
    path = Path(path)
    accepted: list[BookSnapshot] = []
    rejected: list[RejectedRow] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, SNAPSHOT_COLUMNS, path)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SNAPSHOT_COLUMNS):
                rejected.append(RejectedRow(line, REASON_PARSE, f"{len(row)} fields"))
                continue
            try:
                ts = float(row[2])
                values = [float(v) for v in row[3:]]
            except ValueError as exc:
                rejected.append(RejectedRow(line, REASON_PARSE, str(exc)))
                continue
            try:
                snap = BookSnapshot(
                    stock_id=row[0],
                    day_id=row[1],
                    ts=ts,
                    bid_quotes=tuple(values[0:5]),
                    bid_depths=tuple(values[5:10]),
                    ask_quotes=tuple(values[10:15]),
                    ask_depths=tuple(values[15:20]),
                )
            except InvalidSnapshot as exc:
                rejected.append(RejectedRow(line, exc.reason, str(exc)))
                continue
            accepted.append(snap)
    accepted.sort(key=lambda s: (s.stock_id, s.day_id, s.ts))
    return accepted, rejected


def read_trades(path: str | Path) -> list[Trade]:
    """Read a trade CSV; any malformed row is a hard error."""
    path = Path(path)
    trades: list[Trade] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, TRADE_COLUMNS, path)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TRADE_COLUMNS):
                raise ValueError(f"{path} line {line}: expected {len(TRADE_COLUMNS)} fields")
            side = row[5]
            if side not in ("buy", "sell"):
                raise UnknownSide(f"{path} line {line}: aggressor_side {side!r}")
            trades.append(
                Trade(
                    stock_id=row[0],
                    day_id=row[1],
                    ts=float(row[2]),
                    price=float(row[3]),
                    volume=float(row[4]),
                    side=side,
                )
            )
    trades.sort(key=lambda tr: (tr.stock_id, tr.day_id, tr.ts))
    return trades


def assemble_trades(
    trades: Iterable[Trade],
    grid: WindowGrid | None = None,
) -> dict[tuple[str, str, int], tuple[float, float]]:
    """Sum buy and sell volume per (stock, day, interval).

    Interval boundaries are half-open, so a trade exactly on a boundary
    counts in the later interval.  Trades outside the session clock are
    ignored.  Windows with trades on only one side still get both sums
    (the other is zero).
    """
    grid = grid or WindowGrid()
    sums: dict[tuple[str, str, int], list[float]] = {}
    for trade in trades:
        t = grid.interval_of(trade.ts)
        if t is None:
            continue
        key = (trade.stock_id, trade.day_id, t)
        cell = sums.setdefault(key, [0.0, 0.0])
        if trade.side == "buy":
            cell[0] += trade.volume
        else:
            cell[1] += trade.volume
    return {key: (cell[0], cell[1]) for key, cell in sums.items()}


def _write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_snapshots_csv(
    path: str | Path,
    snapshots: Iterable[BookSnapshot],
    *,
    price_fmt=fmt,
    qty_fmt=fmt,
) -> Path:
    rows = (
        [s.stock_id, s.day_id, fmt(s.ts)]
        + [price_fmt(q) for q in s.bid_quotes]
        + [qty_fmt(d) for d in s.bid_depths]
        + [price_fmt(q) for q in s.ask_quotes]
        + [qty_fmt(d) for d in s.ask_depths]
        for s in snapshots
    )
    return _write_rows(path, SNAPSHOT_COLUMNS, rows)


def write_trades_csv(path: str | Path, trades: Iterable[Trade], *, price_fmt=fmt) -> Path:
    rows = (
        [tr.stock_id, tr.day_id, fmt(tr.ts), price_fmt(tr.price), fmt(tr.volume), tr.side]
        for tr in trades
    )
    return _write_rows(path, TRADE_COLUMNS, rows)


def write_truth_csv(path: str | Path, rows: Iterable[TruthRow]) -> Path:
    return _write_rows(
        path,
        TRUTH_COLUMNS,
        ([r.stock_id, r.day_id, str(r.t), r.side, fmt(r.true_W), fmt(r.true_c)] for r in rows),
    )


def read_truth_csv(path: str | Path) -> list[TruthRow]:
    path = Path(path)
    out: list[TruthRow] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, TRUTH_COLUMNS, path)
        for row in reader:
            if row:
                out.append(TruthRow(row[0], row[1], int(row[2]), row[3], float(row[4]), float(row[5])))
    return out


def write_panel_csv(path: str | Path, estimates: Iterable[ConvexityEstimate]) -> Path:
    rows = (
        [
            e.stock_id or "",
            e.day_id or "",
            str(e.t if e.t is not None else ""),
            e.side,
            fmt(e.W),
            fmt(e.c),
            fmt(e.rho),
            fmt(e.r_squared),
            str(e.n_points),
            "1" if e.degenerate else "0",
        ]
        for e in estimates
    )
    return _write_rows(path, PANEL_COLUMNS, rows)


def read_panel_csv(path: str | Path) -> list[ConvexityEstimate]:
    path = Path(path)
    out: list[ConvexityEstimate] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, PANEL_COLUMNS, path)
        for row in reader:
            if not row:
                continue
            out.append(
                ConvexityEstimate(
                    stock_id=row[0],
                    day_id=row[1],
                    t=int(row[2]),
                    side=row[3],  # type: ignore[arg-type]
                    W=float(row[4]),
                    c=float(row[5]),
                    rho=float(row[6]),
                    r_squared=float(row[7]),
                    n_points=int(row[8]),
                    degenerate=row[9] == "1",
                )
            )
    return out


def write_records_csv(path: str | Path, records: Iterable[IntervalRecord]) -> Path:
    rows = (
        [
            rec.stock_id,
            rec.day_id,
            str(rec.t),
            fmt(rec.c_bid),
            fmt(rec.c_ask),
            fmt(rec.W_bid),
            fmt(rec.W_ask),
            fmt(rec.mid),
            fmt(rec.r),
            fmt(rec.g),
            fmt(rec.v_buy),
            fmt(rec.v_sell),
        ]
        for rec in records
    )
    return _write_rows(path, RECORD_COLUMNS, rows)


def read_records_csv(path: str | Path) -> list[IntervalRecord]:
    path = Path(path)
    out: list[IntervalRecord] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, RECORD_COLUMNS, path)
        for row in reader:
            if not row:
                continue
            out.append(
                IntervalRecord(
                    stock_id=row[0],
                    day_id=row[1],
                    t=int(row[2]),
                    c_bid=_parse_optional(row[3]),
                    c_ask=_parse_optional(row[4]),
                    W_bid=_parse_optional(row[5]),
                    W_ask=_parse_optional(row[6]),
                    mid=_parse_optional(row[7]),
                    r=_parse_optional(row[8]),
                    g=_parse_optional(row[9]),
                    v_buy=_parse_optional(row[10]),
                    v_sell=_parse_optional(row[11]),
                )
            )
    return out


def write_summary_csv(path: str | Path, rows: Iterable[SummaryRow]) -> Path:
    header = ["series", "mean", "std", "median", "minimum", "maximum", "p_value", "n_obs"]
    out = (
        [r.series, fmt(r.mean), fmt(r.std), fmt(r.median), fmt(r.minimum), fmt(r.maximum), fmt(r.p_value), str(r.n_obs)]
        for r in rows
    )
    return _write_rows(path, header, out)


def write_acf_csv(path: str | Path, acf: AcfCurve) -> Path:
    rows = ([str(int(lag)), fmt(float(val))] for lag, val in zip(acf.lags, acf.values))
    return _write_rows(path, ["lag", "value"], rows)


def write_long_memory_csv(path: str | Path, fit: LongMemoryFit) -> Path:
    rows = [
        ["alpha", fmt(fit.alpha), fmt(fit.alpha_p)],
        ["beta", fmt(fit.beta), fmt(fit.beta_p)],
        ["r_squared", fmt(fit.r_squared), ""],
        ["a", fmt(fit.a), ""],
        ["b", fmt(fit.b), ""],
        ["n_lags", str(fit.n_lags), ""],
        ["n_dropped", str(fit.n_dropped), ""],
        ["long_memory", "1" if fit.long_memory else "0", ""],
    ]
    return _write_rows(path, ["term", "estimate", "p_value"], rows)


def write_profile_csv(path: str | Path, profile: IntradayProfile) -> Path:
    rows = ([str(int(t)), fmt(float(v))] for t, v in zip(profile.t, profile.values))
    return _write_rows(path, ["t", "value"], rows)


def write_regression_summary_csv(path: str | Path, summary: PanelRegressionSummary) -> Path:
    """Cross-stock regression table: mean coefficient and sign-significance counts."""
    header = ["coef", "mean", "n_sig_neg_5", "n_sig_neg_10", "n_sig_pos_5", "n_sig_pos_10"]
    rows = [
        [
            name,
            fmt(float(summary.mean_estimates[i])),
            str(int(summary.n_sig_neg_5[i])),
            str(int(summary.n_sig_neg_10[i])),
            str(int(summary.n_sig_pos_5[i])),
            str(int(summary.n_sig_pos_10[i])),
        ]
        for i, name in enumerate(summary.names)
    ]
    rows.append(["mean_r2", fmt(summary.mean_r_squared), "", "", "", ""])
    return _write_rows(path, header, rows)


def write_failures_csv(path: str | Path, failures: Iterable[WindowFailure]) -> Path:
    rows = (
        [f.stock_id or "", f.day_id or "", str(f.t if f.t is not None else ""), f.side or "", f.reason]
        for f in failures
    )
    return _write_rows(path, ["stock_id", "day_id", "t", "side", "reason"], rows)


def write_rejects_csv(path: str | Path, rejects: Iterable[RejectedRow]) -> Path:
    rows = ([str(r.line), r.reason, r.message] for r in rejects)
    return _write_rows(path, ["line", "reason", "message"], rows)
