"""Deterministic order-book generator with recorded ground truth.

Books are built so that the estimation pipeline can recover the generating
parameters exactly.  For each snapshot the ask quotes are placed on the
configured power law around an intended mid m, the best bid is set to
2m - best_ask so the arithmetic mid equals m bit for bit (the subtraction
is exact because best_ask lies within a factor two of m), and the level-1
bid depth is solved from the bid law so that every emitted point lies
exactly on its side's curve.  In exact mode (tick=None) the full float
values are emitted; in tick mode prices are rounded to the grid and depths
to whole shares, trading exactness for realistic data.

Randomness comes from numpy's PCG64 generator.  Every (stock, day) gets an
independent substream seeded with SeedSequence((seed, stream, stock_index,
day_index)), so output is reproducible regardless of generation order; the
draw order inside a day is fixed (convexity, scale, mid path, shape noise,
trades).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterator, Union

import numpy as np

from .book import BookSnapshot, IntervalWindow, WindowGrid
from .errors import InvalidConfig, InvalidSnapshot
from .io import Trade, TruthRow, write_snapshots_csv, write_trades_csv, write_truth_csv
from .stats import RecordPanel

__all__ = [
    "ConstantProcess",
    "LogAr1Process",
    "LinearDriftProcess",
    "SynthConfig",
    "DayData",
    "iter_days",
    "generate",
    "generate_kappa_panel",
    "generate_dynamic_panel",
    "generate_discovery_panel",
]

# ask level-1 deviations at or above this would leave no room for a valid
# anchored bid (the hard bound is log 2)
_MAX_LEVEL1_DEVIATION = 0.60

# substream tags, so different generators never share a random stream
_STREAM_BOOK = 0
_STREAM_KAPPA = 1
_STREAM_DYNAMIC = 2
_STREAM_DISCOVERY = 3


@dataclass(frozen=True)
class ConstantProcess:
    """A per-interval parameter held fixed at ``value``."""

    value: float

    def validate(self, name: str) -> None:
        if not (np.isfinite(self.value) and self.value > 0):
            raise InvalidConfig(f"{name}: constant value must be positive")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.full(n, float(self.value))


@dataclass(frozen=True)
class LogAr1Process:
    """First-order autoregression in log space around log(mean).

    Each day starts from the stationary law, so within-day correlation at
    lag k is phi**k from the first interval on.
    """

    mean: float
    phi: float
    sigma: float

    def validate(self, name: str) -> None:
        if not (np.isfinite(self.mean) and self.mean > 0):
            raise InvalidConfig(f"{name}: process mean must be positive")
        if not (np.isfinite(self.phi) and abs(self.phi) < 1):
            raise InvalidConfig(f"{name}: |phi| must be below 1")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise InvalidConfig(f"{name}: sigma must be non-negative")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(n)
        mu = np.log(self.mean)
        x = np.empty(n)
        spread = self.sigma / np.sqrt(1.0 - self.phi**2) if self.sigma > 0 else 0.0
        x[0] = mu + spread * z[0]
        for i in range(1, n):
            x[i] = mu + self.phi * (x[i - 1] - mu) + self.sigma * z[i]
        return np.exp(x)


@dataclass(frozen=True)
class LinearDriftProcess:
    """A deterministic within-day line from ``start`` to ``end``."""

    start: float
    end: float

    def validate(self, name: str) -> None:
        if not (np.isfinite(self.start) and self.start > 0 and np.isfinite(self.end) and self.end > 0):
            raise InvalidConfig(f"{name}: drift endpoints must be positive")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.linspace(self.start, self.end, n)


Process = Union[ConstantProcess, LogAr1Process, LinearDriftProcess]


@dataclass(frozen=True)
class SynthConfig:
    """Everything the generator needs; equal configs give identical output."""

    seed: int = 0
    n_stocks: int = 1
    n_days: int = 1
    n_intervals: int = 48
    interval_seconds: int = 300
    spacing_seconds: int = 10
    base_price: float = 10.0
    mid_sigma: float = 0.0005
    bid_c: Process = field(default_factory=lambda: LogAr1Process(0.55, 0.5, 0.15))
    ask_c: Process = field(default_factory=lambda: LogAr1Process(0.58, 0.5, 0.15))
    bid_w: Process = field(default_factory=lambda: ConstantProcess(2e-4))
    ask_w: Process = field(default_factory=lambda: ConstantProcess(2e-4))
    depth_total: float = 2000.0
    depth_fractions: tuple[float, ...] = (0.10, 0.25, 0.45, 0.70, 1.00)
    w_noise: float = 0.0
    tick: float | None = 0.01
    trade_intensity: float = 6.0
    trade_volume_mean: float = 200.0

    def __post_init__(self) -> None:
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidConfig("seed must fit in 64 unsigned bits")
        if self.n_stocks < 1 or self.n_days < 1:
            raise InvalidConfig("need at least one stock and one day")
        if self.n_intervals < 1:
            raise InvalidConfig("need at least one interval")
        if self.interval_seconds <= 0 or self.spacing_seconds <= 0:
            raise InvalidConfig("interval and spacing must be positive")
        if self.interval_seconds % self.spacing_seconds != 0:
            raise InvalidConfig("interval length must be divisible by snapshot spacing")
        if not (np.isfinite(self.base_price) and self.base_price > 0):
            raise InvalidConfig("base price must be positive")
        if not (np.isfinite(self.mid_sigma) and self.mid_sigma >= 0):
            raise InvalidConfig("mid_sigma must be non-negative")
        for name, proc in (
            ("bid_c", self.bid_c),
            ("ask_c", self.ask_c),
            ("bid_w", self.bid_w),
            ("ask_w", self.ask_w),
        ):
            proc.validate(name)
        if not (np.isfinite(self.depth_total) and self.depth_total > 0):
            raise InvalidConfig("depth_total must be positive")
        fr = self.depth_fractions
        if len(fr) < 2 or any(not (0 < f <= 1) for f in fr) or any(b <= a for a, b in zip(fr, fr[1:])):
            raise InvalidConfig("depth fractions must be strictly increasing within (0, 1]")
        if not (np.isfinite(self.w_noise) and self.w_noise >= 0):
            raise InvalidConfig("w_noise must be non-negative")
        if self.tick is not None and not (np.isfinite(self.tick) and self.tick > 0):
            raise InvalidConfig("tick must be positive or None for exact output")
        if self.trade_intensity < 0:
            raise InvalidConfig("trade_intensity must be non-negative")
        if not (np.isfinite(self.trade_volume_mean) and self.trade_volume_mean > 0):
            raise InvalidConfig("trade_volume_mean must be positive")

    @property
    def snapshots_per_interval(self) -> int:
        return self.interval_seconds // self.spacing_seconds

    @property
    def grid(self) -> WindowGrid:
        return WindowGrid(self.interval_seconds, self.spacing_seconds, self.n_intervals)

    @property
    def tick_decimals(self) -> int:
        if self.tick is None:
            return 0
        return max(0, -Decimal(repr(self.tick)).as_tuple().exponent)

    def stock_ids(self) -> list[str]:
        return [f"S{i:02d}" for i in range(self.n_stocks)]

    def day_ids(self) -> list[str]:
        return [f"D{i:03d}" for i in range(self.n_days)]


@dataclass
class DayData:
    """One generated (stock, day): its windows, ground truth, and trades."""

    stock_id: str
    day_id: str
    windows: list[IntervalWindow]
    truth: list[TruthRow]
    trades: list[Trade]

    @property
    def snapshots(self) -> Iterator[BookSnapshot]:
        for window in self.windows:
            yield from window.snapshots


def _rng(seed: int, stream: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, stream, *key)))


def _ask_depth_grid(config: SynthConfig) -> np.ndarray:
    grid = np.asarray(config.depth_fractions, dtype=np.float64) * config.depth_total
    if config.tick is not None:
        grid = np.maximum(np.rint(grid), 1.0)
        if np.any(np.diff(grid) <= 0):
            raise InvalidConfig("depth grid collapses under whole-share rounding")
    return grid


def _round_prices(q: np.ndarray, tick: float, dec: int, ascending: bool) -> np.ndarray:
    """Round level prices to the tick grid, keeping levels strictly ordered."""
    out = np.round(np.rint(q / tick) * tick, dec)
    for i in range(1, out.shape[1]):
        if ascending:
            out[:, i] = np.maximum(out[:, i], np.round(out[:, i - 1] + tick, dec))
        else:
            out[:, i] = np.minimum(out[:, i], np.round(out[:, i - 1] - tick, dec))
    return out


def _build_interval_books(
    config: SynthConfig,
    mids: np.ndarray,
    W_bid: float,
    c_bid: float,
    W_ask: float,
    c_ask: float,
    noise: np.ndarray | None,
    ask_grid: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Quote and depth arrays (n_snapshots, 5) for one interval's books."""
    n = mids.shape[0]
    w_ask = np.tile(W_ask * np.power(ask_grid, c_ask), (n, 1))
    if noise is not None:
        w_ask = np.sort(w_ask * np.exp(config.w_noise * noise[:, :5]), axis=1)
    if np.any(w_ask[:, 0] >= _MAX_LEVEL1_DEVIATION):
        raise InvalidConfig(
            "ask level-1 deviation reaches "
            f"{float(w_ask[:, 0].max()):.3f}; lower W, c, the first depth fraction, "
            "or the shape noise"
        )
    q_ask = mids[:, None] * np.exp(w_ask)
    # exact arithmetic mid: best bid mirrors the best ask around m
    q_bid_1 = 2.0 * mids - q_ask[:, 0]
    w_bid_1 = -np.log(q_bid_1 / mids)
    depth_bid_1 = np.power(w_bid_1 / W_bid, 1.0 / c_bid)
    if not np.all(np.isfinite(depth_bid_1)):
        raise InvalidConfig("anchored bid depth overflows; raise W or the exponent")
    if config.tick is not None:
        depth_bid_1 = np.maximum(np.rint(depth_bid_1), 1.0)
    # The bid side gets its own depth grid: the anchored level 1 plus the ask
    # grid's increments.  Deviations for levels 2..5 are taken from the law at
    # the cumulative depths a reader will rebuild by summing level depths, so
    # every emitted point survives the CSV round trip exactly.
    d_bid = np.column_stack([depth_bid_1, np.tile(np.diff(ask_grid), (n, 1))])
    cum_bid = np.cumsum(d_bid, axis=1)
    w_bid_rest = W_bid * np.power(cum_bid[:, 1:], c_bid)
    if noise is not None:
        w_bid_rest = np.sort(w_bid_rest * np.exp(config.w_noise * noise[:, 5:]), axis=1)
        # keep deviations strictly increasing past the anchored level
        floor = w_bid_1 * (1.0 + 1e-9)
        for i in range(w_bid_rest.shape[1]):
            w_bid_rest[:, i] = np.maximum(w_bid_rest[:, i], floor)
            floor = w_bid_rest[:, i] * (1.0 + 1e-9)
    q_bid = np.column_stack([q_bid_1, mids[:, None] * np.exp(-w_bid_rest)])
    cum_ask = np.tile(ask_grid, (n, 1))
    if config.tick is not None:
        dec = config.tick_decimals
        q_ask = _round_prices(q_ask, config.tick, dec, ascending=True)
        q_bid = _round_prices(q_bid, config.tick, dec, ascending=False)
        crossed = q_bid[:, 0] >= q_ask[:, 0]
        if crossed.any():
            q_bid[crossed, 0] = np.round(q_ask[crossed, 0] - config.tick, dec)
            q_bid = _round_prices(q_bid, config.tick, dec, ascending=False)
        if np.any(q_bid[:, -1] <= 0):
            raise InvalidConfig("tick rounding pushed a bid level to zero")
    d_ask = np.diff(cum_ask, axis=1, prepend=0.0)
    return q_bid, d_bid, q_ask, d_ask


def generate_day(config: SynthConfig, stock_index: int, day_index: int) -> DayData:
    """Build one (stock, day) worth of windows, truth rows, and trades."""
    stock_id = config.stock_ids()[stock_index]
    day_id = config.day_ids()[day_index]
    rng = _rng(config.seed, _STREAM_BOOK, stock_index, day_index)
    nT = config.n_intervals
    nS = config.snapshots_per_interval
    c_bid = config.bid_c.draw(nT, rng)
    c_ask = config.ask_c.draw(nT, rng)
    W_bid = config.bid_w.draw(nT, rng)
    W_ask = config.ask_w.draw(nT, rng)
    log_mid = np.log(config.base_price) + config.mid_sigma * np.cumsum(rng.standard_normal(nT * nS))
    mids = np.exp(log_mid)
    noise = rng.standard_normal((nT * nS, 9)) if config.w_noise > 0 else None
    ask_grid = _ask_depth_grid(config)
    windows: list[IntervalWindow] = []
    truth: list[TruthRow] = []
    for t_idx in range(nT):
        sl = slice(t_idx * nS, (t_idx + 1) * nS)
        try:
            q_bid, d_bid, q_ask, d_ask = _build_interval_books(
                config,
                mids[sl],
                float(W_bid[t_idx]),
                float(c_bid[t_idx]),
                float(W_ask[t_idx]),
                float(c_ask[t_idx]),
                None if noise is None else noise[sl],
                ask_grid,
            )
        except InvalidConfig as exc:
            raise InvalidConfig(f"({stock_id}, {day_id}, t={t_idx + 1}): {exc}") from exc
        start = t_idx * config.interval_seconds
        snapshots = []
        for j in range(nS):
            try:
                snapshots.append(
                    BookSnapshot(
                        stock_id=stock_id,
                        day_id=day_id,
                        ts=float(start + j * config.spacing_seconds),
                        bid_quotes=tuple(q_bid[j]),
                        bid_depths=tuple(d_bid[j]),
                        ask_quotes=tuple(q_ask[j]),
                        ask_depths=tuple(d_ask[j]),
                    )
                )
            except InvalidSnapshot as exc:  # pragma: no cover - construction guards above
                raise InvalidConfig(
                    f"({stock_id}, {day_id}, t={t_idx + 1}): generated book invalid: {exc}"
                ) from exc
        windows.append(IntervalWindow(stock_id, day_id, t_idx + 1, snapshots))
        truth.append(TruthRow(stock_id, day_id, t_idx + 1, "bid", float(W_bid[t_idx]), float(c_bid[t_idx])))
        truth.append(TruthRow(stock_id, day_id, t_idx + 1, "ask", float(W_ask[t_idx]), float(c_ask[t_idx])))
    trades: list[Trade] = []
    if config.trade_intensity > 0:
        for t_idx in range(nT):
            start = t_idx * config.interval_seconds
            n_trades = int(rng.poisson(config.trade_intensity))
            offsets = np.sort(rng.uniform(0.0, config.interval_seconds, n_trades))
            buys = rng.integers(0, 2, n_trades)
            volumes = np.maximum(np.rint(rng.exponential(config.trade_volume_mean, n_trades)), 1.0)
            for off, buy, vol in zip(offsets, buys, volumes):
                snap_idx = min(int(off // config.spacing_seconds), nS - 1)
                price = float(mids[t_idx * nS + snap_idx])
                trades.append(
                    Trade(
                        stock_id=stock_id,
                        day_id=day_id,
                        ts=float(start + off),
                        price=price,
                        volume=float(vol),
                        side="buy" if buy else "sell",
                    )
                )
    return DayData(stock_id, day_id, windows, truth, trades)


def iter_days(config: SynthConfig) -> Iterator[DayData]:
    """All (stock, day) cells in canonical order."""
    for stock_index in range(config.n_stocks):
        for day_index in range(config.n_days):
            yield generate_day(config, stock_index, day_index)


def generate(config: SynthConfig, out_dir: str | Path) -> dict[str, int]:
    """Write snapshots.csv, trades.csv, and ground_truth.csv under ``out_dir``.

    Output is a pure function of the config: running twice produces
    byte-identical files.  Returns row counts per file.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    snapshots: list[BookSnapshot] = []
    truth: list[TruthRow] = []
    trades: list[Trade] = []
    for day in iter_days(config):
        snapshots.extend(day.snapshots)
        truth.extend(day.truth)
        trades.extend(day.trades)
    if config.tick is not None:
        dec = config.tick_decimals
        price_fmt = lambda x: f"{x:.{dec}f}"
        qty_fmt = lambda x: f"{x:.0f}"
    else:
        price_fmt = qty_fmt = None
    kwargs = {}
    if price_fmt is not None:
        kwargs = {"price_fmt": price_fmt, "qty_fmt": qty_fmt}
    write_snapshots_csv(out_dir / "snapshots.csv", snapshots, **kwargs)
    write_trades_csv(
        out_dir / "trades.csv",
        trades,
        **({"price_fmt": price_fmt} if price_fmt is not None else {}),
    )
    write_truth_csv(out_dir / "ground_truth.csv", truth)
    return {"snapshots": len(snapshots), "trades": len(trades), "truth": len(truth)}


def generate_kappa_panel(
    seed: int,
    b: float,
    *,
    n_days: int,
    n_intervals: int = 48,
    innovation_std: float = 1.0,
    stock_id: str = "S00",
) -> dict[tuple[str, str], np.ndarray]:
    """Day-long AR(1) fluctuation series with known coefficient ``b``.

    Each day's kappa starts at its stationary law and runs the recursion
    kappa_t = b * kappa_{t-1} + eps; the first interval is NaN because a
    fluctuation needs a previous interval.
    """
    if not abs(b) < 1:
        raise InvalidConfig("|b| must be below 1 for a stationary fluctuation")
    rng = _rng(seed, _STREAM_KAPPA)
    spread = innovation_std / np.sqrt(1.0 - b * b)
    out: dict[tuple[str, str], np.ndarray] = {}
    for d in range(n_days):
        z = rng.standard_normal(n_intervals - 1)
        kappa = np.full(n_intervals, np.nan)
        kappa[1] = spread * z[0]
        for i in range(2, n_intervals):
            kappa[i] = b * kappa[i - 1] + innovation_std * z[i - 1]
        out[(stock_id, f"D{d:03d}")] = kappa
    return out


def generate_dynamic_panel(
    seed: int,
    *,
    side: str,
    alpha: float,
    beta: float,
    gamma: float,
    lam: float,
    eta: float,
    n_days: int,
    n_intervals: int = 48,
    r_std: float = 0.002,
    g_shape: float = 2.0,
    g_scale: float = 5e-6,
    noise_std: float = 0.3,
    stock_id: str = "S00",
) -> RecordPanel:
    """Record panel whose log convexity follows the adjustment equation.

    log c_t = alpha + beta log c_{t-1} + gamma (log c_{t-1} - log c_{t-2})
    + lam r_t + eta g_t + eps with exogenous interval returns and realized
    variances, so the regression's coefficients are known exactly.
    """
    if not abs(beta) < 1:
        raise InvalidConfig("|beta| must be below 1 for a stable panel")
    rng = _rng(seed, _STREAM_DYNAMIC)
    panel = RecordPanel(n_intervals)
    level = alpha / (1.0 - beta)
    for d in range(n_days):
        r = np.concatenate([[np.nan], rng.normal(0.0, r_std, n_intervals - 1)])
        g = rng.gamma(g_shape, g_scale, n_intervals)
        eps = rng.normal(0.0, noise_std, n_intervals)
        logc = np.empty(n_intervals)
        logc[0] = level + eps[0]
        if n_intervals > 1:
            logc[1] = alpha + beta * logc[0] + lam * r[1] + eta * g[1] + eps[1]
        for i in range(2, n_intervals):
            logc[i] = (
                alpha
                + beta * logc[i - 1]
                + gamma * (logc[i - 1] - logc[i - 2])
                + lam * r[i]
                + eta * g[i]
                + eps[i]
            )
        day = panel.day(stock_id, f"D{d:03d}")
        day[f"c_{side}"][:] = np.exp(logc)
        day["r"][:] = r
        day["g"][:] = g
    return panel


def generate_discovery_panel(
    seed: int,
    *,
    alpha_scale: float,
    beta: float,
    gamma: float,
    lam: float,
    W_bid: float = 2e-4,
    c_bid: float = 0.55,
    W_ask: float = 2e-4,
    c_ask: float = 0.58,
    n_days: int,
    n_intervals: int = 48,
    base_price: float = 10.0,
    volume_mean: float = 500.0,
    noise_std: float = 0.001,
    stock_id: str = "S00",
) -> RecordPanel:
    """Record panel whose mid follows the price-discovery equation.

    log p_t = alpha + beta log p_{t-1} + gamma rbook_{t-1} + lam r_{t-1}
    + eps, with alpha = alpha_scale * (1 - beta) * log(base_price) so the
    level stays near the base price, and book-implied returns computed from
    the constant shape parameters and exogenous volumes.
    """
    if not abs(beta) < 1:
        raise InvalidConfig("|beta| must be below 1 for a stable panel")
    rng = _rng(seed, _STREAM_DISCOVERY)
    alpha = alpha_scale * (1.0 - beta) * np.log(base_price)
    panel = RecordPanel(n_intervals)
    for d in range(n_days):
        v_buy = rng.exponential(volume_mean, n_intervals)
        v_sell = rng.exponential(volume_mean, n_intervals)
        r_book = W_ask * np.power(v_buy, c_ask) - W_bid * np.power(v_sell, c_bid)
        eps = rng.normal(0.0, noise_std, n_intervals)
        logp = np.empty(n_intervals)
        logp[0] = np.log(base_price) + eps[0]
        if n_intervals > 1:
            logp[1] = alpha + beta * logp[0] + eps[1]
        for i in range(2, n_intervals):
            logp[i] = (
                alpha
                + beta * logp[i - 1]
                + gamma * r_book[i - 1]
                + lam * (logp[i - 1] - logp[i - 2])
                + eps[i]
            )
        r = np.concatenate([[np.nan], np.diff(logp)])
        day = panel.day(stock_id, f"D{d:03d}")
        day["mid"][:] = np.exp(logp)
        day["r"][:] = r
        day["g"][:] = 0.0
        day["c_bid"][:] = c_bid
        day["c_ask"][:] = c_ask
        day["W_bid"][:] = W_bid
        day["W_ask"][:] = W_ask
        day["v_buy"][:] = v_buy
        day["v_sell"][:] = v_sell
    return panel
