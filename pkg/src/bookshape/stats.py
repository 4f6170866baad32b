"""Interval-level statistics and panel time-series measures.

Per interval: the mean mid quote, the log return against the previous
interval, and the realized variance of within-interval mid changes.  Per
panel: the lagged autocorrelation of a series averaged over (stock, day)
cells, a power-law fit of that autocorrelation decay, the within-day
convexity fluctuation, and the normalised intraday profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .book import SIDES, IntervalWindow, Side
from .errors import InsufficientPositiveLags, InvalidConfig, NoCompleteDays, NoSeries
from .regression import ols

__all__ = [
    "IntervalStats",
    "IntervalRecord",
    "RecordPanel",
    "AcfCurve",
    "LongMemoryFit",
    "IntradayProfile",
    "interval_stats",
    "panel_acf",
    "fit_long_memory",
    "kappa_series",
    "intraday_profile",
    "normalize_intraday",
]

NAN = float("nan")


@dataclass(frozen=True)
class IntervalStats:
    """Mid-quote statistics of one window."""

    mid: float
    r: float
    g: float


def interval_stats(window: IntervalWindow, prev_mid: float | None = None) -> IntervalStats:
    """Mean mid, interval log return, and realized variance for one window.

    The interval mid is the mean of the per-snapshot mids.  The return
    r = log(mid / prev_mid) needs the previous interval's mid from the same
    day and is NaN without one.  The realized variance g sums squared log
    changes between consecutive snapshots inside the window.
    """
    if not window.snapshots:
        raise ValueError("interval_stats needs at least one snapshot")
    mids = np.array([s.mid for s in window.snapshots], dtype=np.float64)
    mid = float(mids.mean())
    g = float(np.sum(np.log(mids[1:] / mids[:-1]) ** 2))
    r = float(np.log(mid / prev_mid)) if prev_mid is not None else NAN
    return IntervalStats(mid=mid, r=r, g=g)


@dataclass
class IntervalRecord:
    """One (stock, day, interval) row joining shape fits with price statistics.

    NaN marks an absent value: a side that failed or was degenerate, a
    return with no previous interval, or volumes with no trade data.
    """

    stock_id: str
    day_id: str
    t: int
    c_bid: float = NAN
    c_ask: float = NAN
    W_bid: float = NAN
    W_ask: float = NAN
    mid: float = NAN
    r: float = NAN
    g: float = NAN
    v_buy: float = NAN
    v_sell: float = NAN


_PANEL_FIELDS = ("c_bid", "c_ask", "W_bid", "W_ask", "mid", "r", "g", "v_buy", "v_sell")


class RecordPanel:
    """Interval records arranged as per-(stock, day) arrays over the interval grid.

    Each (stock, day) cell holds one NaN-padded array per field, indexed by
    interval (position i holds interval t = i + 1), so gaps stay visible to
    every downstream statistic.
    """

    def __init__(self, n_intervals: int = 48):
        if n_intervals < 1:
            raise InvalidConfig("panel needs at least one interval")
        self.n_intervals = n_intervals
        self._days: dict[tuple[str, str], dict[str, np.ndarray]] = {}

    @classmethod
    def from_records(cls, records: Iterable[IntervalRecord], n_intervals: int = 48) -> "RecordPanel":
        panel = cls(n_intervals)
        for rec in records:
            if not 1 <= rec.t <= n_intervals:
                raise ValueError(f"interval {rec.t} outside 1..{n_intervals}")
            day = panel.day(rec.stock_id, rec.day_id)
            for name in _PANEL_FIELDS:
                day[name][rec.t - 1] = getattr(rec, name)
        return panel

    def day(self, stock_id: str, day_id: str) -> dict[str, np.ndarray]:
        key = (stock_id, day_id)
        if key not in self._days:
            self._days[key] = {name: np.full(self.n_intervals, NAN) for name in _PANEL_FIELDS}
        return self._days[key]

    def keys(self) -> list[tuple[str, str]]:
        return sorted(self._days)

    def series(self, name: str) -> dict[tuple[str, str], np.ndarray]:
        if name not in _PANEL_FIELDS:
            raise KeyError(name)
        return {key: self._days[key][name] for key in self.keys()}

    def log_c(self, side: Side) -> dict[tuple[str, str], np.ndarray]:
        """log convexity per (stock, day); non-positive exponents become NaN."""
        if side not in SIDES:
            raise ValueError(f"side must be 'bid' or 'ask', got {side!r}")
        out = {}
        for key, c in self.series(f"c_{side}").items():
            safe = np.where(c > 0.0, c, 1.0)
            out[key] = np.where(c > 0.0, np.log(safe), NAN)
        return out

    def kappa(self, side: Side) -> dict[tuple[str, str], np.ndarray]:
        """Within-day convexity fluctuation per (stock, day)."""
        return kappa_series(self.series(f"c_{side}"))


def kappa_series(
    c_by_day: Mapping[tuple[str, str], np.ndarray],
) -> dict[tuple[str, str], np.ndarray]:
    """First difference of log convexity within each (stock, day) series.

    kappa_t = log c_t - log c_{t-1}; position 0 (the first interval of the
    day) is always NaN and any gap in c knocks out the two differences that
    touch it.  Day boundaries never mix because each series is one day.
    """
    out: dict[tuple[str, str], np.ndarray] = {}
    for key in sorted(c_by_day):
        c = np.asarray(c_by_day[key], dtype=np.float64)
        safe = np.where(c > 0.0, c, 1.0)
        logc = np.where(c > 0.0, np.log(safe), NAN)
        kappa = np.full(c.shape, NAN)
        kappa[1:] = logc[1:] - logc[:-1]
        out[key] = kappa
    return out


@dataclass
class AcfCurve:
    """Panel autocorrelation by lag.

    ``values[i]`` is the mean over contributing (stock, day) series of the
    within-day correlation at lag ``lags[i]``; ``n_contributing[i]`` counts
    the series whose correlation was defined at that lag.
    """

    lags: np.ndarray
    values: np.ndarray
    n_contributing: np.ndarray

    def __post_init__(self) -> None:
        if len(self.lags) and self.lags[0] < 1:
            raise ValueError("autocorrelation lags start at 1")


def panel_acf(
    series_by_day: Mapping[tuple[str, str], np.ndarray],
    *,
    max_lag: int = 40,
    min_pairs: int = 5,
) -> AcfCurve:
    """Mean within-day lagged correlation across (stock, day) series.

    For each lag the correlation uses the pairs (x_t, x_{t-lag}) with both
    values present in that day.  A series contributes to a lag only when it
    has at least ``min_pairs`` such pairs with variation on both sides;
    constant or too-short series simply lower ``n_contributing`` for the
    lags they cannot support.
    """
    keys = sorted(series_by_day)
    if not keys:
        raise NoSeries("panel autocorrelation needs at least one series")
    data = np.vstack([np.asarray(series_by_day[k], dtype=np.float64) for k in keys])
    n_series, length = data.shape
    if max_lag < 1:
        raise InvalidConfig("max_lag must be at least 1")
    if max_lag >= length:
        raise InvalidConfig(f"max_lag {max_lag} does not fit series of length {length}")
    if min_pairs < 2:
        raise InvalidConfig("min_pairs must be at least 2")
    lags = np.arange(1, max_lag + 1)
    values = np.full(max_lag, NAN)
    counts = np.zeros(max_lag, dtype=np.int64)
    for i, lag in enumerate(lags):
        x = data[:, lag:]
        z = data[:, :-lag]
        mask = np.isfinite(x) & np.isfinite(z)
        n = mask.sum(axis=1)
        n_safe = np.maximum(n, 1)
        xm = np.where(mask, x, 0.0)
        zm = np.where(mask, z, 0.0)
        x_mean = xm.sum(axis=1) / n_safe
        z_mean = zm.sum(axis=1) / n_safe
        xc = np.where(mask, x - x_mean[:, None], 0.0)
        zc = np.where(mask, z - z_mean[:, None], 0.0)
        var_x = (xc * xc).sum(axis=1)
        var_z = (zc * zc).sum(axis=1)
        cov = (xc * zc).sum(axis=1)
        ok = (n >= min_pairs) & (var_x > 0.0) & (var_z > 0.0)
        if ok.any():
            corr = cov[ok] / np.sqrt(var_x[ok] * var_z[ok])
            values[i] = float(corr.mean())
            counts[i] = int(ok.sum())
    return AcfCurve(lags=lags, values=values, n_contributing=counts)


@dataclass
class LongMemoryFit:
    """Power-law fit v = a * lag**(-b) of an autocorrelation curve.

    Fitted as log v + log lag = alpha - beta * log lag, so a = exp(alpha)
    and b = beta + 1.  Decay with b < 1 is slow enough that the
    autocorrelation is not summable: long memory.
    """

    a: float
    b: float
    alpha: float
    beta: float
    r_squared: float
    alpha_p: float
    beta_p: float
    n_lags: int
    n_dropped: int

    @property
    def long_memory(self) -> bool:
        return self.b < 1.0


def fit_long_memory(acf: AcfCurve, *, min_lags: int = 5) -> LongMemoryFit:
    """Fit the hyperbolic decay of a panel autocorrelation curve.

    Non-positive or undefined autocorrelation values cannot enter the log
    and are dropped (their count is reported); at least ``min_lags``
    positive values must survive.
    """
    values = np.asarray(acf.values, dtype=np.float64)
    lags = np.asarray(acf.lags, dtype=np.float64)
    keep = np.isfinite(values) & (values > 0.0)
    n_dropped = int((~keep).sum())
    if int(keep.sum()) < min_lags:
        raise InsufficientPositiveLags(
            f"{int(keep.sum())} positive autocorrelation values, need {min_lags}"
        )
    x = np.log(lags[keep])
    y = np.log(values[keep]) + x
    res = ols(y, x[:, None], add_intercept=True, names=("alpha", "slope"))
    alpha = float(res.estimates[0])
    slope = float(res.estimates[1])
    beta = -slope
    return LongMemoryFit(
        a=float(np.exp(alpha)),
        b=beta + 1.0,
        alpha=alpha,
        beta=beta,
        r_squared=res.r_squared,
        alpha_p=float(res.p_values[0]),
        beta_p=float(res.p_values[1]),
        n_lags=int(keep.sum()),
        n_dropped=n_dropped,
    )


def normalize_intraday(values: np.ndarray) -> np.ndarray:
    """Scale one complete day to its own mean, so the result averages to one."""
    values = np.asarray(values, dtype=np.float64)
    return values / values.mean()


@dataclass
class IntradayProfile:
    """Cross-day mean of the normalised intraday series."""

    t: np.ndarray
    values: np.ndarray
    n_days: int


def intraday_profile(c_by_day: Mapping[tuple[str, str], np.ndarray]) -> IntradayProfile:
    """Average intraday pattern over (stock, day) series with no gaps.

    Each complete day is divided by its own mean before averaging, so
    stocks with different convexity levels weigh equally; days with any
    missing or non-positive interval are excluded.
    """
    normalized = []
    for key in sorted(c_by_day):
        c = np.asarray(c_by_day[key], dtype=np.float64)
        if np.isfinite(c).all() and (c > 0.0).all():
            normalized.append(normalize_intraday(c))
    if not normalized:
        raise NoCompleteDays("no (stock, day) series covers every interval")
    stacked = np.vstack(normalized)
    return IntradayProfile(
        t=np.arange(1, stacked.shape[1] + 1),
        values=stacked.mean(axis=0),
        n_days=stacked.shape[0],
    )
