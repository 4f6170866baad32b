"""Least-squares engine and the panel regressions built on it.

One OLS routine serves every regression in the package: classical
homoskedastic standard errors, t statistics, and two-sided p-values from
the exact Student t distribution (scipy's incomplete-beta evaluation).
Panel variants fit per stock, then summarise coefficients across stocks
with sign-conditioned significance counts at the 5% and 10% levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np
from scipy import stats as scipy_stats

from .errors import (
    DegenerateEstimate,
    MissingVolumes,
    NoSeries,
    RankDeficient,
    TooFewObservations,
)

if TYPE_CHECKING:  # pragma: no cover - import only for annotations
    from .stats import IntervalRecord, RecordPanel

__all__ = [
    "RegressionResult",
    "PanelRegressionSummary",
    "ols",
    "ar1_kappa",
    "dynamic_adjustment",
    "book_return",
    "price_discovery",
    "AR1_NAMES",
    "DYNAMIC_NAMES",
    "DISCOVERY_NAMES",
]

AR1_NAMES = ("a", "b")
DYNAMIC_NAMES = ("alpha", "beta", "gamma", "lambda", "eta")
DISCOVERY_NAMES = ("alpha", "beta", "gamma", "lambda")


@dataclass
class RegressionResult:
    """One fitted least-squares regression."""

    names: tuple[str, ...]
    estimates: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r_squared: float
    n_obs: int
    df_resid: int


def ols(
    y: np.ndarray,
    X: np.ndarray,
    *,
    add_intercept: bool = True,
    names: tuple[str, ...] | None = None,
) -> RegressionResult:
    """Ordinary least squares with classical inference.

    ``X`` holds the regressors column-wise; with ``add_intercept`` a
    constant column is prepended.  Requires strictly more observations than
    coefficients plus one, and a full-rank design.  R-squared is centred
    when an intercept is present, uncentred otherwise, so it always lands
    in [0, 1].
    """
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("y must be one-dimensional and aligned with X")
    if not (np.isfinite(y).all() and np.isfinite(X).all()):
        raise ValueError("regression inputs must be finite")
    if add_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    n, k = X.shape
    if names is None:
        names = tuple(f"x{i}" for i in range(k))
        if add_intercept:
            names = ("const",) + names[1:]
    if len(names) != k:
        raise ValueError(f"{k} coefficients but {len(names)} names")
    if n <= k + 1:
        raise TooFewObservations(f"{n} observations for {k} coefficients")
    if np.linalg.matrix_rank(X) < k:
        raise RankDeficient("design matrix has linearly dependent columns")
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    rss = float(resid @ resid)
    df_resid = n - k
    sigma2 = rss / df_resid
    xtx_inv = np.linalg.inv(X.T @ X)
    std_errors = np.sqrt(np.maximum(np.diag(xtx_inv) * sigma2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = beta / std_errors
    p_values = 2.0 * scipy_stats.t.sf(np.abs(t_stats), df_resid)
    if add_intercept:
        tss = float(((y - y.mean()) ** 2).sum())
    else:
        tss = float(y @ y)
    if tss > 0.0:
        r_squared = min(max(1.0 - rss / tss, 0.0), 1.0)
    else:
        r_squared = 1.0 if rss <= 1e-300 else 0.0
    return RegressionResult(
        names=tuple(names),
        estimates=beta,
        std_errors=std_errors,
        t_stats=t_stats,
        p_values=np.asarray(p_values, dtype=np.float64),
        r_squared=r_squared,
        n_obs=n,
        df_resid=df_resid,
    )


@dataclass
class PanelRegressionSummary:
    """Per-stock regressions summarised across the panel.

    Significance counts are conditioned on the coefficient sign: a stock
    contributes to ``n_sig_neg_5`` for a coefficient when its estimate is
    negative with p < 0.05, and so on.  Counts at 5% never exceed the
    matching counts at 10%.
    """

    names: tuple[str, ...]
    per_stock: dict[str, RegressionResult]
    mean_estimates: np.ndarray
    n_sig_neg_5: np.ndarray
    n_sig_neg_10: np.ndarray
    n_sig_pos_5: np.ndarray
    n_sig_pos_10: np.ndarray
    mean_r_squared: float
    n_stocks: int
    skipped: tuple[str, ...] = ()


def summarize_per_stock(
    per_stock: Mapping[str, RegressionResult],
    skipped: tuple[str, ...] = (),
) -> PanelRegressionSummary:
    """Aggregate per-stock regression results into a panel summary."""
    if not per_stock:
        raise NoSeries("no stock produced a regression")
    stocks = sorted(per_stock)
    names = per_stock[stocks[0]].names
    est = np.vstack([per_stock[s].estimates for s in stocks])
    pv = np.vstack([per_stock[s].p_values for s in stocks])
    neg = est < 0.0
    pos = est > 0.0
    return PanelRegressionSummary(
        names=names,
        per_stock={s: per_stock[s] for s in stocks},
        mean_estimates=est.mean(axis=0),
        n_sig_neg_5=(neg & (pv < 0.05)).sum(axis=0),
        n_sig_neg_10=(neg & (pv < 0.10)).sum(axis=0),
        n_sig_pos_5=(pos & (pv < 0.05)).sum(axis=0),
        n_sig_pos_10=(pos & (pv < 0.10)).sum(axis=0),
        mean_r_squared=float(np.mean([per_stock[s].r_squared for s in stocks])),
        n_stocks=len(stocks),
        skipped=skipped,
    )


def _stack_pairs(rows: list[tuple[np.ndarray, np.ndarray]]) -> tuple[np.ndarray, np.ndarray]:
    ys = np.concatenate([r[0] for r in rows]) if rows else np.empty(0)
    xs = np.vstack([r[1] for r in rows]) if rows else np.empty((0, 0))
    return ys, xs


def ar1_kappa(
    panel: "RecordPanel | Mapping[tuple[str, str], np.ndarray]",
    side: str,
    *,
    min_pairs: int = 100,
) -> PanelRegressionSummary:
    """First-order autoregression of the convexity fluctuation, per stock.

    kappa_t = log c_t - log c_{t-1} within a day; pairs (kappa_t,
    kappa_{t-1}) never straddle days.  ``panel`` is either a record panel
    (kappa is derived from the requested side) or a ready-made mapping of
    per-(stock, day) kappa arrays.  Stocks with fewer than ``min_pairs``
    pairs are skipped and listed in the summary.
    """
    series = panel if isinstance(panel, Mapping) else panel.kappa(side)
    by_stock: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {}
    for (stock_id, day_id), kappa in sorted(series.items()):
        y = kappa[1:]
        x = kappa[:-1]
        ok = np.isfinite(y) & np.isfinite(x)
        if ok.any():
            by_stock.setdefault(stock_id, []).append((y[ok], x[ok][:, None]))
    per_stock: dict[str, RegressionResult] = {}
    skipped: list[str] = []
    for stock_id in sorted(by_stock):
        y, X = _stack_pairs(by_stock[stock_id])
        if y.shape[0] < min_pairs:
            skipped.append(stock_id)
            continue
        per_stock[stock_id] = ols(y, X, add_intercept=True, names=AR1_NAMES)
    if not per_stock:
        raise NoSeries(f"no stock has {min_pairs} kappa pairs on the {side} side")
    return summarize_per_stock(per_stock, tuple(skipped))


def dynamic_adjustment(
    panel: "RecordPanel",
    side: str,
    *,
    lag_market_vars: bool = False,
    min_obs: int | None = None,
) -> PanelRegressionSummary:
    """Partial-adjustment regression of log convexity, per stock.

    log c_t on [1, log c_{t-1}, kappa_{t-1}, r_t, g_t] within days, where
    kappa_{t-1} = log c_{t-1} - log c_{t-2}, r is the interval log return
    and g the interval realized variance.  The lagged fluctuation replaces
    the contemporaneous difference, which would be collinear with the
    response.  With ``lag_market_vars`` the return and variance enter at
    t-1 instead of t.  Stocks with too few usable triples are skipped.
    """
    names = DYNAMIC_NAMES
    if min_obs is None:
        min_obs = len(names) + 2
    by_stock: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {}
    log_c = panel.log_c(side)
    for (stock_id, day_id) in panel.keys():
        logc = log_c[(stock_id, day_id)]
        day = panel.day(stock_id, day_id)
        r = day["r"]
        g = day["g"]
        y = logc[2:]
        lag1 = logc[1:-1]
        kappa_lag = logc[1:-1] - logc[:-2]
        market_r = r[1:-1] if lag_market_vars else r[2:]
        market_g = g[1:-1] if lag_market_vars else g[2:]
        ok = (
            np.isfinite(y)
            & np.isfinite(lag1)
            & np.isfinite(kappa_lag)
            & np.isfinite(market_r)
            & np.isfinite(market_g)
        )
        if ok.any():
            X = np.column_stack([lag1[ok], kappa_lag[ok], market_r[ok], market_g[ok]])
            by_stock.setdefault(stock_id, []).append((y[ok], X))
    per_stock: dict[str, RegressionResult] = {}
    skipped: list[str] = []
    for stock_id in sorted(by_stock):
        y, X = _stack_pairs(by_stock[stock_id])
        if y.shape[0] < min_obs:
            skipped.append(stock_id)
            continue
        per_stock[stock_id] = ols(y, X, add_intercept=True, names=names)
    if not per_stock:
        raise NoSeries(f"no stock has {min_obs} usable intervals on the {side} side")
    return summarize_per_stock(per_stock, tuple(skipped))


def _power_term(W: float, c: float, volume: float) -> float:
    # volume**c with the 0**c = 0 convention for the zero-volume case
    if volume == 0.0:
        return 0.0
    return W * volume**c


def book_return(record: "IntervalRecord") -> float:
    """Book-implied return of one interval from fitted shapes and trade volumes.

    Pushing the interval's buy volume up the fitted ask curve and its sell
    volume down the fitted bid curve gives W_ask * V_buy**c_ask -
    W_bid * V_sell**c_bid.  Requires non-degenerate fits on both sides and
    both volumes present.
    """
    params = (record.W_bid, record.c_bid, record.W_ask, record.c_ask)
    if any(p is None or not np.isfinite(p) for p in params):
        raise DegenerateEstimate("book return needs fitted (W, c) on both sides")
    if record.c_bid < 0.0 or record.c_ask < 0.0:
        raise DegenerateEstimate("book return needs non-degenerate exponents")
    volumes = (record.v_buy, record.v_sell)
    if any(v is None or not np.isfinite(v) for v in volumes):
        raise MissingVolumes("book return needs buy and sell volumes")
    if record.v_buy < 0.0 or record.v_sell < 0.0:
        raise ValueError("volumes must be non-negative")
    return _power_term(record.W_ask, record.c_ask, record.v_buy) - _power_term(
        record.W_bid, record.c_bid, record.v_sell
    )


def _book_return_array(day: Mapping[str, np.ndarray]) -> np.ndarray:
    """Vectorised book-implied return; NaN wherever an ingredient is unusable."""
    W_a, c_a = day["W_ask"], day["c_ask"]
    W_b, c_b = day["W_bid"], day["c_bid"]
    v_buy, v_sell = day["v_buy"], day["v_sell"]
    ok = (
        np.isfinite(W_a)
        & np.isfinite(c_a)
        & np.isfinite(W_b)
        & np.isfinite(c_b)
        & (c_a >= 0.0)
        & (c_b >= 0.0)
        & np.isfinite(v_buy)
        & np.isfinite(v_sell)
        & (v_buy >= 0.0)
        & (v_sell >= 0.0)
    )
    out = np.full(W_a.shape, np.nan)
    with np.errstate(invalid="ignore"):
        buy = np.where(v_buy[ok] > 0.0, W_a[ok] * np.power(np.where(v_buy[ok] > 0, v_buy[ok], 1.0), c_a[ok]), 0.0)
        sell = np.where(v_sell[ok] > 0.0, W_b[ok] * np.power(np.where(v_sell[ok] > 0, v_sell[ok], 1.0), c_b[ok]), 0.0)
    out[ok] = buy - sell
    return out


def price_discovery(panel: "RecordPanel", *, min_obs: int | None = None) -> PanelRegressionSummary:
    """Mid-price regression on the lagged book-implied return, per stock.

    log p_t on [1, log p_{t-1}, r_book_{t-1}, r_{t-1}] within days, where p
    is the interval mean mid.  A coefficient on r_book above zero means the
    standing book carries information about the next price move beyond the
    realised return itself.
    """
    names = DISCOVERY_NAMES
    if min_obs is None:
        min_obs = len(names) + 2
    by_stock: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {}
    for (stock_id, day_id) in panel.keys():
        day = panel.day(stock_id, day_id)
        mid = day["mid"]
        with np.errstate(invalid="ignore", divide="ignore"):
            logp = np.where(mid > 0.0, np.log(np.where(mid > 0.0, mid, 1.0)), np.nan)
        r = day["r"]
        r_book = _book_return_array(day)
        y = logp[2:]
        lag1 = logp[1:-1]
        rb_lag = r_book[1:-1]
        r_lag = r[1:-1]
        ok = np.isfinite(y) & np.isfinite(lag1) & np.isfinite(rb_lag) & np.isfinite(r_lag)
        if ok.any():
            X = np.column_stack([lag1[ok], rb_lag[ok], r_lag[ok]])
            by_stock.setdefault(stock_id, []).append((y[ok], X))
    per_stock: dict[str, RegressionResult] = {}
    skipped: list[str] = []
    for stock_id in sorted(by_stock):
        y, X = _stack_pairs(by_stock[stock_id])
        if y.shape[0] < min_obs:
            skipped.append(stock_id)
            continue
        per_stock[stock_id] = ols(y, X, add_intercept=True, names=names)
    if not per_stock:
        raise NoSeries(f"no stock has {min_obs} usable intervals for price discovery")
    return summarize_per_stock(per_stock, tuple(skipped))
