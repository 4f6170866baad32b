"""Power-law book-shape fitting and panel estimation.

The shape model for one side of the book over one interval is

    w = W * D**c

with w the absolute log deviation of a quote from the mid and D the
cumulative depth at that quote.  Taking logs gives a line whose slope is
the convexity exponent c and whose intercept is log W; the fit minimises
the sum of squared log-space residuals.  The reciprocal rho = 1/W acts as
the order density near the mid.  c > 1 means the deviations grow faster
than linearly in depth (a convex profile); fits that come back with c < 0
are flagged degenerate rather than clamped, so no information is lost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import stats as scipy_stats
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .book import SIDES, IntervalWindow, Side, SideCurve, build_side_curve
from .errors import EmptyPanel, InsufficientData, SingularFit

__all__ = [
    "ConvexityEstimate",
    "WindowFailure",
    "SummaryRow",
    "PowerLawRegressor",
    "fit_power_law",
    "estimate_panel",
    "summarize_log_convexity",
]


@dataclass
class ConvexityEstimate:
    """Fitted shape parameters for one (stock, day, interval, side)."""

    stock_id: str | None
    day_id: str | None
    t: int | None
    side: Side
    W: float
    c: float
    rho: float
    r_squared: float
    n_points: int
    degenerate: bool


@dataclass
class WindowFailure:
    """A window (or one side of it) that produced no estimate, with the reason."""

    stock_id: str | None
    day_id: str | None
    t: int | None
    side: Side | None
    reason: str


def _loglog_line(depth: np.ndarray, deviation: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line through (log D, log w): (intercept, slope, r_squared).

    log D is centred before solving to keep the normal equations well
    conditioned, and the intercept is shifted back afterwards; the result
    is the ordinary unweighted least-squares line.
    """
    x = np.log(depth)
    y = np.log(deviation)
    x_mean = x.mean()
    xc = x - x_mean
    sxx = float(xc @ xc)
    if sxx <= 0.0:
        raise SingularFit("all depths equal; slope is not identified")
    slope = float(xc @ y) / sxx
    y_mean = y.mean()
    intercept = float(y_mean - slope * x_mean)
    resid = y - intercept - slope * x
    rss = float(resid @ resid)
    tss = float(((y - y_mean) ** 2).sum())
    if tss > 0.0:
        r_squared = min(max(1.0 - rss / tss, 0.0), 1.0)
    else:
        # constant deviations: the flat line fits them exactly
        r_squared = 1.0
    return intercept, slope, r_squared


def fit_power_law(curve: SideCurve, *, min_points: int = 2) -> ConvexityEstimate:
    """Fit w = W * D**c to one side curve by least squares in log-log space.

    Requires at least ``min_points`` observations with D > 0 and w > 0.
    The exponent is left unconstrained; a negative c is reported with
    ``degenerate=True``.  ``r_squared`` is the log-space fit quality.
    """
    n = curve.n_points
    if n < max(min_points, 2):
        raise InsufficientData(f"curve has {n} points, needs {max(min_points, 2)}")
    if np.any(curve.depth <= 0) or np.any(curve.deviation <= 0):
        raise ValueError("curve points must have positive depth and deviation")
    intercept, slope, r_squared = _loglog_line(curve.depth, curve.deviation)
    W = float(np.exp(intercept))
    return ConvexityEstimate(
        stock_id=curve.stock_id,
        day_id=curve.day_id,
        t=curve.t,
        side=curve.side,
        W=W,
        c=slope,
        rho=1.0 / W,
        r_squared=r_squared,
        n_points=n,
        degenerate=slope < 0.0,
    )


class PowerLawRegressor(BaseEstimator, RegressorMixin):
    """Scikit-learn style estimator for the one-sided power-law book shape.

    ``fit`` takes X of shape (n, 1) holding cumulative depths and y the
    matching positive log deviations, and estimates w = W * D**c in log-log
    space.  Fitted attributes: ``scale_`` (W), ``exponent_`` (c),
    ``density_`` (1/W), ``r_squared_`` (log-space), ``n_points_`` and
    ``degenerate_`` (exponent below zero).

    Parameters
    ----------
    min_points : int, default=2
        Minimum number of observations required to fit.
    """

    def __init__(self, min_points: int = 2):
        self.min_points = min_points

    def fit(self, X, y) -> "PowerLawRegressor":
        X = check_array(X, dtype=np.float64, ensure_2d=True)
        y = check_array(y, dtype=np.float64, ensure_2d=False)
        if X.shape[1] != 1:
            raise ValueError(f"X must have exactly one column (cumulative depth), got {X.shape[1]}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be one-dimensional and aligned with X")
        curve = SideCurve(side="ask", depth=X[:, 0], deviation=y)
        if np.any(curve.depth <= 0) or np.any(curve.deviation <= 0):
            raise ValueError("depths and deviations must be positive")
        est = fit_power_law(curve, min_points=self.min_points)
        self.scale_ = est.W
        self.exponent_ = est.c
        self.density_ = est.rho
        self.r_squared_ = est.r_squared
        self.n_points_ = est.n_points
        self.degenerate_ = est.degenerate
        self.n_features_in_ = 1
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "scale_")
        X = check_array(X, dtype=np.float64, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError("X must have exactly one column")
        return self.scale_ * np.power(X[:, 0], self.exponent_)


def estimate_panel(
    windows: Iterable[IntervalWindow],
    *,
    min_snapshots: int = 20,
    min_points: int = 50,
) -> tuple[list[ConvexityEstimate], list[WindowFailure]]:
    """Fit both sides of every window, never aborting on a bad window.

    A window below the snapshot threshold yields a single failure record;
    per-side data problems yield per-side failure records.  Both lists come
    back canonically sorted by (stock, day, interval, side).
    """
    estimates: list[ConvexityEstimate] = []
    failures: list[WindowFailure] = []
    for window in windows:
        if window.n_snapshots < min_snapshots:
            failures.append(
                WindowFailure(window.stock_id, window.day_id, window.t, None, "InsufficientData")
            )
            continue
        for side in SIDES:
            try:
                curve = build_side_curve(
                    window, side, min_snapshots=min_snapshots, min_points=min_points
                )
                estimates.append(fit_power_law(curve))
            except InsufficientData:
                failures.append(
                    WindowFailure(window.stock_id, window.day_id, window.t, side, "InsufficientData")
                )
            except SingularFit:
                failures.append(
                    WindowFailure(window.stock_id, window.day_id, window.t, side, "SingularFit")
                )
    key = lambda e: (e.stock_id or "", e.day_id or "", e.t or 0, e.side or "")
    estimates.sort(key=key)
    failures.sort(key=key)
    return estimates, failures


@dataclass
class SummaryRow:
    """Distribution summary of one log-convexity series."""

    series: str
    mean: float
    std: float
    median: float
    minimum: float
    maximum: float
    p_value: float
    n_obs: int


def _summary_row(name: str, values: np.ndarray) -> SummaryRow:
    n = values.shape[0]
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if n > 1 else float("nan")
    se = std / np.sqrt(n) if n > 1 else float("nan")
    if n > 1 and se > 0:
        t_stat = mean / se
        p_value = float(2.0 * scipy_stats.t.sf(abs(t_stat), n - 1))
    else:
        p_value = float("nan")
    return SummaryRow(
        series=name,
        mean=mean,
        std=std,
        median=float(np.median(values)),
        minimum=float(values.min()),
        maximum=float(values.max()),
        p_value=p_value,
        n_obs=n,
    )


def summarize_log_convexity(estimates: Iterable[ConvexityEstimate]) -> list[SummaryRow]:
    """Distribution of log c per side plus the paired bid-ask difference.

    Uses estimates with a positive exponent (degenerate fits cannot enter a
    log).  The difference row pairs bid and ask over windows where both
    sides are usable.  Each row reports mean, sample standard deviation,
    median, extremes, and the two-sided p-value of a one-sample t test of
    zero mean; the p-value is NaN when the series is constant or a single
    observation.
    """
    by_side: dict[Side, dict[tuple, float]] = {"bid": {}, "ask": {}}
    for est in estimates:
        if est.c > 0.0:
            by_side[est.side][(est.stock_id, est.day_id, est.t)] = np.log(est.c)
    if not by_side["bid"] and not by_side["ask"]:
        raise EmptyPanel("no estimates with positive exponent")
    rows: list[SummaryRow] = []
    if by_side["bid"]:
        rows.append(_summary_row("log_c_bid", _sorted_values(by_side["bid"])))
    if by_side["ask"]:
        rows.append(_summary_row("log_c_ask", _sorted_values(by_side["ask"])))
    shared = sorted(set(by_side["bid"]) & set(by_side["ask"]))
    if shared:
        diff = np.array([by_side["bid"][k] - by_side["ask"][k] for k in shared])
        rows.append(_summary_row("log_c_diff", diff))
    return rows


def _sorted_values(mapping: dict) -> np.ndarray:
    return np.array([mapping[k] for k in sorted(mapping)])
