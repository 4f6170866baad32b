"""Shared builders for snapshots, windows, and law-true side curves."""

import numpy as np
import pytest

from bookshape.book import BookSnapshot, IntervalWindow, SideCurve

DEPTHS = (120.0, 80.0, 260.0, 340.0, 500.0)


def make_book(
    mid=10.0,
    *,
    stock_id="S00",
    day_id="D000",
    ts=0.0,
    offset=0.005,
    depths=DEPTHS,
    bid_depths=None,
    ask_depths=None,
):
    """Valid five-level book with quotes stepping ``offset`` away from ``mid``."""
    bids = tuple(mid - offset * (i + 1) for i in range(5))
    asks = tuple(mid + offset * (i + 1) for i in range(5))
    return BookSnapshot(
        stock_id=stock_id,
        day_id=day_id,
        ts=ts,
        bid_quotes=bids,
        bid_depths=tuple(bid_depths or depths),
        ask_quotes=asks,
        ask_depths=tuple(ask_depths or depths),
    )


def make_window(mids, *, stock_id="S00", day_id="D000", t=1, spacing=10.0, offset=0.005):
    """Window of one snapshot per mid, spaced on the sampling grid of interval ``t``."""
    ts0 = (t - 1) * 300.0
    snaps = [
        make_book(m, stock_id=stock_id, day_id=day_id, ts=ts0 + i * spacing, offset=offset)
        for i, m in enumerate(mids)
    ]
    return IntervalWindow(stock_id, day_id, t, snaps)


def law_curve(depth, W, c, side="ask", **ids):
    """Side curve whose points sit exactly on w = W * depth**c."""
    depth = np.asarray(depth, dtype=np.float64)
    return SideCurve(side=side, depth=depth, deviation=W * depth**c, **ids)


@pytest.fixture
def rng():
    return np.random.default_rng(271828)
