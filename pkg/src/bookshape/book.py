"""Order-book snapshot types, log-deviation geometry, and interval windowing.

A snapshot holds the five best quotes and depths on each side of the book.
For a side of the book the shape observations are pairs (D_i, w_i) where
D_i is cumulative depth through level i and w_i is the absolute log distance
of the level-i quote from the mid quote.  Snapshots are grouped into
fixed-length intraday intervals on a regular sampling grid and pooled into
per-side curves for fitting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, Mapping, Sequence

import numpy as np

from .errors import InsufficientData, InvalidConfig, InvalidSnapshot

__all__ = [
    "N_LEVELS",
    "Side",
    "SIDES",
    "BookSnapshot",
    "IntervalWindow",
    "SideCurve",
    "WindowGrid",
    "mid_quote",
    "side_deviations",
    "build_side_curve",
    "build_windows",
]

N_LEVELS = 5

Side = Literal["bid", "ask"]
SIDES: tuple[Side, Side] = ("bid", "ask")

# Rejection reason codes, in the order checks are applied.
REASON_PARSE = "ParseError"
REASON_NON_POSITIVE_PRICE = "NonPositivePrice"
REASON_NON_POSITIVE_DEPTH = "NonPositiveDepth"
REASON_NON_MONOTONE_BID = "NonMonotoneBid"
REASON_NON_MONOTONE_ASK = "NonMonotoneAsk"
REASON_CROSSED = "CrossedBook"


def _validate_book(
    bid_quotes: Sequence[float],
    bid_depths: Sequence[float],
    ask_quotes: Sequence[float],
    ask_depths: Sequence[float],
    ts: float,
) -> None:
    """Raise InvalidSnapshot with a stable reason code on the first violation."""
    for levels in (bid_quotes, bid_depths, ask_quotes, ask_depths):
        if len(levels) != N_LEVELS:
            raise InvalidSnapshot(REASON_PARSE, f"expected {N_LEVELS} levels, got {len(levels)}")
        for x in levels:
            if not np.isfinite(x):
                raise InvalidSnapshot(REASON_PARSE, "non-finite level value")
    if not np.isfinite(ts) or ts < 0:
        raise InvalidSnapshot(REASON_PARSE, f"bad timestamp {ts!r}")
    if min(bid_quotes) <= 0 or min(ask_quotes) <= 0:
        raise InvalidSnapshot(REASON_NON_POSITIVE_PRICE, "quotes must be > 0")
    if min(bid_depths) <= 0 or min(ask_depths) <= 0:
        raise InvalidSnapshot(REASON_NON_POSITIVE_DEPTH, "depths must be > 0")
    for i in range(1, N_LEVELS):
        if bid_quotes[i] >= bid_quotes[i - 1]:
            raise InvalidSnapshot(REASON_NON_MONOTONE_BID, f"bid level {i + 1} not below level {i}")
    for i in range(1, N_LEVELS):
        if ask_quotes[i] <= ask_quotes[i - 1]:
            raise InvalidSnapshot(REASON_NON_MONOTONE_ASK, f"ask level {i + 1} not above level {i}")
    if bid_quotes[0] >= ask_quotes[0]:
        raise InvalidSnapshot(REASON_CROSSED, f"best bid {bid_quotes[0]} >= best ask {ask_quotes[0]}")


@dataclass(frozen=True)
class BookSnapshot:
    """One timestamped five-level book observation for a single stock.

    ``ts`` is seconds of trading time since the session open, with any
    mid-day break removed so the whole day maps onto one contiguous clock.
    Quotes are ordered best-first: bids strictly decreasing, asks strictly
    increasing, best bid below best ask, all depths positive.
    """

    stock_id: str
    day_id: str
    ts: float
    bid_quotes: tuple[float, ...]
    bid_depths: tuple[float, ...]
    ask_quotes: tuple[float, ...]
    ask_depths: tuple[float, ...]

    def __post_init__(self) -> None:
        _validate_book(self.bid_quotes, self.bid_depths, self.ask_quotes, self.ask_depths, self.ts)

    @property
    def best_bid(self) -> float:
        return self.bid_quotes[0]

    @property
    def best_ask(self) -> float:
        return self.ask_quotes[0]

    @property
    def mid(self) -> float:
        return (self.bid_quotes[0] + self.ask_quotes[0]) / 2.0


def mid_quote(snapshot: BookSnapshot) -> float:
    """Mid quote: arithmetic mean of the best bid and best ask."""
    return snapshot.mid


def side_deviations(snapshot: BookSnapshot, side: Side) -> tuple[np.ndarray, np.ndarray]:
    """Per-level shape observations (cumulative depth, log deviation) for one side.

    Returns arrays (D, w) where D_i is the depth cumulated from the best
    quote through level i and w_i = |log(q_i / mid)|.  Levels whose quote
    coincides with the mid (w = 0) carry no shape information and are
    dropped, so the arrays may be shorter than the book depth.
    """
    if side == "bid":
        quotes, depths = snapshot.bid_quotes, snapshot.bid_depths
    elif side == "ask":
        quotes, depths = snapshot.ask_quotes, snapshot.ask_depths
    else:
        raise ValueError(f"side must be 'bid' or 'ask', got {side!r}")
    w = np.abs(np.log(np.asarray(quotes, dtype=np.float64) / snapshot.mid))
    depth = np.cumsum(np.asarray(depths, dtype=np.float64))
    keep = w > 0.0
    return depth[keep], w[keep]


@dataclass
class IntervalWindow:
    """All snapshots of one stock falling in one intraday interval.

    ``t`` is the 1-based interval index within the day.  Snapshots are
    ordered by timestamp; the list may be empty when the interval had no
    observations at all (kept so gap accounting sees the hole).
    """

    stock_id: str
    day_id: str
    t: int
    snapshots: list[BookSnapshot] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.t < 1:
            raise ValueError(f"interval index must be >= 1, got {self.t}")
        for a, b in zip(self.snapshots, self.snapshots[1:]):
            if b.ts < a.ts:
                raise ValueError("window snapshots must be ordered by timestamp")

    @property
    def n_snapshots(self) -> int:
        return len(self.snapshots)


@dataclass
class SideCurve:
    """Pooled (depth, deviation) observations for one side over one window."""

    side: Side
    depth: np.ndarray
    deviation: np.ndarray
    stock_id: str | None = None
    day_id: str | None = None
    t: int | None = None

    @property
    def n_points(self) -> int:
        return int(self.depth.shape[0])


def build_side_curve(
    window: IntervalWindow,
    side: Side,
    *,
    min_snapshots: int = 20,
    min_points: int = 50,
) -> SideCurve:
    """Pool one side's per-snapshot shape observations over a window.

    Points keep snapshot order.  Raises InsufficientData when the window
    holds fewer than ``min_snapshots`` snapshots or fewer than
    ``min_points`` pooled points survive the zero-deviation drop.
    """
    if window.n_snapshots < min_snapshots:
        raise InsufficientData(
            f"window ({window.stock_id}, {window.day_id}, t={window.t}) has "
            f"{window.n_snapshots} snapshots, needs {min_snapshots}"
        )
    depths = []
    devs = []
    for snap in window.snapshots:
        d, w = side_deviations(snap, side)
        depths.append(d)
        devs.append(w)
    depth = np.concatenate(depths) if depths else np.empty(0)
    deviation = np.concatenate(devs) if devs else np.empty(0)
    if depth.shape[0] < min_points:
        raise InsufficientData(
            f"window ({window.stock_id}, {window.day_id}, t={window.t}, {side}) pooled "
            f"{depth.shape[0]} points, needs {min_points}"
        )
    return SideCurve(side, depth, deviation, window.stock_id, window.day_id, window.t)


@dataclass(frozen=True)
class WindowGrid:
    """Intraday sampling layout: interval length, snapshot spacing, interval count.

    The default grid is 48 intervals of 300 seconds sampled every 10
    seconds (30 slots per interval); with a two-session day the first half
    of the intervals covers the morning session and the second half the
    afternoon session on the break-free clock.
    """

    interval_seconds: int = 300
    spacing_seconds: int = 10
    n_intervals: int = 48

    def __post_init__(self) -> None:
        if self.interval_seconds <= 0 or self.spacing_seconds <= 0 or self.n_intervals <= 0:
            raise InvalidConfig("window grid values must be positive")
        if self.interval_seconds % self.spacing_seconds != 0:
            raise InvalidConfig(
                f"interval length {self.interval_seconds}s not divisible by "
                f"snapshot spacing {self.spacing_seconds}s"
            )

    @property
    def slots_per_interval(self) -> int:
        return self.interval_seconds // self.spacing_seconds

    @property
    def session_seconds(self) -> int:
        return self.interval_seconds * self.n_intervals

    def interval_of(self, ts: float) -> int | None:
        """1-based interval index for a timestamp, or None when out of session."""
        if ts < 0 or ts >= self.session_seconds:
            return None
        return int(ts // self.interval_seconds) + 1

    def slot_of(self, ts: float, t: int) -> int:
        """Nearest sampling slot within interval ``t`` (ties round up, ends clamp)."""
        offset = ts - (t - 1) * self.interval_seconds
        slot = int(np.floor(offset / self.spacing_seconds + 0.5))
        return min(max(slot, 0), self.slots_per_interval - 1)


def build_windows(
    snapshots: Iterable[BookSnapshot],
    grid: WindowGrid | None = None,
) -> tuple[list[IntervalWindow], int]:
    """Bucket snapshots onto the sampling grid and group them into windows.

    Every (stock, day) seen in the input yields all ``n_intervals`` windows,
    empty ones included, so downstream gap accounting is complete.  Within a
    window each sampling slot keeps at most one snapshot; when several land
    in the same slot the latest one wins.  Returns the canonically sorted
    window list and the count of in-book-valid snapshots that fell outside
    the session clock.
    """
    grid = grid or WindowGrid()
    by_slot: dict[tuple[str, str], dict[tuple[int, int], BookSnapshot]] = {}
    out_of_session = 0
    for snap in snapshots:
        t = grid.interval_of(snap.ts)
        if t is None:
            out_of_session += 1
            continue
        slot = grid.slot_of(snap.ts, t)
        day = by_slot.setdefault((snap.stock_id, snap.day_id), {})
        prev = day.get((t, slot))
        # later timestamp wins the slot; equal timestamps keep the later arrival
        if prev is None or snap.ts >= prev.ts:
            day[(t, slot)] = snap
    windows: list[IntervalWindow] = []
    for (stock_id, day_id) in sorted(by_slot):
        slots = by_slot[(stock_id, day_id)]
        for t in range(1, grid.n_intervals + 1):
            picked = [slots[key] for key in sorted(k for k in slots if k[0] == t)]
            picked.sort(key=lambda s: s.ts)
            windows.append(IntervalWindow(stock_id, day_id, t, picked))
    return windows, out_of_session
