"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "BookShapeError",
    "InvalidSnapshot",
    "InsufficientData",
    "SingularFit",
    "EmptyPanel",
    "NoSeries",
    "InsufficientPositiveLags",
    "NoCompleteDays",
    "TooFewObservations",
    "RankDeficient",
    "MissingVolumes",
    "DegenerateEstimate",
    "InvalidConfig",
    "BadHeader",
    "UnknownSide",
    "StageError",
]


class BookShapeError(Exception):
    """Base class for every error raised by this package."""


class InvalidSnapshot(BookShapeError):
    """A book snapshot violates a structural constraint.

    The ``reason`` attribute carries a stable machine-readable code used by
    the ingest rejection report: one of ``ParseError``, ``CrossedBook``,
    ``NonMonotoneBid``, ``NonMonotoneAsk``, ``NonPositiveDepth``,
    ``NonPositivePrice``.
    """

    def __init__(self, reason: str, message: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {message}" if message else reason)


class InsufficientData(BookShapeError):
    """Too few snapshots or pooled points to form or fit a curve."""


class SingularFit(BookShapeError):
    """The fit has no unique solution (for example, all depths equal)."""


class EmptyPanel(BookShapeError):
    """No usable estimates in the panel."""


class NoSeries(BookShapeError):
    """No (stock, day) series available for a panel statistic."""


class InsufficientPositiveLags(BookShapeError):
    """Fewer positive autocorrelation values than the log-log fit requires."""


class NoCompleteDays(BookShapeError):
    """No (stock, day) series covers every intraday interval."""


class TooFewObservations(BookShapeError):
    """Not enough observations for the requested regression."""


class RankDeficient(BookShapeError):
    """The design matrix does not have full column rank."""


class MissingVolumes(BookShapeError):
    """Buy or sell volume is absent where a book-implied return needs it."""


class DegenerateEstimate(BookShapeError):
    """A book-implied return was requested from a degenerate or missing fit."""


class InvalidConfig(BookShapeError):
    """A configuration value is out of range or internally inconsistent."""


class BadHeader(BookShapeError):
    """A CSV file does not start with the expected header row."""


class UnknownSide(BookShapeError):
    """A side label is not one of the recognised values."""


class StageError(BookShapeError):
    """A pipeline stage failed; wraps the original error with a stage tag."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
