"""Limit-order-book shape estimation and interval statistics.

Fits the deviation law w = W * D^c to five-level book snapshots, assembles
per-interval panels, and runs the downstream statistics: summary tables,
panel autocorrelations with a long-memory fit, fluctuation AR(1), intraday
profiles, dynamic-adjustment regressions, and the price-discovery regression.
"""

from .book import (
    N_LEVELS,
    SIDES,
    BookSnapshot,
    IntervalWindow,
    SideCurve,
    WindowGrid,
    build_side_curve,
    build_windows,
    mid_quote,
    side_deviations,
)
from .convexity import (
    ConvexityEstimate,
    PowerLawRegressor,
    SummaryRow,
    WindowFailure,
    estimate_panel,
    fit_power_law,
    summarize_log_convexity,
)
from .errors import (
    BadHeader,
    BookShapeError,
    DegenerateEstimate,
    EmptyPanel,
    InsufficientData,
    InsufficientPositiveLags,
    InvalidConfig,
    InvalidSnapshot,
    MissingVolumes,
    NoCompleteDays,
    NoSeries,
    RankDeficient,
    SingularFit,
    StageError,
    TooFewObservations,
    UnknownSide,
)
from .io import (
    RejectedRow,
    Trade,
    TruthRow,
    assemble_trades,
    ingest_snapshots,
    read_panel_csv,
    read_records_csv,
    read_trades,
    read_truth_csv,
)
from .pipeline import PreparedPanel, RunConfig, RunResult, prepare_panel, run_pipeline
from .regression import (
    PanelRegressionSummary,
    RegressionResult,
    ar1_kappa,
    book_return,
    dynamic_adjustment,
    ols,
    price_discovery,
)
from .stats import (
    AcfCurve,
    IntervalRecord,
    IntervalStats,
    IntradayProfile,
    LongMemoryFit,
    RecordPanel,
    fit_long_memory,
    interval_stats,
    intraday_profile,
    kappa_series,
    normalize_intraday,
    panel_acf,
)
from .synthetic import (
    ConstantProcess,
    LinearDriftProcess,
    LogAr1Process,
    SynthConfig,
    generate,
    generate_day,
    generate_discovery_panel,
    generate_dynamic_panel,
    generate_kappa_panel,
    iter_days,
)

__version__ = "0.1.0"

__all__ = [
    "AcfCurve",
    "BadHeader",
    "BookShapeError",
    "BookSnapshot",
    "ConstantProcess",
    "ConvexityEstimate",
    "DegenerateEstimate",
    "EmptyPanel",
    "InsufficientData",
    "InsufficientPositiveLags",
    "IntervalRecord",
    "IntervalStats",
    "IntervalWindow",
    "IntradayProfile",
    "InvalidConfig",
    "InvalidSnapshot",
    "LinearDriftProcess",
    "LogAr1Process",
    "LongMemoryFit",
    "MissingVolumes",
    "N_LEVELS",
    "NoCompleteDays",
    "NoSeries",
    "PanelRegressionSummary",
    "PowerLawRegressor",
    "PreparedPanel",
    "RankDeficient",
    "RecordPanel",
    "RegressionResult",
    "RejectedRow",
    "RunConfig",
    "RunResult",
    "SIDES",
    "SideCurve",
    "SingularFit",
    "StageError",
    "SummaryRow",
    "SynthConfig",
    "TooFewObservations",
    "Trade",
    "TruthRow",
    "UnknownSide",
    "WindowFailure",
    "WindowGrid",
    "ar1_kappa",
    "assemble_trades",
    "book_return",
    "build_side_curve",
    "build_windows",
    "dynamic_adjustment",
    "estimate_panel",
    "fit_long_memory",
    "fit_power_law",
    "generate",
    "generate_day",
    "generate_discovery_panel",
    "generate_dynamic_panel",
    "generate_kappa_panel",
    "ingest_snapshots",
    "interval_stats",
    "intraday_profile",
    "iter_days",
    "kappa_series",
    "mid_quote",
    "normalize_intraday",
    "ols",
    "panel_acf",
    "prepare_panel",
    "price_discovery",
    "read_panel_csv",
    "read_records_csv",
    "read_trades",
    "read_truth_csv",
    "run_pipeline",
    "side_deviations",
    "summarize_log_convexity",
    "__version__",
]
