"""Batch forensics for deadline-resolved prediction markets.

Ingests market/anchor/price/trade files, computes information-leakage
scores with scope conditions and dispositions, fits per-category exponential
lead-time distributions, reports wallet concentration, and ships a seeded
synthetic-market generator as its own test oracle.
"""

from .model import (
    BadEnumError,
    BadProbabilityError,
    EventAnchor,
    LeakscoreError,
    MarketRecord,
    Outcome,
    PriceSeries,
    ResolutionType,
    TimestampOrderError,
    TradeRecord,
    TradeSide,
    ValidationError,
    validate_anchor,
    validate_market,
    validate_trade,
)
from .ingest import (
    CoverageGap,
    DanglingReferenceError,
    Dataset,
    DuplicateMarketIdError,
    EmptyInputError,
    ParseError,
    PriceLookup,
    daily_vwap,
    load_dataset,
    price_at,
    write_dataset,
)
from .scoring import (
    Disposition,
    IlsReport,
    NotInScopeError,
    ScoreConfig,
    ScopeFlags,
    anchor_sensitivity,
    classify_disposition,
    compute_ils,
    compute_ils_dl,
    edge_effect_flag,
    funnel_counts,
    proxy_ils,
    score_dataset,
    window_variants,
)
from .hazard import (
    EmptySampleError,
    HazardConfig,
    HazardFit,
    NonPositiveTauError,
    SampleTooSmallError,
    TauSample,
    Verdict,
    ci_exponential,
    fit_category,
    fit_exponential,
    ks_exponential,
)
from .wallets import (
    OverlapEntry,
    SameMarketError,
    WalletVolume,
    cross_market_overlap,
    hhi_topk,
    wallet_volumes,
)
from .detector import DetectionResult, DetectorConfig, NotScoredError, apply_rule
from .report import WalletStats, disposition_rows, emit_report
from .simulate import SimSpec, TradeTape, draw_event_times, gen_market, gen_trades, write_corpus

__version__ = "0.1.0"
