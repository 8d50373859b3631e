"""Leakage scores for deadline-resolved markets.

The headline score answers: what fraction of a market's total move from
opening price to resolution had already happened just before the underlying
event became publicly observable?

    delta_pre   = p(t_event - pre_event_offset) - p(t_open)
    delta_total = outcome01 - p(t_open)
    score       = delta_pre / delta_total

Windowed variants measure the move accumulated *inside* the trailing window
ending just before the event, as a fraction of the total move:

    variant(w) = (p_pre_event - p(t_event - w)) / delta_total

so a variant of zero means the price did not move at all in that window (no
last-minute spike), and a negative variant means the price was falling into
the event. The legacy proxy replaces the event anchor with
``t_resolve - proxy_offset`` and keeps the opening price as baseline.

The score is only interpretable under scope conditions: a minimum total move
``epsilon``, an opening price within ``edge_band`` of 0.5, and robustness to
small shifts of the event anchor.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .ingest import (
    CoverageGap,
    Dataset,
    DEFAULT_MAX_STALENESS_SECONDS,
    price_at,
)
from .model import (
    EventAnchor,
    LeakscoreError,
    MarketRecord,
    Outcome,
    PriceSeries,
    SECONDS_PER_DAY,
)

__all__ = [
    "ScoreConfig",
    "Disposition",
    "ScopeFlags",
    "IlsReport",
    "NotInScopeError",
    "AnchorOutOfRangeError",
    "classify_disposition",
    "compute_ils_dl",
    "compute_ils",
    "window_variants",
    "proxy_ils",
    "anchor_sensitivity",
    "edge_effect_flag",
    "score_dataset",
    "funnel_counts",
    "format_duration",
    "parse_duration",
]


class NotInScopeError(LeakscoreError):
    """Scoring was requested for a market whose disposition is not IN_SCOPE."""


class AnchorOutOfRangeError(LeakscoreError):
    """A news anchor falls outside [t_open, t_resolve]."""


class Disposition(Enum):
    """Why a market does or does not receive a score (first failing gate)."""

    IN_SCOPE = "in_scope"
    ANCHOR_UNRECOVERED = "anchor_unrecovered"
    NEGATIVE_TAU = "negative_tau"
    NO_PRICE_COVERAGE = "no_price_coverage"
    LOW_INFORMATION = "low_information"


@dataclass(frozen=True)
class ScoreConfig:
    """Scoring thresholds and anchor offsets.

    The sensitivity offsets are an artifact default ({+-5 min, +-30 min},
    tolerance 0.10), not an externally specified constant; everything else
    carries the published defaults (epsilon 0.05, edge band 0.4, confidence
    gate 0.7, pre-event offset one minute, proxy offset one hour).
    """

    epsilon: float = 0.05
    edge_band: float = 0.4
    anchor_confidence_min: float = 0.7
    pre_event_offset_seconds: int = 60
    proxy_offset_seconds: int = 3_600
    windows: tuple[int, ...] = (1_800, 7_200, 21_600, 86_400)
    sensitivity_offsets: tuple[int, ...] = (-1_800, -300, 300, 1_800)
    sensitivity_tolerance: float = 0.10
    max_staleness_seconds: int = DEFAULT_MAX_STALENESS_SECONDS

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.edge_band < 0.5:
            raise ValueError(f"edge_band must lie in (0, 0.5), got {self.edge_band}")
        if not self.pre_event_offset_seconds > 0:
            raise ValueError("pre_event_offset_seconds must be > 0")


@dataclass(frozen=True)
class ScopeFlags:
    low_information: bool = False
    edge_effect: bool = False
    anchor_sensitive: bool = False


@dataclass(frozen=True)
class IlsReport:
    """All score variants, deltas, and scope flags for one market.

    Reals are carried at full precision; rounding to three decimals happens
    only in the report emitter. ``window_variants`` is keyed by window length
    in seconds; a window with no price coverage is absent from the map, which
    is distinct from a genuine zero.
    """

    market_id: str
    disposition: Disposition
    p_open: float
    p_pre_event: Optional[float]
    p_resolve: float
    delta_pre: Optional[float]
    delta_total: float
    ils_dl: Optional[float]
    ils_proxy: Optional[float]
    window_variants: dict[int, float] = field(default_factory=dict)
    scope_flags: ScopeFlags = field(default_factory=ScopeFlags)
    tau_days: Optional[float] = None


def format_duration(seconds: int) -> str:
    """Compact duration label: 1800 -> '30m', 7200 -> '2h', 90 -> '90s'."""
    sign = "-" if seconds < 0 else ""
    s = abs(seconds)
    if s and s % 3_600 == 0:
        return f"{sign}{s // 3_600}h"
    if s and s % 60 == 0:
        return f"{sign}{s // 60}m"
    return f"{sign}{s}s"


def parse_duration(text: str) -> int:
    """Inverse of format_duration; also accepts 'd' for days."""
    raw = text.strip()
    sign = 1
    if raw.startswith(("+", "-")):
        sign = -1 if raw[0] == "-" else 1
        raw = raw[1:]
    units = {"s": 1, "m": 60, "h": 3_600, "d": SECONDS_PER_DAY}
    if raw and raw[-1] in units:
        return sign * int(raw[:-1]) * units[raw[-1]]
    return sign * int(raw)


def edge_effect_flag(p_open: float, config: ScoreConfig) -> bool:
    """True iff the opening price sits outside the interpretable band."""
    return abs(p_open - 0.5) > config.edge_band


def _lookup(series: PriceSeries, t: int, config: ScoreConfig) -> float:
    return price_at(series, t, config.max_staleness_seconds).price


def classify_disposition(
    market: MarketRecord,
    anchor: Optional[EventAnchor],
    series: Optional[PriceSeries],
    config: ScoreConfig,
) -> Disposition:
    """First failing gate, in fixed funnel order.

    1. anchor missing or confidence below the gate  -> ANCHOR_UNRECOVERED
    2. event at or before market open (tau <= 0)    -> NEGATIVE_TAU
    3. no usable price at t_open or the pre-event anchor -> NO_PRICE_COVERAGE
    4. total move smaller than epsilon              -> LOW_INFORMATION
    otherwise IN_SCOPE. Total over any valid market; never raises.
    """
    if anchor is None or anchor.confidence < config.anchor_confidence_min:
        return Disposition.ANCHOR_UNRECOVERED
    if anchor.t_event <= market.t_open:
        return Disposition.NEGATIVE_TAU
    if series is None:
        return Disposition.NO_PRICE_COVERAGE
    try:
        p_open = _lookup(series, market.t_open, config)
        _lookup(series, anchor.t_event - config.pre_event_offset_seconds, config)
    except CoverageGap:
        return Disposition.NO_PRICE_COVERAGE
    delta_total = market.outcome01 - p_open
    if abs(delta_total) < config.epsilon:
        return Disposition.LOW_INFORMATION
    return Disposition.IN_SCOPE


def window_variants(
    market: MarketRecord,
    anchor: EventAnchor,
    series: PriceSeries,
    config: ScoreConfig,
) -> dict[int, float]:
    """Per-window share of the total move accumulated inside the window.

    For each window ``w``: (p_pre_event - p(t_event - w)) / delta_total.
    A coverage gap at ``t_event - w`` yields an absent entry, never an error:
    absence must stay distinguishable from a genuine zero.
    """
    p_open = _lookup(series, market.t_open, config)
    p_pre = _lookup(series, anchor.t_event - config.pre_event_offset_seconds, config)
    delta_total = market.outcome01 - p_open
    out: dict[int, float] = {}
    for w in config.windows:
        try:
            p_w = _lookup(series, anchor.t_event - w, config)
        except CoverageGap:
            continue
        out[w] = (p_pre - p_w) / delta_total
    return out


def proxy_ils(market: MarketRecord, series: PriceSeries, config: ScoreConfig) -> float:
    """Legacy resolution-anchored score: numerator read at t_resolve - offset."""
    p_open = _lookup(series, market.t_open, config)
    p_proxy = _lookup(series, market.t_resolve - config.proxy_offset_seconds, config)
    delta_total = market.outcome01 - p_open
    return (p_proxy - p_open) / delta_total


def anchor_sensitivity(
    market: MarketRecord,
    anchor: EventAnchor,
    series: PriceSeries,
    config: ScoreConfig,
) -> tuple[float, bool]:
    """Max deviation of the score under shifted event anchors.

    Recomputes the score with t_event shifted by each configured offset;
    offsets without price coverage are skipped. Returns (max_deviation,
    sensitive), where sensitive means the deviation exceeds the tolerance.
    """
    p_open = _lookup(series, market.t_open, config)
    p_pre = _lookup(series, anchor.t_event - config.pre_event_offset_seconds, config)
    delta_total = market.outcome01 - p_open
    baseline = (p_pre - p_open) / delta_total
    max_deviation = 0.0
    for offset in config.sensitivity_offsets:
        shifted_t = anchor.t_event + offset - config.pre_event_offset_seconds
        try:
            p_shifted = _lookup(series, shifted_t, config)
        except CoverageGap:
            continue
        shifted = (p_shifted - p_open) / delta_total
        max_deviation = max(max_deviation, abs(shifted - baseline))
    return max_deviation, max_deviation > config.sensitivity_tolerance


def compute_ils_dl(
    market: MarketRecord,
    anchor: EventAnchor,
    series: PriceSeries,
    config: ScoreConfig,
) -> IlsReport:
    """Full event-anchored score report for an in-scope YES market.

    Callers classify first; anything not IN_SCOPE raises NotInScopeError.
    The score is defined for YES-resolved deadline markets only — for a
    NO resolution there is no principled pre-event numerator, so we refuse
    rather than guess an extension.
    """
    disposition = classify_disposition(market, anchor, series, config)
    if disposition is not Disposition.IN_SCOPE:
        raise NotInScopeError(f"{market.market_id}: disposition {disposition.value}")
    if market.outcome is Outcome.NO:
        raise NotInScopeError(
            f"{market.market_id}: score is defined for YES-resolved markets only"
        )
    p_open = _lookup(series, market.t_open, config)
    p_pre = _lookup(series, anchor.t_event - config.pre_event_offset_seconds, config)
    p_resolve = market.outcome01
    delta_pre = p_pre - p_open
    delta_total = p_resolve - p_open
    score = delta_pre / delta_total
    try:
        proxy = proxy_ils(market, series, config)
    except CoverageGap:
        proxy = None
    max_dev, sensitive = anchor_sensitivity(market, anchor, series, config)
    return IlsReport(
        market_id=market.market_id,
        disposition=disposition,
        p_open=p_open,
        p_pre_event=p_pre,
        p_resolve=p_resolve,
        delta_pre=delta_pre,
        delta_total=delta_total,
        ils_dl=score,
        ils_proxy=proxy,
        window_variants=window_variants(market, anchor, series, config),
        scope_flags=ScopeFlags(
            low_information=False,
            edge_effect=edge_effect_flag(p_open, config),
            anchor_sensitive=sensitive,
        ),
        tau_days=(anchor.t_event - market.t_open) / SECONDS_PER_DAY,
    )


def compute_ils(
    market: MarketRecord,
    t_news: int,
    series: PriceSeries,
    config: ScoreConfig,
) -> IlsReport:
    """News-anchored score: identical formula with p(t_news) as numerator.

    No pre-event offset is applied to the news anchor. The ratio lands in
    the report's ``ils_dl`` slot (same formula, different anchor); window
    variants and event lead time do not apply here.
    """
    if not market.t_open <= t_news <= market.t_resolve:
        raise AnchorOutOfRangeError(
            f"{market.market_id}: t_news {t_news} outside "
            f"[{market.t_open}, {market.t_resolve}]"
        )
    p_open = _lookup(series, market.t_open, config)
    p_news = _lookup(series, t_news, config)
    delta_total = market.outcome01 - p_open
    if abs(delta_total) < config.epsilon:
        raise NotInScopeError(
            f"{market.market_id}: |delta_total| {abs(delta_total):.4f} below "
            f"epsilon {config.epsilon}"
        )
    delta_pre = p_news - p_open
    try:
        proxy = proxy_ils(market, series, config)
    except CoverageGap:
        proxy = None
    return IlsReport(
        market_id=market.market_id,
        disposition=Disposition.IN_SCOPE,
        p_open=p_open,
        p_pre_event=p_news,
        p_resolve=market.outcome01,
        delta_pre=delta_pre,
        delta_total=delta_total,
        ils_dl=delta_pre / delta_total,
        ils_proxy=proxy,
        window_variants={},
        scope_flags=ScopeFlags(
            low_information=False,
            edge_effect=edge_effect_flag(p_open, config),
            anchor_sensitive=False,
        ),
        tau_days=None,
    )


def score_dataset(
    dataset: Dataset,
    config: ScoreConfig,
    jobs: int = 1,
) -> tuple[dict[str, Disposition], dict[str, IlsReport]]:
    """Classify every market and score the in-scope YES markets.

    Markets are processed independently (optionally across worker threads)
    and merged in ascending market_id order, so output is deterministic at
    any parallelism degree.
    """
    def one(market_id: str):
        market = dataset.markets[market_id]
        anchor = dataset.anchors.get(market_id)
        series = dataset.prices.get(market_id)
        disposition = classify_disposition(market, anchor, series, config)
        report = None
        if disposition is Disposition.IN_SCOPE and market.outcome is Outcome.YES:
            report = compute_ils_dl(market, anchor, series, config)
        return market_id, disposition, report

    ids = sorted(dataset.markets)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, ids))
    else:
        results = [one(market_id) for market_id in ids]
    results.sort(key=lambda item: item[0])
    dispositions = {market_id: disp for market_id, disp, _ in results}
    reports = {market_id: rep for market_id, _, rep in results if rep is not None}
    return dispositions, reports


def funnel_counts(dispositions: dict[str, Disposition]) -> dict[str, int]:
    """Cumulative pipeline funnel implied by the per-market dispositions."""
    attempted = len(dispositions)
    unrecovered = sum(1 for d in dispositions.values()
                      if d is Disposition.ANCHOR_UNRECOVERED)
    negative = sum(1 for d in dispositions.values() if d is Disposition.NEGATIVE_TAU)
    uncovered = sum(1 for d in dispositions.values()
                    if d is Disposition.NO_PRICE_COVERAGE)
    low_info = sum(1 for d in dispositions.values()
                   if d is Disposition.LOW_INFORMATION)
    recovered = attempted - unrecovered
    positive_tau = recovered - negative
    covered = positive_tau - uncovered
    return {
        "attempted": attempted,
        "anchor_recovered": recovered,
        "positive_tau": positive_tau,
        "price_covered": covered,
        "score_defined": covered - low_info,
    }
