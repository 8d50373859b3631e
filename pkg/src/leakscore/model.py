"""Core domain types shared across the pipeline.

All records are immutable values validated at construction time: a
constructor either returns a record satisfying its invariants or raises a
named validation error. Timestamps are integer UTC epoch seconds (the finest
anchor granularity we need is one minute, so sub-second precision would only
invite float-time ambiguity). Prices are YES-side mid prices throughout;
NO-side inputs must be converted to ``1 - p`` before ingestion.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

__all__ = [
    "LeakscoreError",
    "ValidationError",
    "TimestampOrderError",
    "BadProbabilityError",
    "BadEnumError",
    "Outcome",
    "ResolutionType",
    "TradeSide",
    "MarketRecord",
    "EventAnchor",
    "PriceSeries",
    "TradeRecord",
    "ensure_timestamp",
    "ensure_probability",
    "validate_market",
    "validate_anchor",
    "validate_trade",
]

SECONDS_PER_DAY = 86_400


class LeakscoreError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LeakscoreError, ValueError):
    """A raw input violates a record invariant."""


class TimestampOrderError(ValidationError):
    """Timestamps out of order (t_open > t_resolve or t_open >= deadline)."""


class BadProbabilityError(ValidationError):
    """A probability-valued field falls outside [0, 1]."""


class BadEnumError(ValidationError):
    """A closed-enum field holds an unknown label."""


class Outcome(Enum):
    YES = "YES"
    NO = "NO"

    @property
    def as_price(self) -> float:
        """Resolution price: YES maps to 1.0, NO to 0.0."""
        return 1.0 if self is Outcome.YES else 0.0


class ResolutionType(Enum):
    DEADLINE = "deadline"
    EVENT = "event"
    UNCLASSIFIABLE = "unclassifiable"


class TradeSide(Enum):
    BUY_YES = "BUY_YES"
    SELL_YES = "SELL_YES"


def ensure_timestamp(value, field_name: str) -> int:
    """Coerce ``value`` to a non-negative integer UTC epoch second."""
    if isinstance(value, bool):
        raise ValidationError(f"{field_name}: expected integer seconds, got bool")
    try:
        as_int = int(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{field_name}: not an integer timestamp: {value!r}") from exc
    if isinstance(value, float) and value != as_int:
        raise ValidationError(f"{field_name}: timestamp has fractional seconds: {value!r}")
    if isinstance(value, str) and value.strip() != str(as_int):
        # reject accidental float strings like "100.5"
        try:
            if float(value) != as_int:
                raise ValidationError(f"{field_name}: timestamp has fractional seconds: {value!r}")
        except ValueError:
            raise ValidationError(f"{field_name}: not an integer timestamp: {value!r}")
    if as_int < 0:
        raise ValidationError(f"{field_name}: timestamp must be non-negative, got {as_int}")
    return as_int


def ensure_probability(value, field_name: str) -> float:
    """Coerce ``value`` to a float in [0, 1]."""
    try:
        p = float(value)
    except (TypeError, ValueError) as exc:
        raise BadProbabilityError(f"{field_name}: not a number: {value!r}") from exc
    if not 0.0 <= p <= 1.0:
        raise BadProbabilityError(f"{field_name}: must lie in [0, 1], got {p}")
    return p


def _ensure_enum(enum_cls, value, field_name: str):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError as exc:
        allowed = ", ".join(m.value for m in enum_cls)
        raise BadEnumError(f"{field_name}: {value!r} not one of {{{allowed}}}") from exc


@dataclass(frozen=True)
class MarketRecord:
    """One contract: identity, anchors known from market metadata, outcome.

    Invariants: ``t_open <= t_resolve`` and ``t_open < deadline``. The
    category is an open string label (regulatory sub-categories need no
    schema change); resolution_type and outcome are closed enums.
    """

    market_id: str
    question: str
    category: str
    resolution_type: ResolutionType
    t_open: int
    deadline: int
    t_resolve: int
    outcome: Outcome
    cumulative_volume_usd: float

    def __post_init__(self):
        if not self.market_id:
            raise ValidationError("market_id must be non-empty")
        if self.t_open > self.t_resolve:
            raise TimestampOrderError(
                f"{self.market_id}: t_open ({self.t_open}) > t_resolve ({self.t_resolve})"
            )
        if self.t_open >= self.deadline:
            raise TimestampOrderError(
                f"{self.market_id}: t_open ({self.t_open}) >= deadline ({self.deadline})"
            )
        if self.cumulative_volume_usd < 0:
            raise ValidationError(
                f"{self.market_id}: cumulative_volume_usd must be >= 0, "
                f"got {self.cumulative_volume_usd}"
            )

    @property
    def outcome01(self) -> float:
        return self.outcome.as_price


@dataclass(frozen=True)
class EventAnchor:
    """Recovered first-public-occurrence timestamp with provenance."""

    market_id: str
    t_event: int
    confidence: float
    source_count: int
    method: str

    def __post_init__(self):
        ensure_probability(self.confidence, "confidence")
        if self.source_count < 0:
            raise ValidationError(f"{self.market_id}: source_count must be >= 0")


@dataclass(frozen=True)
class PriceSeries:
    """Timestamped YES-side mid prices for one market.

    Stored as parallel tuples sorted by strictly increasing timestamp, so
    point-in-time lookups can bisect.
    """

    market_id: str
    timestamps: tuple[int, ...]
    mids: tuple[float, ...]

    def __post_init__(self):
        if len(self.timestamps) != len(self.mids):
            raise ValidationError(f"{self.market_id}: timestamps/mids length mismatch")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if b <= a:
                raise ValidationError(
                    f"{self.market_id}: price timestamps must be strictly increasing "
                    f"({a} then {b})"
                )
        for p in self.mids:
            if not 0.0 <= p <= 1.0:
                raise BadProbabilityError(f"{self.market_id}: mid {p} outside [0, 1]")

    @classmethod
    def from_points(cls, market_id: str, points) -> "PriceSeries":
        """Build from (timestamp, mid) pairs, sorting by timestamp."""
        ordered = sorted((ensure_timestamp(t, "timestamp"), ensure_probability(p, "mid"))
                         for t, p in points)
        return cls(
            market_id=market_id,
            timestamps=tuple(t for t, _ in ordered),
            mids=tuple(p for _, p in ordered),
        )

    def __len__(self) -> int:
        return len(self.timestamps)

    def points(self) -> Iterator[tuple[int, float]]:
        return zip(self.timestamps, self.mids)

    def index_at_or_before(self, t: int) -> int:
        """Index of the last observation at or before ``t``, or -1."""
        return bisect_right(self.timestamps, t) - 1


@dataclass(frozen=True)
class TradeRecord:
    """One fill: wallet, side, price, and positive USD notional."""

    market_id: str
    wallet_id: str
    timestamp: int
    side: TradeSide
    price: float
    notional_usd: float

    def __post_init__(self):
        ensure_probability(self.price, "price")
        if not self.notional_usd > 0:
            raise ValidationError(
                f"{self.market_id}/{self.wallet_id}: notional_usd must be > 0, "
                f"got {self.notional_usd}"
            )


def validate_market(
    market_id,
    question,
    category,
    resolution_type,
    t_open,
    deadline,
    t_resolve,
    outcome,
    cumulative_volume_usd,
) -> MarketRecord:
    """Build a MarketRecord from raw (possibly string) fields.

    Total over raw inputs: returns a valid record or raises a named
    ValidationError; never yields a record violating an invariant.
    """
    try:
        volume = float(cumulative_volume_usd)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{market_id}: bad cumulative_volume_usd: "
                              f"{cumulative_volume_usd!r}") from exc
    return MarketRecord(
        market_id=str(market_id),
        question=str(question),
        category=str(category),
        resolution_type=_ensure_enum(ResolutionType, resolution_type, "resolution_type"),
        t_open=ensure_timestamp(t_open, "t_open"),
        deadline=ensure_timestamp(deadline, "deadline"),
        t_resolve=ensure_timestamp(t_resolve, "t_resolve"),
        outcome=_ensure_enum(Outcome, outcome, "outcome"),
        cumulative_volume_usd=volume,
    )


def validate_anchor(market_id, t_event, confidence, source_count, method) -> EventAnchor:
    """Build an EventAnchor from raw fields, validating confidence bounds."""
    try:
        sources = int(source_count)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{market_id}: bad source_count: {source_count!r}") from exc
    return EventAnchor(
        market_id=str(market_id),
        t_event=ensure_timestamp(t_event, "t_event"),
        confidence=ensure_probability(confidence, "confidence"),
        source_count=sources,
        method=str(method),
    )


def validate_trade(market_id, wallet_id, timestamp, side, price, notional_usd) -> TradeRecord:
    """Build a TradeRecord from raw fields."""
    try:
        notional = float(notional_usd)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{market_id}: bad notional_usd: {notional_usd!r}") from exc
    return TradeRecord(
        market_id=str(market_id),
        wallet_id=str(wallet_id),
        timestamp=ensure_timestamp(timestamp, "timestamp"),
        side=_ensure_enum(TradeSide, side, "side"),
        price=ensure_probability(price, "price"),
        notional_usd=notional,
    )
