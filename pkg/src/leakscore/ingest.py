"""CSV ingestion, referential checks, and point-in-time price queries.

Four file kinds, one CSV per kind, each with a declared header row:

* ``markets.csv``  -- market_id,question,category,resolution_type,t_open,deadline,t_resolve,outcome,volume_usd
* ``anchors.csv``  -- market_id,t_event,confidence,source_count,method
* ``prices.csv``   -- market_id,timestamp,mid
* ``trades.csv``   -- market_id,wallet_id,timestamp,side,price,notional_usd

Timestamps are integer epoch seconds; decimals are parsed by ``float`` in
full precision (never locale-dependent). Price lookups use
last-observation-carried-forward semantics, never interpolation: the pipeline
reads single CLOB mids at anchors, and interpolating would invent prices.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import (
    LeakscoreError,
    MarketRecord,
    EventAnchor,
    PriceSeries,
    TradeRecord,
    ValidationError,
    ensure_probability,
    ensure_timestamp,
    validate_anchor,
    validate_market,
    validate_trade,
)

__all__ = [
    "ParseError",
    "DanglingReferenceError",
    "DuplicateMarketIdError",
    "CoverageGap",
    "EmptyInputError",
    "Dataset",
    "PriceLookup",
    "DEFAULT_MAX_STALENESS_SECONDS",
    "load_dataset",
    "price_at",
    "daily_vwap",
    "write_dataset",
    "MARKETS_HEADER",
    "ANCHORS_HEADER",
    "PRICES_HEADER",
    "TRADES_HEADER",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_STALENESS_SECONDS = 86_400

MARKETS_HEADER = [
    "market_id", "question", "category", "resolution_type",
    "t_open", "deadline", "t_resolve", "outcome", "volume_usd",
]
ANCHORS_HEADER = ["market_id", "t_event", "confidence", "source_count", "method"]
PRICES_HEADER = ["market_id", "timestamp", "mid"]
TRADES_HEADER = ["market_id", "wallet_id", "timestamp", "side", "price", "notional_usd"]


class ParseError(LeakscoreError):
    """A file row failed to parse; carries file, row number, and column."""

    def __init__(self, path, row_num: int, column: str, message: str):
        super().__init__(f"{path}: row {row_num}, column {column!r}: {message}")
        self.path = str(path)
        self.row_num = row_num
        self.column = column


class DanglingReferenceError(LeakscoreError):
    """An anchor/price/trade row references an unknown market_id."""


class DuplicateMarketIdError(LeakscoreError):
    """The same market_id appears twice in markets.csv (or anchors.csv)."""


class CoverageGap(LeakscoreError):
    """No usable price observation at or before the query time."""


class EmptyInputError(LeakscoreError):
    """An aggregation was asked for on an empty input."""


@dataclass(frozen=True)
class PriceLookup:
    """A resolved point-in-time price: value, source time, and staleness."""

    price: float
    observed_at: int
    staleness_seconds: int


@dataclass(frozen=True)
class Dataset:
    """All ingested inputs keyed by market_id, cross-references resolved.

    Every anchor, price series, and trade list resolves to a MarketRecord;
    dangling references are rejected at load time. Immutable by convention
    and safe to share across worker threads.
    """

    markets: Mapping[str, MarketRecord]
    anchors: Mapping[str, EventAnchor]
    prices: Mapping[str, PriceSeries]
    trades: Mapping[str, tuple[TradeRecord, ...]]


def _read_rows(path, expected_header: list[str]):
    """Yield (row_number, dict) for each data row, validating the header."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, expected_header[0], "missing header row")
        if [h.strip() for h in header] != expected_header:
            raise ParseError(
                path, 1, expected_header[0],
                f"bad header {header!r}, expected {expected_header!r}",
            )
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected_header):
                raise ParseError(path, row_num, expected_header[-1],
                                 f"expected {len(expected_header)} fields, got {len(row)}")
            yield row_num, dict(zip(expected_header, row))


def _parse_markets(path) -> dict[str, MarketRecord]:
    markets: dict[str, MarketRecord] = {}
    for row_num, row in _read_rows(path, MARKETS_HEADER):
        try:
            record = validate_market(
                market_id=row["market_id"],
                question=row["question"],
                category=row["category"],
                resolution_type=row["resolution_type"],
                t_open=row["t_open"],
                deadline=row["deadline"],
                t_resolve=row["t_resolve"],
                outcome=row["outcome"],
                cumulative_volume_usd=row["volume_usd"],
            )
        except ValidationError as exc:
            raise ParseError(path, row_num, "market_id", str(exc)) from exc
        if record.market_id in markets:
            raise DuplicateMarketIdError(
                f"{path}: duplicate market_id {record.market_id!r} at row {row_num}"
            )
        markets[record.market_id] = record
    return markets


def _parse_anchors(path, markets) -> dict[str, EventAnchor]:
    anchors: dict[str, EventAnchor] = {}
    for row_num, row in _read_rows(path, ANCHORS_HEADER):
        try:
            anchor = validate_anchor(
                market_id=row["market_id"],
                t_event=row["t_event"],
                confidence=row["confidence"],
                source_count=row["source_count"],
                method=row["method"],
            )
        except ValidationError as exc:
            raise ParseError(path, row_num, "market_id", str(exc)) from exc
        if anchor.market_id not in markets:
            raise DanglingReferenceError(
                f"{path}: row {row_num}: anchor references unknown market "
                f"{anchor.market_id!r}"
            )
        if anchor.market_id in anchors:
            raise DuplicateMarketIdError(
                f"{path}: duplicate anchor for market {anchor.market_id!r} at row {row_num}"
            )
        anchors[anchor.market_id] = anchor
    return anchors


def _parse_prices(path, markets) -> dict[str, PriceSeries]:
    points: dict[str, list[tuple[int, float]]] = {}
    for row_num, row in _read_rows(path, PRICES_HEADER):
        market_id = row["market_id"]
        if market_id not in markets:
            raise DanglingReferenceError(
                f"{path}: row {row_num}: price references unknown market {market_id!r}"
            )
        try:
            t = ensure_timestamp(row["timestamp"], "timestamp")
        except ValidationError as exc:
            raise ParseError(path, row_num, "timestamp", str(exc)) from exc
        try:
            mid = ensure_probability(row["mid"], "mid")
        except ValidationError as exc:
            raise ParseError(path, row_num, "mid", str(exc)) from exc
        points.setdefault(market_id, []).append((t, mid))
    series: dict[str, PriceSeries] = {}
    for market_id, pts in points.items():
        pts.sort(key=lambda tp: tp[0])
        for (t1, _), (t2, _) in zip(pts, pts[1:]):
            if t1 == t2:
                raise ParseError(path, 0, "timestamp",
                                 f"market {market_id!r} has duplicate observation at {t1}")
        series[market_id] = PriceSeries(
            market_id=market_id,
            timestamps=tuple(t for t, _ in pts),
            mids=tuple(p for _, p in pts),
        )
    return series


def _parse_trades(path, markets) -> dict[str, tuple[TradeRecord, ...]]:
    grouped: dict[str, list[TradeRecord]] = {}
    for row_num, row in _read_rows(path, TRADES_HEADER):
        try:
            trade = validate_trade(
                market_id=row["market_id"],
                wallet_id=row["wallet_id"],
                timestamp=row["timestamp"],
                side=row["side"],
                price=row["price"],
                notional_usd=row["notional_usd"],
            )
        except ValidationError as exc:
            raise ParseError(path, row_num, "market_id", str(exc)) from exc
        if trade.market_id not in markets:
            raise DanglingReferenceError(
                f"{path}: row {row_num}: trade references unknown market "
                f"{trade.market_id!r}"
            )
        grouped.setdefault(trade.market_id, []).append(trade)
    for trades in grouped.values():
        trades.sort(key=lambda tr: (tr.timestamp, tr.wallet_id))
    return {mid: tuple(trades) for mid, trades in grouped.items()}


def load_dataset(markets_file, anchors_file=None, prices_file=None, trades_file=None) -> Dataset:
    """Parse and cross-validate the four input files.

    ``anchors_file``, ``prices_file``, and ``trades_file`` may be None (or
    header-only files), in which case the corresponding maps are empty.
    Loading is deterministic: identical files produce an identical Dataset
    regardless of row order, because every map is stored keyed and sorted by
    market_id.
    """
    markets = _parse_markets(markets_file)
    anchors = _parse_anchors(anchors_file, markets) if anchors_file is not None else {}
    prices = _parse_prices(prices_file, markets) if prices_file is not None else {}
    trades = _parse_trades(trades_file, markets) if trades_file is not None else {}
    dataset = Dataset(
        markets={k: markets[k] for k in sorted(markets)},
        anchors={k: anchors[k] for k in sorted(anchors)},
        prices={k: prices[k] for k in sorted(prices)},
        trades={k: trades[k] for k in sorted(trades)},
    )
    log.info(
        "loaded %d markets, %d anchors, %d price rows, %d trades",
        len(dataset.markets), len(dataset.anchors),
        sum(len(s) for s in dataset.prices.values()),
        sum(len(t) for t in dataset.trades.values()),
    )
    return dataset


def price_at(series: PriceSeries, t: int,
             max_staleness_seconds: int = DEFAULT_MAX_STALENESS_SECONDS) -> PriceLookup:
    """Last observation at or before ``t`` (step semantics).

    Raises CoverageGap when no observation exists at or before ``t`` or when
    the latest one is older than ``max_staleness_seconds``. A CoverageGap at
    a required anchor is what classifies a market as having no usable price
    coverage.
    """
    idx = series.index_at_or_before(t)
    if idx < 0:
        raise CoverageGap(
            f"{series.market_id}: no price observation at or before {t}"
        )
    observed_at = series.timestamps[idx]
    staleness = t - observed_at
    if staleness > max_staleness_seconds:
        raise CoverageGap(
            f"{series.market_id}: latest observation at {observed_at} is "
            f"{staleness}s stale at {t} (max {max_staleness_seconds}s)"
        )
    return PriceLookup(price=series.mids[idx], observed_at=observed_at,
                       staleness_seconds=staleness)


def daily_vwap(trades: Sequence[TradeRecord]) -> list[tuple[date, float]]:
    """Volume-weighted average price per UTC day, zero-volume days omitted.

    For each UTC day (midnight boundary) with at least one trade, returns
    ``sum(price * notional) / sum(notional)`` over that day's trades,
    ordered by date.
    """
    if not trades:
        raise EmptyInputError("daily_vwap: no trades given")
    sums: dict[int, tuple[float, float]] = {}
    for tr in trades:
        day = tr.timestamp // 86_400
        value, volume = sums.get(day, (0.0, 0.0))
        sums[day] = (value + tr.price * tr.notional_usd, volume + tr.notional_usd)
    out = []
    for day in sorted(sums):
        value, volume = sums[day]
        d = datetime.fromtimestamp(day * 86_400, tz=timezone.utc).date()
        out.append((d, value / volume))
    return out


def _format_number(x: float) -> str:
    """Full-precision, locale-independent decimal rendering (round-trips)."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_dataset(
    out_dir,
    markets: Iterable[MarketRecord],
    anchors: Iterable[EventAnchor] = (),
    price_series: Iterable[PriceSeries] = (),
    trades: Iterable[TradeRecord] = (),
) -> dict[str, Path]:
    """Write records back out in the four ingestion schemas.

    Used by the simulator so synthetic corpora flow through the real loader
    unchanged, and by tests for serialize/parse round-trips. Returns the
    four file paths keyed by kind.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "markets": out_dir / "markets.csv",
        "anchors": out_dir / "anchors.csv",
        "prices": out_dir / "prices.csv",
        "trades": out_dir / "trades.csv",
    }
    with paths["markets"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MARKETS_HEADER)
        for m in markets:
            writer.writerow([
                m.market_id, m.question, m.category, m.resolution_type.value,
                m.t_open, m.deadline, m.t_resolve, m.outcome.value,
                _format_number(m.cumulative_volume_usd),
            ])
    with paths["anchors"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ANCHORS_HEADER)
        for a in anchors:
            writer.writerow([a.market_id, a.t_event, _format_number(a.confidence),
                             a.source_count, a.method])
    with paths["prices"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PRICES_HEADER)
        for series in price_series:
            for t, mid in series.points():
                writer.writerow([series.market_id, t, _format_number(mid)])
    with paths["trades"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRADES_HEADER)
        for tr in trades:
            writer.writerow([tr.market_id, tr.wallet_id, tr.timestamp, tr.side.value,
                             _format_number(tr.price), _format_number(tr.notional_usd)])
    return paths
