"""Synthetic deadline-market generator: the independent oracle for testing.

Markets draw their event lead time from the exponential law the hazard
module fits, price paths front-load a controllable fraction ``phi`` of the
total move before the event, and trade tapes carry a controllable wallet
concentration. Because the generator knows its own ground truth (phi, the
true rate, per-wallet sums), pipeline outputs can be checked against it
end-to-end.

Construction inverts the score exactly: the pre-event ramp is linear in time
and reaches ``p_open + phi * (outcome01 - p_open)`` precisely at
``t_event - pre_event_offset`` (the score's lookup instant), so with zero
noise the recovered score equals phi. Noisy paths are clipped into
[0.001, 0.999]; the noiseless path is emitted exactly as constructed.

Randomness uses numpy's PCG64 via ``default_rng`` with per-market substreams
seeded as (seed, market_index, stream); generation is deterministic
regardless of worker count, and the generator algorithm is fixed across
releases so golden fixtures never drift.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ingest import write_dataset
from .model import (
    EventAnchor,
    MarketRecord,
    Outcome,
    PriceSeries,
    ResolutionType,
    SECONDS_PER_DAY,
    TradeRecord,
    TradeSide,
)

__all__ = ["SimSpec", "TradeTape", "gen_market", "gen_trades", "draw_event_times",
           "gen_corpus", "write_corpus", "MANIFEST_HEADER"]

MANIFEST_HEADER = ["market_id", "phi", "tau_days", "outcome"]

_PRICE_CLIP_LOW = 0.001
_PRICE_CLIP_HIGH = 0.999

# streams within a market's substream: 0 = event/path, 1 = trades
_PATH_STREAM = 0
_TRADES_STREAM = 1


@dataclass(frozen=True)
class SimSpec:
    """Generator parameters; identical specs yield byte-identical corpora.

    ``phi`` is the target front-loaded fraction of the total move, realized
    exactly at ``t_event - pre_event_offset_seconds``; ``phi_grid``, when
    set, overrides it per market (market i uses grid[i % len(grid)], logged
    in the manifest).
    """

    seed: int = 0
    lambda_true: float = 0.241
    deadline_days: float = 30.0
    p_open: float = 0.25
    phi: float = 0.4
    noise_sd: float = 0.0
    n_markets: int = 100
    n_wallets: int = 10
    concentration_exponent: float = 1.0
    phi_grid: Optional[tuple[float, ...]] = None
    category: str = "synthetic"
    pre_event_offset_seconds: int = 60
    t_open_base: int = 1_750_000_000
    market_volume_usd: float = 1_000_000.0

    def __post_init__(self):
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"phi must lie in [0, 1], got {self.phi}")
        if self.phi_grid is not None:
            for g in self.phi_grid:
                if not 0.0 <= g <= 1.0:
                    raise ValueError(f"phi_grid value outside [0, 1]: {g}")
        if not self.deadline_days > 0:
            raise ValueError("deadline_days must be > 0")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if not 0.0 <= self.p_open <= 1.0:
            raise ValueError(f"p_open must lie in [0, 1], got {self.p_open}")

    def phi_for(self, index: int) -> float:
        if self.phi_grid:
            return self.phi_grid[index % len(self.phi_grid)]
        return self.phi


@dataclass(frozen=True)
class TradeTape:
    """Generated trades plus the generator's own bookkeeping (the oracle)."""

    trades: tuple[TradeRecord, ...]
    per_wallet_notional: dict[str, float]
    total_notional: float
    window: tuple[int, int]


def _market_rng(spec: SimSpec, index: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, index, stream])


def _market_id(index: int) -> str:
    return f"sim-{index:06d}"


def _draw_tau_days(spec: SimSpec, index: int) -> float:
    """The market's event lead time draw; shared by all generator paths."""
    rng = _market_rng(spec, index, _PATH_STREAM)
    return float(rng.exponential(1.0 / spec.lambda_true))


def draw_event_times(spec: SimSpec) -> list[tuple[float, Outcome]]:
    """(tau_days, outcome) per market, identical to gen_market's draws.

    Markets whose event lands before the deadline resolve YES; later events
    are censored by the deadline and resolve NO. This is the fast path for
    large-corpus rate-recovery checks; gen_market uses the same per-market
    substream, so the two views of a corpus always agree.
    """
    out = []
    for index in range(spec.n_markets):
        tau = _draw_tau_days(spec, index)
        outcome = Outcome.YES if tau < spec.deadline_days else Outcome.NO
        out.append((tau, outcome))
    return out


def _ramp_value(spec: SimSpec, phi: float, outcome01: float,
                t: int, t_open: int, ramp_end: int) -> float:
    span = max(ramp_end - t_open, 1)
    frac = min(1.0, max(0.0, (t - t_open) / span))
    return spec.p_open + phi * (outcome01 - spec.p_open) * frac


def gen_market(spec: SimSpec, index: int) -> tuple[MarketRecord, Optional[EventAnchor], PriceSeries]:
    """Generate one market, its anchor (YES only), and its price path.

    The path holds observations at the market open, evenly spaced ramp
    points, the standard window anchors, and the pre-event lookup instant,
    then steps to the resolution value after the event.
    """
    rng = _market_rng(spec, index, _PATH_STREAM)
    tau_days = float(rng.exponential(1.0 / spec.lambda_true))
    market_id = _market_id(index)
    t_open = spec.t_open_base + index * 3_600
    deadline = t_open + round(spec.deadline_days * SECONDS_PER_DAY)
    phi = spec.phi_for(index)

    if tau_days < spec.deadline_days:
        outcome = Outcome.YES
        t_event = t_open + round(tau_days * SECONDS_PER_DAY)
        t_resolve = t_event + SECONDS_PER_DAY
        anchor = EventAnchor(market_id=market_id, t_event=t_event, confidence=0.8,
                             source_count=3, method="synthetic")
    else:
        outcome = Outcome.NO
        t_event = None
        t_resolve = deadline + 3_600
        anchor = None

    market = MarketRecord(
        market_id=market_id,
        question=f"synthetic deadline market {index}",
        category=spec.category,
        resolution_type=ResolutionType.DEADLINE,
        t_open=t_open,
        deadline=deadline,
        t_resolve=t_resolve,
        outcome=outcome,
        cumulative_volume_usd=spec.market_volume_usd,
    )

    outcome01 = outcome.as_price
    points: dict[int, float] = {t_open: spec.p_open}
    if t_event is not None:
        ramp_end = t_event - spec.pre_event_offset_seconds
        if ramp_end > t_open:
            span = ramp_end - t_open
            for step in range(1, 5):
                t = t_open + (span * step) // 5
                if t_open < t < ramp_end:
                    points[t] = _ramp_value(spec, phi, outcome01, t, t_open, ramp_end)
            for w in (86_400, 21_600, 7_200, 1_800):
                t = t_event - w
                if t_open < t <= ramp_end:
                    points[t] = _ramp_value(spec, phi, outcome01, t, t_open, ramp_end)
            points[ramp_end] = _ramp_value(spec, phi, outcome01, ramp_end,
                                           t_open, ramp_end)
        pre_event_times = sorted(points)
        if spec.noise_sd > 0:
            noise = rng.normal(0.0, spec.noise_sd, size=len(pre_event_times))
            for t, eps in zip(pre_event_times, noise):
                points[t] = float(np.clip(points[t] + eps,
                                          _PRICE_CLIP_LOW, _PRICE_CLIP_HIGH))
        if t_event > t_open:
            points[t_event] = outcome01
        if t_resolve > max(t_event, t_open):
            points[t_resolve] = outcome01
    else:
        mid_t = t_open + (deadline - t_open) // 2
        points[mid_t] = spec.p_open
        if spec.noise_sd > 0:
            noise = rng.normal(0.0, spec.noise_sd, size=2)
            for t, eps in zip(sorted(points), noise):
                points[t] = float(np.clip(points[t] + eps,
                                          _PRICE_CLIP_LOW, _PRICE_CLIP_HIGH))
        points[t_resolve] = outcome01

    ordered = sorted(points.items())
    series = PriceSeries(
        market_id=market_id,
        timestamps=tuple(t for t, _ in ordered),
        mids=tuple(p for _, p in ordered),
    )
    return market, anchor, series


def gen_trades(spec: SimSpec, market: MarketRecord) -> TradeTape:
    """Trade tape with power-law wallet concentration for one market.

    Wallet i receives a share proportional to ``(i + 1) ** -exponent`` of
    the market's cumulative volume (exponent 0 means equal wallets). Trades
    land inside the declared settlement window (the day before resolution);
    the returned per-wallet sums are exact, so aggregation downstream can be
    compared against them without tolerance.
    """
    index = int(market.market_id.rsplit("-", 1)[1])
    rng = _market_rng(spec, index, _TRADES_STREAM)
    n = spec.n_wallets
    if n < 1:
        raise ValueError("n_wallets must be >= 1")
    ranks = np.arange(1, n + 1, dtype=float)
    weights = ranks ** (-spec.concentration_exponent)
    shares = weights / weights.sum()
    window = (market.t_resolve - SECONDS_PER_DAY, market.t_resolve)
    span = window[1] - window[0]
    trades: list[TradeRecord] = []
    per_wallet: dict[str, float] = {}
    for i in range(n):
        wallet = f"w{index:06d}-{i:04d}"
        notional = float(spec.market_volume_usd * shares[i])
        per_wallet[wallet] = notional
        offsets = rng.integers(0, span + 1, size=2)
        price = float(rng.uniform(_PRICE_CLIP_LOW, _PRICE_CLIP_HIGH))
        if i % 2 == 0:
            # two half-notional fills: halves are exact in binary floats
            half = notional / 2.0
            trades.append(TradeRecord(market.market_id, wallet,
                                      window[0] + int(offsets[0]),
                                      TradeSide.BUY_YES, price, half))
            trades.append(TradeRecord(market.market_id, wallet,
                                      window[0] + int(offsets[1]),
                                      TradeSide.SELL_YES, price, half))
        else:
            trades.append(TradeRecord(market.market_id, wallet,
                                      window[0] + int(offsets[0]),
                                      TradeSide.BUY_YES, price, notional))
    trades.sort(key=lambda tr: (tr.timestamp, tr.wallet_id))
    return TradeTape(
        trades=tuple(trades),
        per_wallet_notional=per_wallet,
        total_notional=float(spec.market_volume_usd),
        window=window,
    )


def gen_corpus(spec: SimSpec, with_trades: bool = False):
    """Generate the full corpus: records, anchors, paths, manifest rows.

    Manifest rows carry the per-market ground truth (phi, exact lead-time
    draw, outcome) for oracle comparisons.
    """
    markets: list[MarketRecord] = []
    anchors: list[EventAnchor] = []
    series: list[PriceSeries] = []
    trades: list[TradeRecord] = []
    manifest: list[dict] = []
    for index in range(spec.n_markets):
        market, anchor, path = gen_market(spec, index)
        markets.append(market)
        if anchor is not None:
            anchors.append(anchor)
        series.append(path)
        if with_trades:
            trades.extend(gen_trades(spec, market).trades)
        manifest.append({
            "market_id": market.market_id,
            "phi": spec.phi_for(index),
            "tau_days": _draw_tau_days(spec, index),
            "outcome": market.outcome.value,
        })
    return markets, anchors, series, trades, manifest


def write_corpus(spec: SimSpec, out_dir, with_trades: bool = True) -> dict[str, Path]:
    """Write a corpus in the four ingestion schemas plus a manifest."""
    markets, anchors, series, trades, manifest = gen_corpus(spec, with_trades=with_trades)
    paths = write_dataset(out_dir, markets, anchors, series, trades)
    manifest_path = Path(out_dir) / "manifest.csv"
    with manifest_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for row in manifest:
            writer.writerow([row["market_id"], repr(float(row["phi"])),
                             repr(row["tau_days"]), row["outcome"]])
    paths["manifest"] = manifest_path
    return paths
