"""Wallet-level volume, concentration, and cross-market overlap diagnostics.

All aggregations run over an explicit trade window — windows are inputs,
never inferred from the data. Buy and sell notionals both count toward
volume (flow is undirected), and shares are always relative to the full
windowed market total, not renormalized within a top-k slice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ingest import EmptyInputError
from .model import LeakscoreError, TradeRecord

__all__ = [
    "SameMarketError",
    "WalletVolume",
    "OverlapEntry",
    "wallet_volumes",
    "hhi_topk",
    "cross_market_overlap",
]


class SameMarketError(LeakscoreError):
    """Overlap was requested between two trade lists of the same market."""


@dataclass(frozen=True)
class WalletVolume:
    """One wallet's windowed notional, share of market total, and rank."""

    wallet_id: str
    notional_usd: float
    share: float
    rank: int


@dataclass(frozen=True)
class OverlapEntry:
    """A wallet active in both markets, with per-market and combined notional."""

    wallet_id: str
    notional_a: float
    notional_b: float
    combined: float


def _windowed_sums(trades: Sequence[TradeRecord], window: tuple[int, int]) -> dict[str, float]:
    t_from, t_to = window
    if t_from > t_to:
        raise ValueError(f"window from {t_from} > to {t_to}")
    sums: dict[str, float] = {}
    for tr in trades:
        if t_from <= tr.timestamp <= t_to:
            sums[tr.wallet_id] = sums.get(tr.wallet_id, 0.0) + tr.notional_usd
    return sums


def wallet_volumes(trades: Sequence[TradeRecord], window: tuple[int, int]) -> list[WalletVolume]:
    """Per-wallet notional over the window, ranked by descending volume.

    Shares are relative to the windowed market total and sum to 1. Ties on
    notional break by ascending wallet_id, so the ranking is a permutation-
    invariant function of the trade set. Empty window yields an empty list.
    """
    sums = _windowed_sums(trades, window)
    if not sums:
        return []
    total = sum(sums[w] for w in sorted(sums))
    ordered = sorted(sums.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        WalletVolume(wallet_id=w, notional_usd=v, share=v / total, rank=i)
        for i, (w, v) in enumerate(ordered, start=1)
    ]


def hhi_topk(volumes: Sequence[WalletVolume], k: int = 10) -> float:
    """Herfindahl-Hirschman concentration over the top-k ranked wallets.

    Sum of squared shares of the k largest wallets, shares taken against the
    full windowed total. With k >= number of wallets this is the full HHI;
    it is non-decreasing in k and bounded by (0, 1].
    """
    if not volumes:
        raise EmptyInputError("hhi_topk: no wallet volumes")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    top = sorted(volumes, key=lambda v: v.rank)[:k]
    return sum(v.share * v.share for v in top)


def cross_market_overlap(
    trades_a: Sequence[TradeRecord],
    trades_b: Sequence[TradeRecord],
    window: tuple[int, int],
) -> list[OverlapEntry]:
    """Wallets with positive windowed notional in both markets.

    Entries sort by combined notional descending, ties by wallet_id. The two
    trade lists must belong to distinct markets; "active" means any strictly
    positive windowed notional on either side of the book.
    """
    markets_a = {tr.market_id for tr in trades_a}
    markets_b = {tr.market_id for tr in trades_b}
    if markets_a and markets_b and markets_a & markets_b:
        shared = sorted(markets_a & markets_b)
        raise SameMarketError(f"overlap needs distinct markets, both sides have {shared}")
    sums_a = _windowed_sums(trades_a, window)
    sums_b = _windowed_sums(trades_b, window)
    shared_wallets = [w for w in sums_a if w in sums_b and sums_a[w] > 0 and sums_b[w] > 0]
    entries = [
        OverlapEntry(
            wallet_id=w,
            notional_a=sums_a[w],
            notional_b=sums_b[w],
            combined=sums_a[w] + sums_b[w],
        )
        for w in shared_wallets
    ]
    entries.sort(key=lambda e: (-e.combined, e.wallet_id))
    return entries
