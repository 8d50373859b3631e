"""Deterministic machine- and human-readable report emission.

JSON carries full-precision reals (round-trips bit-exactly through
``json.loads``); MARKDOWN renders scores and shares to three decimal places
and USD notionals with thousands separators. Sections always appear in the
order dispositions -> scores -> hazards -> wallets -> flags, with markets in
ascending market_id order, so identical inputs produce byte-identical output.

JSON schema (top level)::

    {
      "dispositions": {"funnel": {...}, "markets": [...]},
      "scores":       [per-market score reports],
      "hazards":      [per-category fits],
      "wallets":      {"window": ..., "markets": [...], "overlap": ...} | null,
      "flags":        [detection results]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .detector import DetectionResult
from .hazard import HazardFit
from .ingest import Dataset
from .scoring import Disposition, IlsReport, format_duration, funnel_counts
from .wallets import OverlapEntry, WalletVolume
from .model import SECONDS_PER_DAY

__all__ = [
    "DispositionRow",
    "WalletStats",
    "disposition_rows",
    "emit_report",
]

FUNNEL_LABELS = {
    "attempted": "markets attempted",
    "anchor_recovered": "event anchor recovered",
    "positive_tau": "positive event lead time",
    "price_covered": "price coverage at anchors",
    "score_defined": "score defined (total move >= epsilon)",
}


@dataclass(frozen=True)
class DispositionRow:
    market_id: str
    disposition: Disposition
    tau_days: Optional[float] = None
    anchor_confidence: Optional[float] = None


@dataclass(frozen=True)
class WalletStats:
    """Wallet section payload: per-market volumes/HHI plus optional overlap."""

    window: tuple[int, int]
    hhi_k: int
    volumes: dict[str, list[WalletVolume]]
    hhi: dict[str, float]
    overlap_pair: Optional[tuple[str, str]] = None
    overlap: Optional[list[OverlapEntry]] = None


def disposition_rows(
    dataset: Dataset, dispositions: dict[str, Disposition]
) -> list[DispositionRow]:
    """Join dispositions with anchor lead times for the report table."""
    rows = []
    for market_id in sorted(dispositions):
        market = dataset.markets[market_id]
        anchor = dataset.anchors.get(market_id)
        tau = None
        confidence = None
        if anchor is not None:
            tau = (anchor.t_event - market.t_open) / SECONDS_PER_DAY
            confidence = anchor.confidence
        rows.append(DispositionRow(market_id, dispositions[market_id], tau, confidence))
    return rows


def _fmt3(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.3f}"


def _usd(x: float) -> str:
    return f"{x:,.0f}"


def _score_dict(r: IlsReport) -> dict:
    difference = None
    if r.ils_dl is not None and r.ils_proxy is not None:
        difference = abs(r.ils_dl - r.ils_proxy)
    return {
        "market_id": r.market_id,
        "disposition": r.disposition.value,
        "p_open": r.p_open,
        "p_pre_event": r.p_pre_event,
        "p_resolve": r.p_resolve,
        "delta_pre": r.delta_pre,
        "delta_total": r.delta_total,
        "ils_dl": r.ils_dl,
        "ils_proxy": r.ils_proxy,
        "difference": difference,
        "window_variants": {format_duration(w): r.window_variants[w]
                            for w in sorted(r.window_variants)},
        "scope_flags": {
            "low_information": r.scope_flags.low_information,
            "edge_effect": r.scope_flags.edge_effect,
            "anchor_sensitive": r.scope_flags.anchor_sensitive,
        },
        "tau_days": r.tau_days,
    }


def _fit_dict(f: HazardFit) -> dict:
    return {
        "category": f.category,
        "n": f.n,
        "lambda_hat_per_day": f.lambda_hat,
        "ci95_low": f.ci95[0],
        "ci95_high": f.ci95[1],
        "half_life_days": f.half_life_days,
        "mean_tau_days": f.mean_tau_days,
        "median_tau_days": f.median_tau_days,
        "ks_statistic": f.ks_statistic,
        "ks_p": f.ks_p,
        "p_value_method": f.p_value_method,
        "verdict": f.verdict.value,
        "preliminary": f.preliminary,
    }


def _detection_dict(d: DetectionResult) -> dict:
    return {
        "market_id": d.market_id,
        "flagged": d.flagged,
        "reasons": list(d.reasons),
        "ils_dl": d.ils_dl,
        "short_windows": {format_duration(w): d.short_windows[w]
                          for w in sorted(d.short_windows)},
    }


def _wallet_dict(stats: WalletStats) -> dict:
    markets = []
    for market_id in sorted(stats.volumes):
        vols = stats.volumes[market_id]
        markets.append({
            "market_id": market_id,
            "total_notional_usd": sum(v.notional_usd for v in vols),
            "hhi_topk": stats.hhi.get(market_id),
            "volumes": [
                {"rank": v.rank, "wallet_id": v.wallet_id,
                 "notional_usd": v.notional_usd, "share": v.share}
                for v in vols
            ],
        })
    overlap = None
    if stats.overlap is not None and stats.overlap_pair is not None:
        overlap = {
            "market_a": stats.overlap_pair[0],
            "market_b": stats.overlap_pair[1],
            "wallets": [
                {"wallet_id": e.wallet_id, "notional_a": e.notional_a,
                 "notional_b": e.notional_b, "combined": e.combined}
                for e in stats.overlap
            ],
        }
    return {
        "window": [stats.window[0], stats.window[1]],
        "hhi_k": stats.hhi_k,
        "markets": markets,
        "overlap": overlap,
    }


def _markdown(
    dispositions: Sequence[DispositionRow],
    scores: Sequence[IlsReport],
    hazards: Sequence[HazardFit],
    wallet_stats: Optional[WalletStats],
    flags: Sequence[DetectionResult],
) -> str:
    lines: list[str] = ["# Market leakage report", ""]

    lines += ["## Dispositions", ""]
    if dispositions:
        counts = funnel_counts({row.market_id: row.disposition for row in dispositions})
        lines += ["| pipeline stage | n |", "| --- | ---: |"]
        for key in ("attempted", "anchor_recovered", "positive_tau",
                    "price_covered", "score_defined"):
            lines.append(f"| {FUNNEL_LABELS[key]} | {counts[key]} |")
        lines += ["", "| market | disposition | lead time (d) | anchor confidence |",
                  "| --- | --- | ---: | ---: |"]
        for row in dispositions:
            lines.append(
                f"| {row.market_id} | {row.disposition.value} | "
                f"{_fmt3(row.tau_days)} | {_fmt3(row.anchor_confidence)} |"
            )
    else:
        lines.append("(none)")
    lines.append("")

    lines += ["## Scores", ""]
    if scores:
        for r in scores:
            lines += [f"### {r.market_id}", "", "| quantity | value |", "| --- | ---: |"]
            lines.append(f"| opening mid | {_fmt3(r.p_open)} |")
            lines.append(f"| pre-event mid | {_fmt3(r.p_pre_event)} |")
            lines.append(f"| resolution value | {_fmt3(r.p_resolve)} |")
            lines.append(f"| pre-event move | {_fmt3(r.delta_pre)} |")
            lines.append(f"| total move | {_fmt3(r.delta_total)} |")
            lines.append(f"| score (event-anchored) | {_fmt3(r.ils_dl)} |")
            lines.append(f"| score (resolution proxy) | {_fmt3(r.ils_proxy)} |")
            if r.ils_dl is not None and r.ils_proxy is not None:
                lines.append(f"| difference | {_fmt3(abs(r.ils_dl - r.ils_proxy))} |")
            for w in sorted(r.window_variants):
                lines.append(
                    f"| window {format_duration(w)} | {_fmt3(r.window_variants[w])} |"
                )
            if r.tau_days is not None:
                lines.append(f"| event lead time (d) | {_fmt3(r.tau_days)} |")
            lines.append(
                f"| edge effect | {'yes' if r.scope_flags.edge_effect else 'no'} |"
            )
            lines.append(
                f"| anchor sensitive | "
                f"{'yes' if r.scope_flags.anchor_sensitive else 'no'} |"
            )
            lines.append("")
    else:
        lines += ["(none)", ""]

    lines += ["## Hazards", ""]
    if hazards:
        lines += [
            "| category | n | rate (/d) | 95% CI | half-life (d) | mean (d) "
            "| median (d) | KS D | KS p | verdict | preliminary |",
            "| --- | ---: | ---: | --- | ---: | ---: | ---: | ---: | ---: "
            "| --- | --- |",
        ]
        for f in hazards:
            lines.append(
                f"| {f.category} | {f.n} | {_fmt3(f.lambda_hat)} "
                f"| [{_fmt3(f.ci95[0])}, {_fmt3(f.ci95[1])}] "
                f"| {_fmt3(f.half_life_days)} | {_fmt3(f.mean_tau_days)} "
                f"| {_fmt3(f.median_tau_days)} | {_fmt3(f.ks_statistic)} "
                f"| {_fmt3(f.ks_p)} | {f.verdict.value} "
                f"| {'yes' if f.preliminary else 'no'} |"
            )
    else:
        lines.append("(none)")
    lines.append("")

    lines += ["## Wallets", ""]
    if wallet_stats is not None:
        lines.append(
            f"Window: {wallet_stats.window[0]} to {wallet_stats.window[1]} "
            f"(epoch seconds), HHI over top {wallet_stats.hhi_k}."
        )
        lines.append("")
        for market_id in sorted(wallet_stats.volumes):
            vols = wallet_stats.volumes[market_id]
            total = sum(v.notional_usd for v in vols)
            hhi = wallet_stats.hhi.get(market_id)
            lines.append(
                f"### {market_id} — total {_usd(total)} USD, "
                f"top-{wallet_stats.hhi_k} HHI {_fmt3(hhi)}"
            )
            lines += ["", "| rank | wallet | notional (USD) | share |",
                      "| ---: | --- | ---: | ---: |"]
            for v in vols[:10]:
                lines.append(
                    f"| {v.rank} | {v.wallet_id} | {_usd(v.notional_usd)} "
                    f"| {_fmt3(v.share)} |"
                )
            if len(vols) > 10:
                lines.append(f"| | ... {len(vols) - 10} more wallets | | |")
            lines.append("")
        if wallet_stats.overlap is not None and wallet_stats.overlap_pair is not None:
            a, b = wallet_stats.overlap_pair
            lines.append(f"### Overlap: {a} x {b}")
            lines += ["", f"| wallet | {a} (USD) | {b} (USD) | combined (USD) |",
                      "| --- | ---: | ---: | ---: |"]
            for e in wallet_stats.overlap:
                lines.append(
                    f"| {e.wallet_id} | {_usd(e.notional_a)} | {_usd(e.notional_b)} "
                    f"| {_usd(e.combined)} |"
                )
            lines.append("")
    else:
        lines += ["(none)", ""]

    lines += ["## Flags", ""]
    if flags:
        lines += ["| market | flagged | score | short windows | reasons |",
                  "| --- | --- | ---: | --- | --- |"]
        for d in flags:
            windows = ", ".join(
                f"{format_duration(w)}: {_fmt3(d.short_windows[w])}"
                for w in sorted(d.short_windows)
            )
            reasons = "; ".join(d.reasons) if d.reasons else ""
            lines.append(
                f"| {d.market_id} | {'yes' if d.flagged else 'no'} "
                f"| {_fmt3(d.ils_dl)} | {windows} | {reasons} |"
            )
    else:
        lines.append("(none)")
    lines.append("")
    return "\n".join(lines)


def emit_report(
    dispositions: Sequence[DispositionRow] = (),
    ils_reports: Sequence[IlsReport] = (),
    hazard_fits: Sequence[HazardFit] = (),
    wallet_stats: Optional[WalletStats] = None,
    detections: Sequence[DetectionResult] = (),
    fmt: str = "json",
) -> str:
    """Render one report document. ``fmt`` is 'json' or 'md'.

    A pure function of its inputs: identical inputs yield byte-identical
    output. Inputs are re-sorted defensively (markets ascending, hazards by
    category) so caller ordering cannot leak into the document.
    """
    rows = sorted(dispositions, key=lambda r: r.market_id)
    scores = sorted(ils_reports, key=lambda r: r.market_id)
    hazards = sorted(hazard_fits, key=lambda f: f.category)
    flags = sorted(detections, key=lambda d: d.market_id)
    if fmt == "md":
        return _markdown(rows, scores, hazards, wallet_stats, flags)
    if fmt != "json":
        raise ValueError(f"unknown report format {fmt!r} (expected 'json' or 'md')")
    funnel = funnel_counts({r.market_id: r.disposition for r in rows}) if rows else None
    doc = {
        "dispositions": {
            "funnel": funnel,
            "markets": [
                {"market_id": r.market_id, "disposition": r.disposition.value,
                 "tau_days": r.tau_days, "anchor_confidence": r.anchor_confidence}
                for r in rows
            ],
        },
        "scores": [_score_dict(r) for r in scores],
        "hazards": [_fit_dict(f) for f in hazards],
        "wallets": _wallet_dict(wallet_stats) if wallet_stats is not None else None,
        "flags": [_detection_dict(d) for d in flags],
    }
    return json.dumps(doc, indent=2) + "\n"
