"""Preliminary review-flag rule over scored markets.

The rule is deliberately conjunctive and strict: a market is flagged for
human review only if the event-anchored score exceeds ``ils_threshold`` AND
at least one short-window variant exceeds ``short_window_threshold``. A
short window absent from the report (no price coverage there) never
satisfies the second conjunct. This is a starting point for calibration,
shipped as a default config — not a validated detector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import LeakscoreError
from .scoring import Disposition, IlsReport, format_duration

__all__ = ["NotScoredError", "DetectorConfig", "DetectionResult", "apply_rule"]


class NotScoredError(LeakscoreError):
    """The detection rule needs an in-scope report with a computed score."""


@dataclass(frozen=True)
class DetectorConfig:
    ils_threshold: float = 0.25
    short_window_threshold: float = 0.10
    short_windows: tuple[int, ...] = (1_800, 7_200)

    def __post_init__(self):
        if not self.ils_threshold > 0 or not self.short_window_threshold > 0:
            raise ValueError("detector thresholds must be > 0")


@dataclass(frozen=True)
class DetectionResult:
    """Flag decision with the inputs echoed for audit."""

    market_id: str
    flagged: bool
    reasons: tuple[str, ...]
    ils_dl: float
    short_windows: dict[int, float] = field(default_factory=dict)


def apply_rule(report: IlsReport, config: DetectorConfig = DetectorConfig()) -> DetectionResult:
    """Apply the review-flag rule to one scored market.

    Monotone in its inputs: raising the score or any short-window value can
    only turn not-flagged into flagged. Raises NotScoredError for reports
    without a score (classify and score first).
    """
    if report.disposition is not Disposition.IN_SCOPE or report.ils_dl is None:
        raise NotScoredError(
            f"{report.market_id}: no score to apply the rule to "
            f"(disposition {report.disposition.value})"
        )
    short = {w: report.window_variants[w] for w in config.short_windows
             if w in report.window_variants}
    score_hit = report.ils_dl > config.ils_threshold
    window_hits = {w: v for w, v in short.items() if v > config.short_window_threshold}
    flagged = score_hit and bool(window_hits)
    reasons: list[str] = []
    if flagged:
        reasons.append(
            f"score {report.ils_dl:.3f} > threshold {config.ils_threshold:.3f}"
        )
        for w in sorted(window_hits):
            reasons.append(
                f"window {format_duration(w)} variant {window_hits[w]:.3f} > "
                f"threshold {config.short_window_threshold:.3f}"
            )
    return DetectionResult(
        market_id=report.market_id,
        flagged=flagged,
        reasons=tuple(reasons),
        ils_dl=report.ils_dl,
        short_windows=short,
    )
