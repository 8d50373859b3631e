"""Command-line front end: ingestion -> scoring -> hazard -> wallets -> reports.

Subcommands::

    score     classify dispositions, score in-scope markets, apply the flag rule
    hazard    per-category exponential lead-time fits
    wallets   windowed wallet volumes, concentration, cross-market overlap
    simulate  generate a synthetic corpus in the four ingestion schemas
    report    full pipeline, one combined document

Every flag has a config-file equivalent (flat ``key = value`` lines, ``#``
comments); precedence is CLI > config file > built-in default. The
``LEAKSCORE_CONFIG`` environment variable names a default config file.
Exit codes: 0 success, 1 I/O failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .detector import DetectorConfig, apply_rule
from .hazard import HazardConfig, fit_all_categories, fit_category
from .ingest import load_dataset
from .model import LeakscoreError
from .report import WalletStats, disposition_rows, emit_report
from .scoring import ScoreConfig, parse_duration, score_dataset
from .simulate import SimSpec, write_corpus
from .wallets import cross_market_overlap, hhi_topk, wallet_volumes

__all__ = ["main"]

log = logging.getLogger("leakscore")

CONFIG_ENV_VAR = "LEAKSCORE_CONFIG"


def _load_config_file(path) -> dict[str, str]:
    """Flat key = value config lines; '#' starts a comment."""
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {line_num}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class Settings:
    """Merged view of CLI args, config file, and defaults (in that order)."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
        self.file_values = _load_config_file(config_path) if config_path else {}

    def get(self, key: str, default=None, convert=None):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.file_values.get(key)
            if value is not None and convert is not None:
                value = convert(value)
        if value is None:
            return default
        if convert is not None and isinstance(value, str):
            value = convert(value)
        return value

    def require(self, key: str, what: str):
        value = self.get(key)
        if value is None:
            raise LeakscoreError(f"{what} required (flag --{key.replace('_', '-')} "
                                 f"or config key {key})")
        return value


def _parse_timestamp(text: str) -> int:
    """Epoch seconds, or ISO-8601 'YYYY-MM-DD[THH:MM[:SS]]' read as UTC."""
    raw = str(text).strip()
    try:
        return int(raw)
    except ValueError:
        pass
    from datetime import datetime, timezone

    for fmt in ("%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S",
                "%Y-%m-%d %H:%M", "%Y-%m-%d"):
        try:
            dt = datetime.strptime(raw, fmt).replace(tzinfo=timezone.utc)
            return int(dt.timestamp())
        except ValueError:
            continue
    raise ValueError(f"cannot parse timestamp {text!r}")


def _parse_duration_list(text: str) -> tuple[int, ...]:
    return tuple(parse_duration(part) for part in str(text).split(",") if part.strip())


def _score_config(settings: Settings) -> ScoreConfig:
    return ScoreConfig(
        epsilon=settings.get("epsilon", 0.05, float),
        edge_band=settings.get("edge_band", 0.4, float),
        anchor_confidence_min=settings.get("confidence_min", 0.7, float),
        pre_event_offset_seconds=settings.get("pre_event_offset", 60, parse_duration),
        proxy_offset_seconds=settings.get("proxy_offset", 3_600, parse_duration),
        windows=settings.get("windows", (1_800, 7_200, 21_600, 86_400),
                             _parse_duration_list),
        sensitivity_offsets=settings.get("sensitivity_offsets",
                                         (-1_800, -300, 300, 1_800),
                                         _parse_duration_list),
        sensitivity_tolerance=settings.get("sensitivity_tolerance", 0.10, float),
        max_staleness_seconds=settings.get("max_staleness", 86_400, parse_duration),
    )


def _detector_config(settings: Settings) -> DetectorConfig:
    return DetectorConfig(
        ils_threshold=settings.get("ils_threshold", 0.25, float),
        short_window_threshold=settings.get("short_window_threshold", 0.10, float),
        short_windows=settings.get("short_windows", (1_800, 7_200),
                                   _parse_duration_list),
    )


def _hazard_config(settings: Settings) -> HazardConfig:
    return HazardConfig(
        alpha=settings.get("alpha", 0.05, float),
        level=settings.get("level", 0.95, float),
        bootstrap=settings.get("bootstrap", 0, int),
        preliminary_min=settings.get("preliminary_min", 20, int),
        anchor_confidence_min=settings.get("confidence_min", 0.7, float),
        seed=settings.get("seed", 0, int),
    )


def _load(settings: Settings, need_anchors=True, need_prices=True, need_trades=False):
    markets = settings.require("markets", "markets file")
    anchors = settings.get("anchors")
    prices = settings.get("prices")
    trades = settings.get("trades")
    if need_trades and trades is None:
        raise LeakscoreError("trades file required (flag --trades or config key trades)")
    del need_anchors, need_prices  # anchors/prices are always optional at load
    return load_dataset(markets, anchors, prices, trades)


def _write_out(settings: Settings, document: str) -> None:
    out = settings.get("out")
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(document, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(document)


def _wallet_markets(settings: Settings) -> list[str]:
    raw = settings.get("market")
    if raw is None:
        return []
    if isinstance(raw, str):
        raw = [raw]
    ids: list[str] = []
    for item in raw:
        ids.extend(part.strip() for part in str(item).split(",") if part.strip())
    return ids


def _compute_wallet_stats(settings: Settings, dataset, market_ids) -> WalletStats:
    window = (
        _parse_timestamp(settings.require("window_from", "window start")),
        _parse_timestamp(settings.require("window_to", "window end")),
    )
    k = settings.get("k", 10, int)
    volumes = {}
    hhi = {}
    for market_id in market_ids:
        if market_id not in dataset.markets:
            raise LeakscoreError(f"unknown market {market_id!r}")
        vols = wallet_volumes(dataset.trades.get(market_id, ()), window)
        volumes[market_id] = vols
        if vols:
            hhi[market_id] = hhi_topk(vols, k)
    overlap = None
    pair = None
    if len(market_ids) == 2:
        a, b = market_ids
        overlap = cross_market_overlap(dataset.trades.get(a, ()),
                                       dataset.trades.get(b, ()), window)
        pair = (a, b)
    return WalletStats(window=window, hhi_k=k, volumes=volumes, hhi=hhi,
                       overlap_pair=pair, overlap=overlap)


def cmd_score(args: argparse.Namespace) -> int:
    settings = Settings(args)
    dataset = _load(settings)
    config = _score_config(settings)
    jobs = settings.get("jobs", 1, int)
    dispositions, reports = score_dataset(dataset, config, jobs=jobs)
    detector = _detector_config(settings)
    flags = [apply_rule(reports[mid], detector) for mid in sorted(reports)]
    document = emit_report(
        dispositions=disposition_rows(dataset, dispositions),
        ils_reports=[reports[mid] for mid in sorted(reports)],
        detections=flags,
        fmt=settings.get("format", "json"),
    )
    _write_out(settings, document)
    return 0


def cmd_hazard(args: argparse.Namespace) -> int:
    settings = Settings(args)
    dataset = _load(settings)
    config = _hazard_config(settings)
    category = settings.get("category")
    if category:
        fits = [fit_category(dataset, category, config)]
    else:
        fits = fit_all_categories(dataset, config)
    document = emit_report(hazard_fits=fits, fmt=settings.get("format", "json"))
    _write_out(settings, document)
    return 0


def cmd_wallets(args: argparse.Namespace) -> int:
    settings = Settings(args)
    dataset = _load(settings, need_trades=True)
    market_ids = _wallet_markets(settings)
    if not market_ids:
        raise LeakscoreError("at least one --market id required")
    stats = _compute_wallet_stats(settings, dataset, market_ids)
    document = emit_report(wallet_stats=stats, fmt=settings.get("format", "json"))
    _write_out(settings, document)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    spec_path = settings.require("spec", "simulation spec file")
    raw = _load_config_file(spec_path)
    phi_grid = None
    phi = 0.4
    if "phi" in raw:
        parts = [p for p in raw["phi"].split(",") if p.strip()]
        if len(parts) > 1:
            phi_grid = tuple(float(p) for p in parts)
            phi = phi_grid[0]
        else:
            phi = float(parts[0])
    seed_override = settings.get("seed", None, int)
    spec = SimSpec(
        seed=seed_override if seed_override is not None else int(raw.get("seed", 0)),
        lambda_true=float(raw.get("lambda_true", 0.241)),
        deadline_days=float(raw.get("deadline_days", 30.0)),
        p_open=float(raw.get("p_open", 0.25)),
        phi=phi,
        noise_sd=float(raw.get("noise_sd", 0.0)),
        n_markets=int(raw.get("n_markets", 100)),
        n_wallets=int(raw.get("n_wallets", 10)),
        concentration_exponent=float(raw.get("concentration_exponent", 1.0)),
        phi_grid=phi_grid,
        category=raw.get("category", "synthetic"),
        pre_event_offset_seconds=parse_duration(raw.get("pre_event_offset", "60")),
        t_open_base=int(raw.get("t_open_base", 1_750_000_000)),
        market_volume_usd=float(raw.get("market_volume_usd", 1_000_000)),
    )
    out_dir = settings.require("out", "output directory")
    with_trades = raw.get("with_trades", "true").lower() in ("1", "true", "yes")
    paths = write_corpus(spec, out_dir, with_trades=with_trades)
    for kind in sorted(paths):
        log.info("wrote %s", paths[kind])
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    settings = Settings(args)
    dataset = _load(settings)
    config = _score_config(settings)
    jobs = settings.get("jobs", 1, int)
    dispositions, reports = score_dataset(dataset, config, jobs=jobs)
    detector = _detector_config(settings)
    flags = [apply_rule(reports[mid], detector) for mid in sorted(reports)]
    fits = fit_all_categories(dataset, _hazard_config(settings))
    stats = None
    if settings.get("window_from") is not None and settings.get("window_to") is not None:
        market_ids = _wallet_markets(settings)
        if not market_ids:
            market_ids = sorted(dataset.trades)
        if market_ids:
            stats = _compute_wallet_stats(settings, dataset, market_ids)
    document = emit_report(
        dispositions=disposition_rows(dataset, dispositions),
        ils_reports=[reports[mid] for mid in sorted(reports)],
        hazard_fits=fits,
        wallet_stats=stats,
        detections=flags,
        fmt=settings.get("format", "json"),
    )
    _write_out(settings, document)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file "
                        f"(default: ${CONFIG_ENV_VAR})")
    parser.add_argument("--format", choices=("json", "md"), help="output format")
    parser.add_argument("--out", help="output file (default: stdout)")


def _add_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--markets", help="markets.csv path")
    parser.add_argument("--anchors", help="anchors.csv path")
    parser.add_argument("--prices", help="prices.csv path")
    parser.add_argument("--trades", help="trades.csv path")


def _add_score_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, help="minimum |total move|")
    parser.add_argument("--edge-band", dest="edge_band", type=float,
                        help="max |p_open - 0.5| for interpretability")
    parser.add_argument("--confidence-min", dest="confidence_min", type=float,
                        help="anchor confidence gate")
    parser.add_argument("--windows", type=_parse_duration_list,
                        help="window list, e.g. 30m,2h,6h,24h")
    parser.add_argument("--proxy-offset", dest="proxy_offset", type=parse_duration,
                        help="proxy anchor offset before resolution, e.g. 1h")
    parser.add_argument("--pre-event-offset", dest="pre_event_offset",
                        type=parse_duration, help="lookup offset before the event")
    parser.add_argument("--sensitivity-offsets", dest="sensitivity_offsets",
                        type=_parse_duration_list,
                        help="anchor shift offsets, e.g. -30m,-5m,5m,30m")
    parser.add_argument("--sensitivity-tolerance", dest="sensitivity_tolerance",
                        type=float, help="max allowed score deviation under shifts")
    parser.add_argument("--max-staleness", dest="max_staleness", type=parse_duration,
                        help="max lookup staleness, e.g. 24h")
    parser.add_argument("--ils-threshold", dest="ils_threshold", type=float,
                        help="review-flag score threshold")
    parser.add_argument("--short-window-threshold", dest="short_window_threshold",
                        type=float, help="review-flag short-window threshold")
    parser.add_argument("--jobs", type=int, help="parallel scoring workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leakscore",
        description="Batch forensics for deadline prediction markets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="dispositions, scores, review flags")
    _add_inputs(p_score)
    _add_score_flags(p_score)
    _add_common(p_score)
    p_score.set_defaults(func=cmd_score)

    p_hazard = sub.add_parser("hazard", help="per-category lead-time fits")
    _add_inputs(p_hazard)
    p_hazard.add_argument("--category", help="fit a single category")
    p_hazard.add_argument("--alpha", type=float, help="GOF rejection level")
    p_hazard.add_argument("--bootstrap", type=int,
                          help="parametric bootstrap replicates (0 = asymptotic p)")
    p_hazard.add_argument("--confidence-min", dest="confidence_min", type=float)
    p_hazard.add_argument("--preliminary-min", dest="preliminary_min", type=int)
    p_hazard.add_argument("--seed", type=int, help="bootstrap RNG seed")
    _add_common(p_hazard)
    p_hazard.set_defaults(func=cmd_hazard)

    p_wallets = sub.add_parser("wallets", help="windowed wallet diagnostics")
    _add_inputs(p_wallets)
    p_wallets.add_argument("--market", action="append",
                           help="market id (repeat or comma-separate; two ids "
                                "adds the overlap section)")
    p_wallets.add_argument("--window-from", dest="window_from",
                           help="window start (epoch seconds or ISO UTC)")
    p_wallets.add_argument("--window-to", dest="window_to",
                           help="window end (epoch seconds or ISO UTC)")
    p_wallets.add_argument("--k", type=int, help="top-k for the HHI")
    _add_common(p_wallets)
    p_wallets.set_defaults(func=cmd_wallets)

    p_sim = sub.add_parser("simulate", help="generate a synthetic corpus")
    p_sim.add_argument("--spec", help="simulation spec file (flat key = value)")
    p_sim.add_argument("--seed", type=int, help="override the spec seed")
    p_sim.add_argument("--out", help="output directory for the corpus")
    p_sim.add_argument("--config", help="flat key = value config file")
    p_sim.set_defaults(func=cmd_simulate)

    p_report = sub.add_parser("report", help="full combined report")
    _add_inputs(p_report)
    _add_score_flags(p_report)
    p_report.add_argument("--alpha", type=float, help="GOF rejection level")
    p_report.add_argument("--bootstrap", type=int)
    p_report.add_argument("--preliminary-min", dest="preliminary_min", type=int)
    p_report.add_argument("--seed", type=int)
    p_report.add_argument("--market", action="append")
    p_report.add_argument("--window-from", dest="window_from")
    p_report.add_argument("--window-to", dest="window_to")
    p_report.add_argument("--k", type=int)
    _add_common(p_report)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        filename = exc.filename if exc.filename else exc
        print(f"error: file not found: {filename}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LeakscoreError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
