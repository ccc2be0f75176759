"""Command-line front end.

Subcommands:
    analyze       per-day tau/spectrum tables and a summary JSON
    shuffle-test  seeded shuffle significance test per day
    batch         analyze + shuffle-test for every day, plus batch summary
    synth         generate synthetic control data in the ingestion format

Exit codes: 0 success, 2 configuration error, 3 ingestion error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import datetime
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._text import atomic_write_text, round_for_json, write_json
from .bootstrap import (
    BootstrapConfig,
    BootstrapReport,
    batch_summary,
    bootstrap_analysis,
    write_batch_summary_json,
    write_report_json,
    write_scatter_csv,
)
from .ingest import (
    BoxScheme,
    IngestError,
    PriceSeries,
    derive_box_scheme,
    parse_intraday_csv,
    segment_by_day,
)
from .partition import MomentGrid, write_surface_csv
from .pipeline import DayAnalysis, analyze_series
from .scaling import write_tau_csv
from .spectrum import write_spectrum_csv
from .synth import CascadeSpec, binomial_cascade, constant_series, random_positive_series

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_NUMERIC = 4

_EXPORT_CHOICES = ("surface", "tau", "spectrum", "scatter")


class ConfigError(Exception):
    """Invalid combination of command-line options."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path
    outdir: Path
    q_min: float = -120.0
    q_max: float = 120.0
    q_step: float = 1.0
    boxes: tuple[int, ...] | None = None
    bootstrap_b: int = 1000
    master_seed: int = 0
    level: float = 0.05
    date_col: str = "date"
    time_col: str = "time"
    price_col: str = "price"
    export: frozenset = frozenset()
    workers: int = 1
    store_replicates: bool = False


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfbox",
        description="Box-counting multifractal analysis with shuffle significance tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--input", required=True, help="input CSV of minute bars")
        p.add_argument("--outdir", required=True, help="directory for artifacts")
        p.add_argument("--q-min", type=float, default=-120.0)
        p.add_argument("--q-max", type=float, default=120.0)
        p.add_argument("--q-step", type=float, default=1.0)
        p.add_argument("--boxes", default=None, help="comma list overriding the box sizes")
        p.add_argument("--seed", type=int, default=0, help="master seed for shuffling")
        p.add_argument("--level", type=float, default=0.05, help="significance level")
        p.add_argument("--date-col", default="date")
        p.add_argument("--time-col", default="time")
        p.add_argument("--price-col", default="price")
        p.add_argument("--export", default="", help=f"comma list from {_EXPORT_CHOICES}")
        p.add_argument("--workers", type=int, default=1, help="worker processes")

    p_an = sub.add_parser("analyze", help="tau(q), spectrum, and summary per day")
    add_common(p_an)

    p_sh = sub.add_parser("shuffle-test", help="shuffle significance test per day")
    add_common(p_sh)
    p_sh.add_argument("--bootstrap", type=int, default=1000, help="shuffle replicates per day")
    p_sh.add_argument("--store-replicates", action="store_true",
                      help="embed the replicate cloud in the report JSON")

    p_ba = sub.add_parser("batch", help="analyze + shuffle-test for every day")
    add_common(p_ba)
    p_ba.add_argument("--bootstrap", type=int, default=1000)
    p_ba.add_argument("--store-replicates", action="store_true")

    p_sy = sub.add_parser("synth", help="write synthetic control data as CSV")
    p_sy.add_argument("--out", required=True, help="output CSV path")
    p_sy.add_argument("--kind", required=True,
                      choices=("constant", "iid-lognormal", "intraday-walk", "cascade"))
    p_sy.add_argument("--length", type=int, default=240, help="bars per day (non-cascade kinds)")
    p_sy.add_argument("--value", type=float, default=1.0, help="constant level")
    p_sy.add_argument("--sigma", type=float, default=0.01, help="log-step scale")
    p_sy.add_argument("--initial", type=float, default=1.0, help="starting level for noise kinds")
    p_sy.add_argument("--p", type=float, default=0.6, help="cascade split fraction")
    p_sy.add_argument("--levels", type=int, default=12, help="cascade depth (length 2^levels)")
    p_sy.add_argument("--mass", type=float, default=1.0, help="cascade total mass")
    p_sy.add_argument("--seed", type=int, default=None,
                      help="seed (randomizes cascade orientation when given)")
    p_sy.add_argument("--days", type=int, default=1, help="number of days to generate")
    p_sy.add_argument("--start-date", default="2000-01-03")
    return parser


def _parse_boxes(text: str | None) -> tuple[int, ...] | None:
    if not text:
        return None
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--boxes must be a comma list of integers, got {text!r}") from exc


def _parse_export(text: str) -> frozenset:
    items = frozenset(tok.strip() for tok in text.split(",") if tok.strip())
    unknown = items - set(_EXPORT_CHOICES)
    if unknown:
        raise ConfigError(f"unknown --export item(s) {sorted(unknown)}; choose from {_EXPORT_CHOICES}")
    return items


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    bootstrap_b = getattr(args, "bootstrap", 1000)
    if bootstrap_b < 1:
        raise ConfigError(f"--bootstrap must be >= 1, got {bootstrap_b}")
    if not (0.0 < args.level < 1.0):
        raise ConfigError(f"--level must be in (0, 1), got {args.level}")
    try:
        MomentGrid.from_range(args.q_min, args.q_max, args.q_step)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        command=args.command,
        input=Path(args.input),
        outdir=Path(args.outdir),
        q_min=args.q_min,
        q_max=args.q_max,
        q_step=args.q_step,
        boxes=_parse_boxes(args.boxes),
        bootstrap_b=bootstrap_b,
        master_seed=args.seed,
        level=args.level,
        date_col=args.date_col,
        time_col=args.time_col,
        price_col=args.price_col,
        export=_parse_export(args.export),
        workers=args.workers,
        store_replicates=getattr(args, "store_replicates", False),
    )


def _load_days(cfg: RunConfig) -> list[PriceSeries]:
    records = parse_intraday_csv(
        cfg.input, date_col=cfg.date_col, time_col=cfg.time_col, price_col=cfg.price_col
    )
    seg = segment_by_day(records)
    for drop in seg.dropped:
        print(f"mfbox: dropped day {drop.day_id}: {drop.reason}", file=sys.stderr)
    if not seg.days:
        print(f"mfbox: no usable days in {cfg.input}", file=sys.stderr)
    return seg.days


def _scheme_for(cfg: RunConfig, length: int) -> BoxScheme:
    try:
        return derive_box_scheme(length, override=list(cfg.boxes) if cfg.boxes else None)
    except ValueError as exc:
        raise ConfigError(f"box scheme invalid for day length {length}: {exc}") from exc


def _write_analysis_artifacts(cfg: RunConfig, analysis: DayAnalysis) -> None:
    day_dir = cfg.outdir / analysis.series.day_id
    write_tau_csv(analysis.exponents, day_dir / "tau.csv")
    write_spectrum_csv(analysis.spectrum, day_dir / "spectrum.csv")
    if "surface" in cfg.export:
        write_surface_csv(analysis.surface, day_dir / "surface.csv")
    write_json(
        day_dir / "summary.json",
        {
            "day": analysis.series.day_id,
            "length": analysis.series.length,
            "alpha_bar": round_for_json(analysis.linearity.alpha_bar),
            "alpha_bar_stderr": round_for_json(analysis.linearity.alpha_bar_stderr),
            "max_tau_residual": round_for_json(analysis.linearity.max_abs_residual_from_line),
            "delta_alpha": round_for_json(analysis.spectrum.delta_alpha),
            "F": round_for_json(analysis.spectrum.f_mid),
        },
    )


def run_analyze(cfg: RunConfig) -> int:
    days = _load_days(cfg)
    grid = MomentGrid.from_range(cfg.q_min, cfg.q_max, cfg.q_step)
    for day in days:
        analysis = analyze_series(day, _scheme_for(cfg, day.length), grid)
        _write_analysis_artifacts(cfg, analysis)
    return EXIT_OK


def _bootstrap_one_day(
    values: np.ndarray,
    day_id: str,
    sizes: tuple[int, ...],
    q_values: np.ndarray,
    replicates: int,
    master_seed: int,
    level: float,
) -> BootstrapReport:
    """Pool worker: the full shuffle test for one day, serial replicates."""
    series = PriceSeries(day_id=day_id, values=values)
    scheme = BoxScheme(sizes=sizes, series_length=series.length)
    grid = MomentGrid(q_values=q_values)
    cfg = BootstrapConfig(replicates=replicates, master_seed=master_seed, significance_level=level)
    return bootstrap_analysis(series, scheme, grid, cfg, n_jobs=1)


def _run_bootstrap_days(cfg: RunConfig, days: list[PriceSeries]) -> list[BootstrapReport]:
    grid = MomentGrid.from_range(cfg.q_min, cfg.q_max, cfg.q_step)
    boot_cfg = BootstrapConfig(
        replicates=cfg.bootstrap_b, master_seed=cfg.master_seed, significance_level=cfg.level
    )
    if len(days) > 1 and cfg.workers > 1:
        # Parallelize across days; merge preserves day order.
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(
                    _bootstrap_one_day,
                    day.values, day.day_id, _scheme_for(cfg, day.length).sizes,
                    grid.q_values, cfg.bootstrap_b, cfg.master_seed, cfg.level,
                )
                for day in days
            ]
            return [f.result() for f in futures]
    return [
        bootstrap_analysis(day, _scheme_for(cfg, day.length), grid, boot_cfg, n_jobs=cfg.workers)
        for day in days
    ]


def _write_bootstrap_artifacts(cfg: RunConfig, reports: list[BootstrapReport]) -> None:
    for report in reports:
        day_dir = cfg.outdir / report.day_id
        write_report_json(
            report, day_dir / "shuffle_test.json", include_replicates=cfg.store_replicates
        )
        if "scatter" in cfg.export:
            write_scatter_csv(report, day_dir / "scatter.csv")
    if len(reports) > 1 or cfg.command == "batch":
        write_batch_summary_json(batch_summary(reports, cfg.level), cfg.outdir / "batch_summary.json")


def run_shuffle_test(cfg: RunConfig) -> int:
    days = _load_days(cfg)
    if days:
        _write_bootstrap_artifacts(cfg, _run_bootstrap_days(cfg, days))
    return EXIT_OK


def run_batch(cfg: RunConfig) -> int:
    days = _load_days(cfg)
    if not days:
        return EXIT_OK
    grid = MomentGrid.from_range(cfg.q_min, cfg.q_max, cfg.q_step)
    for day in days:
        _write_analysis_artifacts(cfg, analyze_series(day, _scheme_for(cfg, day.length), grid))
    _write_bootstrap_artifacts(cfg, _run_bootstrap_days(cfg, days))
    return EXIT_OK


def _synth_day(args: argparse.Namespace, index: int, day_id: str) -> PriceSeries:
    seed = None if args.seed is None else args.seed + index
    if args.kind == "constant":
        return constant_series(args.length, args.value, day_id=day_id)
    if args.kind == "cascade":
        spec = CascadeSpec(p=args.p, levels=args.levels, total_mass=args.mass)
        series = binomial_cascade(spec, seed=seed)
    else:
        series = random_positive_series(
            args.length, args.kind, seed=0 if seed is None else seed,
            sigma=args.sigma, initial=args.initial,
        )
    return PriceSeries(day_id=day_id, values=series.values)


def write_series_csv(days: list[PriceSeries], path) -> None:
    """Standard ingestion CSV; prices as shortest round-trip decimals."""
    buf = io.StringIO()
    buf.write("date,time,price\n")
    for day in days:
        for i, value in enumerate(day.values):
            minute = (9 * 60 + 30 + i) % (24 * 60)
            buf.write(f"{day.day_id},{minute // 60:02d}:{minute % 60:02d},{float(value)!r}\n")
    atomic_write_text(path, buf.getvalue())


def run_synth(args: argparse.Namespace) -> int:
    if args.days < 1:
        raise ConfigError(f"--days must be >= 1, got {args.days}")
    try:
        start = datetime.date.fromisoformat(args.start_date)
    except ValueError as exc:
        raise ConfigError(f"--start-date must be YYYY-MM-DD, got {args.start_date!r}") from exc
    try:
        days = [
            _synth_day(args, i, (start + datetime.timedelta(days=i)).isoformat())
            for i in range(args.days)
        ]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_series_csv(days, args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        if args.command == "synth":
            return run_synth(args)
        cfg = _config_from_args(args)
        if args.command == "analyze":
            return run_analyze(cfg)
        if args.command == "shuffle-test":
            return run_shuffle_test(cfg)
        return run_batch(cfg)
    except ConfigError as exc:
        print(f"mfbox: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestError as exc:
        print(f"mfbox: ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except OSError as exc:
        print(f"mfbox: file error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except (ValueError, ArithmeticError) as exc:
        print(f"mfbox: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
