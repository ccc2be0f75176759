"""Shuffle-based significance test for an extracted spectrum width.

Each replicate permutes the day's values uniformly at random, reruns the
whole analysis, and contributes one (delta_alpha, F) point. The cloud of
replicate points is summarized by its least-squares line F = k*delta + b,
and the original day is scored by two one-sided p-values:

    p1 = #{delta_alpha <= delta_alpha_rnd} / B
    p2 = #{F >= F_rnd} / B

Both use non-strict comparisons and plain fractions, so exact 0 and exact 1
are attainable. Replicates are seeded independently from (master_seed,
replicate_index), which makes the whole report reproducible bit-for-bit
regardless of how replicates are scheduled across workers.
"""

from __future__ import annotations

import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._text import atomic_write_text, fmt_float, round_for_json, write_json
from .ingest import BoxScheme, PriceSeries
from .partition import MomentGrid
from .pipeline import analyze_series

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    master_seed: int = 0
    significance_level: float = 0.05

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicate count must be >= 1, got {self.replicates}")
        if not (0.0 < self.significance_level < 1.0):
            raise ValueError(f"significance level must be in (0, 1), got {self.significance_level}")


@dataclass(frozen=True)
class BootstrapReport:
    """Original (delta_alpha, F), the replicate cloud, its line, and p-values.

    ``replicates`` is a (B, 2) array of (delta_alpha_rnd, F_rnd) rows in
    replicate order. ``k``/``b`` are None when the cloud is degenerate
    (all replicate widths identical, so no line can be fitted).
    """

    day_id: str
    delta_alpha: float
    f_mid: float
    replicates: np.ndarray
    k: float | None
    b: float | None
    p1: float
    p2: float
    significant_1: bool
    significant_2: bool


def derive_replicate_seed(master_seed: int, replicate_index: int) -> int:
    """64-bit per-replicate seed: splitmix64 finalizer of the mixed inputs.

    The mix is z = master_seed + (replicate_index + 1) * 0x9E3779B97F4A7C15
    (mod 2^64) pushed through the splitmix64 finalizer (xor-shift/multiply
    constants 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). Distinct replicate
    indices therefore get decorrelated, reproducible generator seeds.
    """
    z = (int(master_seed) + (int(replicate_index) + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def permuted_values(values: np.ndarray, replicate_index: int, master_seed: int) -> np.ndarray:
    """Uniform random permutation of ``values`` for one replicate.

    Drawn with numpy's PCG64 generator (Fisher-Yates shuffle) seeded by
    :func:`derive_replicate_seed`, so the same (seed, index) always yields
    the same permutation and the value multiset is preserved exactly.
    """
    rng = np.random.default_rng(derive_replicate_seed(master_seed, replicate_index))
    return rng.permutation(values)


def shuffle_series(series: PriceSeries, replicate_index: int, master_seed: int) -> PriceSeries:
    """The series with its values uniformly permuted; see permuted_values."""
    return PriceSeries(
        day_id=series.day_id,
        values=permuted_values(series.values, replicate_index, master_seed),
    )


def scatter_fit(replicates: np.ndarray) -> tuple[float, float]:
    """Least-squares line F_rnd = k * delta_alpha_rnd + b through the cloud.

    Raises ValueError for fewer than 2 points or a cloud whose widths are
    all identical (vertical spread only; unfittable).
    """
    pts = np.asarray(replicates, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least 2 (delta_alpha, F) replicate points")
    x = pts[:, 0]
    y = pts[:, 1]
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("degenerate scatter: all replicate delta_alpha values identical")
    k = float(xc @ (y - y.mean())) / sxx
    b = float(y.mean() - k * x.mean())
    return k, b


def _replicate_stats_chunk(
    values: np.ndarray,
    day_id: str,
    sizes: tuple[int, ...],
    q_values: np.ndarray,
    master_seed: int,
    indices: list[int],
) -> list[tuple[float, float]]:
    """(delta_alpha, F) for a block of replicate indices; pool worker body."""
    scheme = BoxScheme(sizes=sizes, series_length=values.size)
    grid = MomentGrid(q_values=q_values)
    out = []
    for idx in indices:
        shuffled = PriceSeries(day_id=day_id, values=permuted_values(values, idx, master_seed))
        spec = analyze_series(shuffled, scheme, grid).spectrum
        out.append((spec.delta_alpha, spec.f_mid))
    return out


def bootstrap_analysis(
    series: PriceSeries,
    scheme: BoxScheme,
    grid: MomentGrid,
    cfg: BootstrapConfig,
    n_jobs: int = 1,
) -> BootstrapReport:
    """Analyze the original day and B shuffled replicates of it.

    Replicates are independent jobs keyed by index, so with n_jobs > 1 they
    run in a process pool and the merged report is bit-identical to the
    serial one.
    """
    original = analyze_series(series, scheme, grid).spectrum
    B = cfg.replicates

    if n_jobs <= 1 or B < 4:
        stats = _replicate_stats_chunk(
            series.values, series.day_id, scheme.sizes, grid.q_values, cfg.master_seed,
            list(range(B)),
        )
    else:
        chunks = [list(c) for c in np.array_split(np.arange(B), min(4 * n_jobs, B))]
        stats = []
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = [
                pool.submit(
                    _replicate_stats_chunk,
                    series.values, series.day_id, scheme.sizes, grid.q_values,
                    cfg.master_seed, chunk,
                )
                for chunk in chunks
            ]
            for fut in futures:  # merge in submission (= index) order
                stats.extend(fut.result())

    replicates = np.asarray(stats, dtype=np.float64)
    try:
        k, b = scatter_fit(replicates)
    except ValueError:
        k, b = None, None

    p1 = float(np.count_nonzero(original.delta_alpha <= replicates[:, 0])) / B
    p2 = float(np.count_nonzero(original.f_mid >= replicates[:, 1])) / B
    if abs(p1 - p2) > 0.1:
        logger.warning(
            "day %s: p1 = %.3f and p2 = %.3f disagree by more than 0.1", series.day_id, p1, p2
        )

    level = cfg.significance_level
    return BootstrapReport(
        day_id=series.day_id,
        delta_alpha=original.delta_alpha,
        f_mid=original.f_mid,
        replicates=replicates,
        k=k,
        b=b,
        p1=p1,
        p2=p2,
        significant_1=p1 <= level,
        significant_2=p2 <= level,
    )


@dataclass(frozen=True)
class BatchSummary:
    """Share of days whose p-values clear the significance level."""

    level: float
    pct_p1_significant: float
    pct_p2_significant: float
    per_day: list[BootstrapReport]


def batch_summary(reports: list[BootstrapReport], level: float) -> BatchSummary:
    """Fractions of days with p1 <= level and p2 <= level, plus the table."""
    if not reports:
        raise ValueError("batch summary needs at least one report")
    n = len(reports)
    return BatchSummary(
        level=level,
        pct_p1_significant=sum(r.p1 <= level for r in reports) / n,
        pct_p2_significant=sum(r.p2 <= level for r in reports) / n,
        per_day=list(reports),
    )


def report_to_dict(report: BootstrapReport, include_replicates: bool = False) -> dict:
    out = {
        "day": report.day_id,
        "delta_alpha": round_for_json(report.delta_alpha),
        "F": round_for_json(report.f_mid),
        "k": round_for_json(report.k),
        "b": round_for_json(report.b),
        "p1": round_for_json(report.p1),
        "p2": round_for_json(report.p2),
        "significant_1": report.significant_1,
        "significant_2": report.significant_2,
    }
    if include_replicates:
        out["replicates"] = [
            [round_for_json(d), round_for_json(f)] for d, f in report.replicates
        ]
    return out


def write_report_json(report: BootstrapReport, path, include_replicates: bool = False) -> None:
    write_json(path, report_to_dict(report, include_replicates=include_replicates))


def write_scatter_csv(report: BootstrapReport, path) -> None:
    buf = io.StringIO()
    buf.write("delta_alpha_rnd,F_rnd\n")
    for d, f in report.replicates:
        buf.write(f"{fmt_float(d)},{fmt_float(f)}\n")
    atomic_write_text(path, buf.getvalue())


def write_batch_summary_json(summary: BatchSummary, path) -> None:
    write_json(
        path,
        {
            "level": round_for_json(summary.level),
            "n_days": len(summary.per_day),
            "pct_p1_significant": round_for_json(summary.pct_p1_significant),
            "pct_p2_significant": round_for_json(summary.pct_p2_significant),
            "days": [report_to_dict(r) for r in summary.per_day],
        },
    )
