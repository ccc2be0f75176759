"""Minute-bar CSV ingestion, trading-day segmentation, and box-size schemes.

A raw file holds one or more trading days of strictly positive minute bars.
Segmentation groups rows by their date string, drops days with bad prices or
an atypical bar count, and hands each surviving day downstream as an
immutable :class:`PriceSeries`.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

# Preset box-size lists for the common intraday session lengths. The
# T=240 and T=390 lists deliberately omit a few divisors (5, 8, ... for
# 240; 6, 65 for 390); pass an explicit override to use different sizes.
PRESET_BOX_SIZES: dict[int, tuple[int, ...]] = {
    240: (1, 2, 3, 4, 6, 10, 15, 20, 30, 40, 60, 80, 120, 240),
    405: (1, 3, 5, 9, 15, 27, 45, 81, 135, 405),
    390: (1, 2, 3, 5, 10, 13, 15, 26, 30, 39, 78, 130, 195, 390),
}


class IngestError(Exception):
    """Raised when an input file cannot be turned into records."""


class MalformedRowError(IngestError):
    """A specific CSV row could not be parsed; the message names the row."""


class MinuteRecord(NamedTuple):
    date: str
    time: str
    price: float


@dataclass(frozen=True)
class PriceSeries:
    """One trading day's strictly positive minute-bar values.

    ``values`` is an immutable float64 array of length T >= 2; every entry
    must be finite and > 0.
    """

    day_id: str
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError(f"day {self.day_id}: values must be 1-D")
        if vals.size < 2:
            raise ValueError(f"day {self.day_id}: need at least 2 samples, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"day {self.day_id}: non-finite value present")
        if np.any(vals <= 0.0):
            raise ValueError(f"day {self.day_id}: non-positive value present")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def length(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class BoxScheme:
    """Increasing box sizes, each an exact divisor of the series length."""

    sizes: tuple[int, ...]
    series_length: int

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        T = int(self.series_length)
        if T < 2:
            raise ValueError(f"series length must be >= 2, got {T}")
        if len(sizes) < 2:
            raise ValueError("box scheme needs at least 2 sizes for the scaling fit")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"box sizes must be strictly increasing: {sizes}")
        for s in sizes:
            if s < 1 or s > T:
                raise ValueError(f"box size {s} outside [1, {T}]")
            if T % s != 0:
                raise ValueError(f"box size {s} does not divide series length {T}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "series_length", T)

    @property
    def box_counts(self) -> tuple[int, ...]:
        return tuple(self.series_length // s for s in self.sizes)


@dataclass(frozen=True)
class DroppedDay:
    day_id: str
    length: int
    reason: str


@dataclass
class DaySegmentation:
    """Kept days plus the report of what was discarded and why."""

    days: list[PriceSeries]
    dropped: list[DroppedDay] = field(default_factory=list)
    modal_length: int | None = None


def parse_intraday_csv(
    path: str | Path,
    date_col: str = "date",
    time_col: str = "time",
    price_col: str = "price",
) -> list[MinuteRecord]:
    """Read a header-ed CSV of minute bars into records, in file order.

    No filtering happens here: non-finite prices are carried through and
    handled by :func:`segment_by_day`. Raises :class:`IngestError` for an
    unreadable file or missing columns, :class:`MalformedRowError` (naming
    the offending row) for rows that do not parse.
    """
    path = Path(path)
    try:
        fh = path.open("r", encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc

    records: list[MinuteRecord] = []
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return records  # empty file: zero days downstream
        missing = [c for c in (date_col, time_col, price_col) if c not in reader.fieldnames]
        if missing:
            raise IngestError(f"{path}: missing column(s) {missing}; header is {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            date = row.get(date_col)
            time = row.get(time_col)
            raw_price = row.get(price_col)
            if date is None or time is None or raw_price is None:
                raise MalformedRowError(f"{path}: row {lineno} is short a field")
            try:
                price = float(raw_price)
            except ValueError as exc:
                raise MalformedRowError(
                    f"{path}: row {lineno}: price {raw_price!r} is not numeric"
                ) from exc
            records.append(MinuteRecord(date, time, price))
    return records


def segment_by_day(records: list[MinuteRecord]) -> DaySegmentation:
    """Split ordered records into per-day series, dropping suspect days.

    A day is dropped (never raising) when it contains a non-positive or
    non-finite price, or when its bar count differs from the modal count
    over the clean days -- the proxy for a recording-error day. Ties in the
    modal count go to the longer day. Kept days appear in first-seen order,
    values exactly as parsed.
    """
    by_day: dict[str, list[float]] = {}
    for rec in records:
        by_day.setdefault(rec.date, []).append(rec.price)

    dropped: list[DroppedDay] = []
    clean: dict[str, np.ndarray] = {}
    for day_id, prices in by_day.items():
        vals = np.asarray(prices, dtype=np.float64)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            dropped.append(DroppedDay(day_id, vals.size, "non-positive or non-finite price"))
        else:
            clean[day_id] = vals

    if not clean:
        for d in dropped:
            logger.warning("dropping day %s (%d bars): %s", d.day_id, d.length, d.reason)
        return DaySegmentation(days=[], dropped=dropped, modal_length=None)

    counts = Counter(len(v) for v in clean.values())
    modal_length = max(counts.items(), key=lambda kv: (kv[1], kv[0]))[0]

    days: list[PriceSeries] = []
    for day_id, vals in clean.items():
        if vals.size != modal_length:
            dropped.append(
                DroppedDay(day_id, vals.size, f"length {vals.size} != modal length {modal_length}")
            )
        elif modal_length < 2:
            dropped.append(DroppedDay(day_id, vals.size, "day shorter than 2 bars"))
        else:
            days.append(PriceSeries(day_id=day_id, values=vals))

    for d in dropped:
        logger.warning("dropping day %s (%d bars): %s", d.day_id, d.length, d.reason)
    return DaySegmentation(days=days, dropped=dropped, modal_length=modal_length)


def _divisors(T: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= T:
        if T % d == 0:
            small.append(d)
            if d != T // d:
                large.append(T // d)
        d += 1
    return small + large[::-1]


def derive_box_scheme(T: int, override: list[int] | None = None) -> BoxScheme:
    """Box sizes for a series of length T.

    Uses the preset list for T in {240, 405, 390}, otherwise every divisor
    of T in increasing order. An explicit ``override`` list is sorted,
    deduplicated, and validated against the divisor invariant.
    """
    T = int(T)
    if T < 2:
        raise ValueError(f"series length must be >= 2, got {T}")
    if override is not None:
        sizes = tuple(sorted(set(int(s) for s in override)))
        return BoxScheme(sizes=sizes, series_length=T)
    preset = PRESET_BOX_SIZES.get(T)
    if preset is not None:
        return BoxScheme(sizes=preset, series_length=T)
    return BoxScheme(sizes=tuple(_divisors(T)), series_length=T)
