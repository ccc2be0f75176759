"""Box measure of a positive series: per-box mass and normalized log-weights.

For box size l dividing the series length T, the series tiles into N = T/l
non-overlapping boxes and the mass of box n is the sum of its l values.
Downstream moment computation never touches the raw weights u_n, only
ln u_n = ln mass_n - ln total, so extreme moment orders stay in a safe
floating range for either sign of q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import PriceSeries


@dataclass(frozen=True)
class BoxMeasure:
    """Masses and log-weights of one (series, box size) tiling.

    ``raw_mass[n]`` is the sum of the values in box n; ``log_weights[n]`` is
    ln(raw_mass[n] / sum(raw_mass)). exp(log_weights) sums to 1 to 1e-12.
    """

    box_size: int
    raw_mass: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        for name in ("raw_mass", "log_weights"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.raw_mass.size == 0 or self.raw_mass.size != self.log_weights.size:
            raise ValueError("raw_mass and log_weights must be equal-length and non-empty")
        if np.any(self.raw_mass <= 0.0) or not np.all(np.isfinite(self.raw_mass)):
            raise ValueError("box masses must be positive and finite")

    @property
    def box_count(self) -> int:
        return int(self.raw_mass.size)


def build_box_measure(series: PriceSeries, box_size: int) -> BoxMeasure:
    """Tile ``series`` into boxes of ``box_size`` samples and sum each box.

    Box masses and their total are accumulated with compensated summation
    (math.fsum) so mass conservation holds at 1e-12 relative and the total
    is independent of the value ordering.
    """
    values = series.values
    l = int(box_size)
    T = values.size
    if l < 1 or T % l != 0:
        raise ValueError(f"box size {l} does not divide series length {T}")
    n_boxes = T // l
    if l == 1:
        raw = values.copy()
    else:
        tiled = values.reshape(n_boxes, l)
        raw = np.fromiter((math.fsum(row) for row in tiled), dtype=np.float64, count=n_boxes)
    total = math.fsum(raw)
    log_weights = np.log(raw) - math.log(total)
    return BoxMeasure(box_size=l, raw_mass=raw, log_weights=log_weights)
