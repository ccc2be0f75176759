"""Shared helpers for writing deterministic text artifacts."""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

# Artifacts carry 12 significant digits: enough to round-trip every quantity
# we report at its meaningful precision, few enough that round-off noise
# (~1e-13 absolute after q = +-120 amplification) does not leak into bytes.
FLOAT_SIG_DIGITS = 12


def fmt_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.{FLOAT_SIG_DIGITS}g}"


def round_for_json(x: float | None) -> float | None:
    """Round to the artifact precision so JSON bytes are format-stable."""
    if x is None:
        return None
    if math.isnan(x):
        return None
    return float(fmt_float(x))


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file + rename so partial files never appear."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path: str | Path, obj: dict) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2) + "\n")
