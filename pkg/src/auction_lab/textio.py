"""Stable text output: floats at 12 significant digits, sorted JSON keys."""

from __future__ import annotations

import json
import math

DIGITS = 12


def round_floats(obj, digits: int = DIGITS):
    """Round every float to ``digits`` significant digits; non-finite floats become ``None``."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dumps_json(obj) -> str:
    return json.dumps(round_floats(obj), indent=2, sort_keys=True) + "\n"


def fmt(x) -> str:
    """One CSV cell."""
    if isinstance(x, float):
        return f"{x:.{DIGITS}g}" if math.isfinite(x) else ""
    if x is None:
        return ""
    return str(x)
