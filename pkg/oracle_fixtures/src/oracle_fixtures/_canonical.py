"""Canonical JSON rendering: sorted keys, floats at 17 significant digits.

Regenerated fixtures must be byte-identical, so the format is pinned here
instead of leaning on json.dumps float repr (shortest-round-trip digits are
an implementation detail that has changed across interpreter versions).
17 significant digits round-trips every float64 exactly.
"""
from __future__ import annotations

import json
import math

import numpy as np

_INDENT = "  "


def _scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError("fixtures must not contain NaN or infinities")
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=True)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _is_scalar(value) -> bool:
    return value is None or isinstance(
        value, (bool, int, float, str, np.bool_, np.integer, np.floating))


def _render(value, depth: int) -> str:
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if _is_scalar(value):
        return _scalar(value)
    pad = _INDENT * (depth + 1)
    close = _INDENT * depth
    if isinstance(value, (list, tuple)):
        items = list(value)
        if not items:
            return "[]"
        if all(_is_scalar(item) for item in items):
            return "[" + ", ".join(_scalar(item) for item in items) + "]"
        body = ",\n".join(pad + _render(item, depth + 1) for item in items)
        return "[\n" + body + "\n" + close + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = []
        for key in sorted(value):
            if not isinstance(key, str):
                raise TypeError(f"fixture keys must be strings, got {key!r}")
            parts.append(pad + json.dumps(key, ensure_ascii=True) + ": "
                         + _render(value[key], depth + 1))
        return "{\n" + ",\n".join(parts) + "\n" + close + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(payload: dict) -> str:
    return _render(payload, 0) + "\n"
