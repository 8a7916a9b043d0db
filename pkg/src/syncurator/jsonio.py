"""Canonical JSON output helpers.

Every file the toolkit writes goes through :func:`canonical_json_bytes` so
that identical inputs and configuration produce byte-identical outputs.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def jsonable(value: Any) -> Any:
    """Recursively convert to plain JSON types; NaN becomes null."""
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        return jsonable(value.item())
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, dict):
        return {key: jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    return value


def canonical_json_bytes(doc: Any, indent: int | None = 2) -> bytes:
    """Deterministic JSON encoding (insertion-ordered keys, strict floats)."""
    text = json.dumps(jsonable(doc), indent=indent, allow_nan=False)
    return (text + "\n").encode("utf-8")
