"""Shared serialization helpers: float formatting, JSON and CSV writers."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

SCHEMA_VERSION = 1


def fmt(x) -> str:
    """Format a real with 17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, numpy scalars and arrays converted."""
    return json.dumps(_plain(obj), indent=1, sort_keys=True, allow_nan=True) + "\n"


def csv_text(header, rows) -> str:
    """CSV with a header row; floats are written with :func:`fmt`."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
