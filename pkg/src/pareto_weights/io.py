"""CSV and JSON writers with deterministic float formatting."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .stats import BinnedCurve, HistogramGrid


def fmt(v) -> str:
    """Shortest round-trip text for floats, plain text for everything else."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def write_csv(path, header: Sequence[str], columns: Sequence) -> Path:
    """Write equal-length columns under ``header`` (RFC 4180, LF line ends)."""
    path = Path(path)
    cols = [np.asarray(c) if not isinstance(c, list) else c for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns must have equal length")
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for i in range(n):
            wr.writerow([fmt(c[i]) for c in cols])
    return path


def read_csv(path) -> dict:
    """Read a CSV written by :func:`write_csv` into float (or str) columns."""
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = list(rd)
    out = {}
    for j, name in enumerate(header):
        vals = [r[j] for r in rows]
        try:
            out[name] = np.array([float(v) for v in vals])
        except ValueError:
            out[name] = vals
    return out


def write_histogram(path, grid: HistogramGrid, scale: float = 1.0) -> Path:
    """Histogram CSV; with ``scale != 1`` the scaled abscissa and its density
    (density / scale) are added as extra columns."""
    header = ["edge_lo", "edge_hi", "count", "density"]
    cols = [grid.edges[:-1], grid.edges[1:], grid.counts, grid.density]
    if scale != 1.0:
        header += ["scaled_lo", "scaled_hi", "scaled_density"]
        cols += [grid.edges[:-1] / scale, grid.edges[1:] / scale, grid.density * scale]
    return write_csv(path, header, cols)


def write_binned(path, curve: BinnedCurve, extra: dict = None) -> Path:
    header = ["edge_lo", "edge_hi", "center", "count", "mean", "q_lo", "q_hi", "low_confidence"]
    cols = [curve.edges[:-1], curve.edges[1:], curve.centers, curve.counts, curve.mean,
            curve.q_lo, curve.q_hi, curve.low_confidence]
    for k, v in (extra or {}).items():
        header.append(k)
        cols.append(v)
    return write_csv(path, header, cols)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
