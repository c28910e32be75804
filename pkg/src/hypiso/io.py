"""Deterministic JSON and CSV output.

Floats are written with 17 significant digits so identical runs produce
byte-identical files.  The standard ``json`` encoder always uses the
shortest round-trip repr, so the writer below formats numbers itself and
delegates strings to ``json``.
"""
from __future__ import annotations

import json
import math
from dataclasses import fields, is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .charts import Chart, Submanifold

REPORT_SCHEMA = "hypiso-report-v1"
SUBMANIFOLD_SCHEMA = "hypiso-submanifold-v1"
SWEEP_HEADER = "theta,vol_sigma,vol_boundary,linear_slack,classical_status,reverse_slack"
CURVE_HEADER = "r,ratio"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def plain(obj):
    """Convert numpy values, enums and dataclasses to JSON-ready Python values."""
    if hasattr(obj, "to_dict"):
        return plain(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with fixed 17-digit floats; non-finite floats become null."""
    def enc(v, depth):
        pad, inner = " " * (indent * depth), " " * (indent * (depth + 1))
        if v is None:
            return "null"
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, int):
            return str(v)
        if isinstance(v, float):
            return fmt(v) if math.isfinite(v) else "null"
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {enc(x, depth + 1)}" for k, x in v.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(v, list):
            if not v:
                return "[]"
            if all(not isinstance(x, (dict, list)) for x in v):
                return "[" + ", ".join(enc(x, depth + 1) for x in v) + "]"
            return "[\n" + ",\n".join(inner + enc(x, depth + 1) for x in v) + "\n" + pad + "]"
        raise TypeError(f"cannot serialise {type(v).__name__}")

    return enc(plain(obj), 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_csv(path, header: str, rows) -> Path:
    """Rows of numbers or strings; numbers get 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Header list and rows as strings (for tests and scripts)."""
    lines = Path(path).read_text().strip().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def _chart_grid(chart: Chart, per_dim: int) -> dict:
    if chart.k == 0:
        return {"lo": [], "hi": [], "periodic": [], "shape": [], "points": chart.map(np.zeros((1, 0)))}
    axes = []
    for lo, hi, per in zip(chart.lo, chart.hi, chart.periodic):
        axes.append(np.linspace(lo, hi, per_dim, endpoint=not per))
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, chart.k)
    return {"lo": chart.lo, "hi": chart.hi, "periodic": list(chart.periodic),
            "shape": [per_dim] * chart.k, "points": chart.map(grid)}


def submanifold_to_dict(sigma: Submanifold, per_dim: int = 9) -> dict:
    """Flags plus each chart sampled on a regular parameter grid."""
    return {
        "schema": SUBMANIFOLD_SCHEMA,
        "kind": sigma.kind,
        "k": sigma.k,
        "n": sigma.n,
        "contains_origin": sigma.contains_origin,
        "totally_geodesic": sigma.totally_geodesic,
        "minimal": sigma.minimal,
        "params": _jsonable_params(sigma.params),
        "candidate_density_points": list(sigma.candidate_density_points),
        "interior_charts": [_chart_grid(c, per_dim) for c in sigma.interior_charts],
        "ideal_charts": [_chart_grid(c, per_dim) for c in sigma.ideal_charts],
    }


def _jsonable_params(params):
    out = {}
    for key, val in params.items():
        if isinstance(val, dict):
            out[key] = _jsonable_params(val)
        elif isinstance(val, list):
            out[key] = [_jsonable_params(v) if isinstance(v, dict) else v for v in val]
        elif isinstance(val, (int, float, str, bool, np.ndarray, np.generic, tuple)) or val is None:
            out[key] = val
        else:
            out[key] = repr(val)
    return out
