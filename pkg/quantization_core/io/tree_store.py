#!/usr/bin/env python3
"""
Tree Storage

JSON documents for quantization trees and flat CSV dumps of their levels.

Document layout:

    {
      "format": "quantization-tree",
      "version": 1,
      "model": {"name": "pseudo_cev", "r": 0.15, ...},
      "x0": 100.0, "T": 1.0, "n": 120,
      "levels": [
        {"t": 0.0, "grid": [...], "weights": [...], "transition": null,
         "distortion": ..., "residual": ..., "iterations": ..., "engine_calls": ...},
        ...
      ]
    }

Floats are written with Python's shortest round-trip representation, so a
parsed document reproduces every real exactly. Schema violations raise
TreeSchemaError naming the JSON path of the offending field.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..distortion_engine import Grid
from ..exceptions import TreeSchemaError
from ..recursive_tree import Level, QuantizationTree
from ..utils import ensure_parent

logger = logging.getLogger(__name__)

FORMAT_NAME = "quantization-tree"
FORMAT_VERSION = 1
PROBABILITY_TOLERANCE = 1e-10
CSV_COLUMNS = ["level", "index", "x", "weight"]


def _floats(values: np.ndarray) -> List[float]:
    return [float(v) for v in np.asarray(values, dtype=float).reshape(-1)]


def serialize_tree(tree: QuantizationTree) -> Dict[str, Any]:
    """Tree as a JSON-ready document"""
    levels = []
    for level in tree.levels:
        transition = level.transition_from_prev
        levels.append(
            {
                "t": float(level.t),
                "grid": _floats(level.grid.points),
                "weights": _floats(level.weights),
                "transition": None if transition is None else [_floats(row) for row in transition],
                "distortion": float(level.distortion),
                "residual": float(level.residual),
                "iterations": int(level.iterations),
                "engine_calls": int(level.engine_calls),
            }
        )
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "model": dict(tree.model_id),
        "x0": float(tree.x0),
        "T": float(tree.T),
        "n": int(tree.n),
        "levels": levels,
    }


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _require(doc: Dict[str, Any], key: str, path: str) -> Any:
    if key not in doc:
        raise TreeSchemaError(f"{path}.{key}", "missing field")
    return doc[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TreeSchemaError(path, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise TreeSchemaError(path, "expected a finite number")
    return value


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TreeSchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _vector(value: Any, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise TreeSchemaError(path, "expected a non-empty list of numbers")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)], dtype=float)


def _parse_weights(value: Any, size: int, path: str) -> np.ndarray:
    weights = _vector(value, path)
    if weights.size != size:
        raise TreeSchemaError(path, f"expected {size} weights, got {weights.size}")
    if np.any(weights < 0):
        raise TreeSchemaError(path, "weights must be nonnegative")
    total = float(weights.sum())
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        raise TreeSchemaError(path, f"weights sum to {total!r}, not 1")
    return weights


def _parse_transition(value: Any, rows: int, cols: int, path: str) -> Optional[np.ndarray]:
    if value is None:
        return None
    if not isinstance(value, list) or len(value) != rows:
        raise TreeSchemaError(path, f"expected {rows} rows")
    matrix = np.empty((rows, cols))
    for i, row in enumerate(value):
        row_path = f"{path}[{i}]"
        entries = _vector(row, row_path)
        if entries.size != cols:
            raise TreeSchemaError(row_path, f"expected {cols} entries, got {entries.size}")
        if np.any(entries < 0):
            raise TreeSchemaError(row_path, "transition probabilities must be nonnegative")
        total = float(entries.sum())
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise TreeSchemaError(row_path, f"row sums to {total!r}, not 1")
        matrix[i] = entries
    return matrix


def _parse_level(doc: Any, k: int, prev_size: Optional[int], path: str) -> Level:
    if not isinstance(doc, dict):
        raise TreeSchemaError(path, "expected an object")
    t = _number(_require(doc, "t", path), f"{path}.t")
    points = _vector(_require(doc, "grid", path), f"{path}.grid")
    if np.any(np.diff(points) <= 0):
        raise TreeSchemaError(f"{path}.grid", "grid must be strictly increasing")
    weights = _parse_weights(_require(doc, "weights", path), points.size, f"{path}.weights")

    raw_transition = doc.get("transition")
    if k == 0:
        if raw_transition is not None:
            raise TreeSchemaError(f"{path}.transition", "level 0 has no transition")
        transition = None
    else:
        transition = _parse_transition(raw_transition, prev_size, points.size, f"{path}.transition")

    return Level(
        t=t,
        grid=Grid(points),
        weights=weights,
        transition_from_prev=transition,
        distortion=_number(doc.get("distortion", 0.0), f"{path}.distortion"),
        residual=_number(doc.get("residual", 0.0), f"{path}.residual"),
        iterations=_integer(doc.get("iterations", 0), f"{path}.iterations"),
        engine_calls=_integer(doc.get("engine_calls", 0), f"{path}.engine_calls"),
    )


def parse_tree(document: Any) -> QuantizationTree:
    """
    Rebuild a tree from its document.

    Raises:
        TreeSchemaError: Missing field, wrong type, non-monotone grid,
            weights or transition rows that are not probability vectors
    """
    if not isinstance(document, dict):
        raise TreeSchemaError("$", "expected an object")
    fmt = document.get("format", FORMAT_NAME)
    if fmt != FORMAT_NAME:
        raise TreeSchemaError("$.format", f"unsupported format '{fmt}'")
    version = document.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise TreeSchemaError("$.version", f"unsupported version {version!r}")

    model = _require(document, "model", "$")
    if not isinstance(model, dict) or "name" not in model:
        raise TreeSchemaError("$.model", "expected an object with a 'name'")
    x0 = _number(_require(document, "x0", "$"), "$.x0")
    T = _number(_require(document, "T", "$"), "$.T")
    if T <= 0:
        raise TreeSchemaError("$.T", "horizon must be > 0")
    n = _integer(_require(document, "n", "$"), "$.n")
    if n < 1:
        raise TreeSchemaError("$.n", "need at least one step")

    raw_levels = _require(document, "levels", "$")
    if not isinstance(raw_levels, list) or len(raw_levels) != n + 1:
        raise TreeSchemaError("$.levels", f"expected {n + 1} levels")

    levels: List[Level] = []
    for k, raw in enumerate(raw_levels):
        prev_size = levels[-1].size if levels else None
        levels.append(_parse_level(raw, k, prev_size, f"$.levels[{k}]"))

    return QuantizationTree(model_id=dict(model), x0=x0, T=T, n=n, levels=levels)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def write_tree(tree: QuantizationTree, path: Union[str, Path]) -> Path:
    """Write a tree document to a JSON file"""
    path = ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(serialize_tree(tree), f)
    logger.info(f"💾 Tree saved to {path}")
    return path


def read_tree(path: Union[str, Path]) -> QuantizationTree:
    """Read and validate a tree document"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Tree file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise TreeSchemaError("$", f"invalid JSON: {e}") from e
    return parse_tree(document)


def tree_frame(tree: QuantizationTree) -> pd.DataFrame:
    """Long table with one row per (level, grid point)"""
    frames = [
        pd.DataFrame(
            {
                "level": k,
                "index": np.arange(level.size),
                "x": level.grid.points,
                "weight": level.weights,
            }
        )
        for k, level in enumerate(tree.levels)
    ]
    return pd.concat(frames, ignore_index=True)[CSV_COLUMNS]


def write_tree_csv(tree: QuantizationTree, path: Union[str, Path]) -> Path:
    """Write the (level, index, x, weight) dump of a tree"""
    path = ensure_parent(path)
    tree_frame(tree).to_csv(path, index=False, float_format="%.17g")
    logger.info(f"💾 Tree CSV saved to {path}")
    return path
