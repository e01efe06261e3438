"""Deterministic JSON and CSV emission.

Summaries must be byte-identical for identical (config, seed) regardless of
worker count, so no timestamps or environment data go into them, keys are
sorted, and every number is converted to a plain Python scalar before
serialization.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .levy import VectorCadlagPath

__all__ = ["to_jsonable", "dump_json", "write_path_csv", "write_rows_csv"]


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def dump_json(path: Path | str, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_rows_csv(path: Path | str, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_path_csv(path_file: Path | str, path: VectorCadlagPath) -> None:
    """Columns: time, is_jump, left coords, right coords."""
    d = path.dim
    header = (
        ["time", "is_jump"]
        + [f"left_{i}" for i in range(d)]
        + [f"right_{i}" for i in range(d)]
    )
    rows = []
    for k in range(path.times.size):
        rows.append(
            [float(path.times[k]), int(path.jump_mask[k])]
            + [float(v) for v in path.left[k]]
            + [float(v) for v in path.right[k]]
        )
    write_rows_csv(path_file, header, rows)
