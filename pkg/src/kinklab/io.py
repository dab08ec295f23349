"""CSV/JSON emission and a compact binary trajectory format.

Trajectory frame layout: magic 'KLTRJ1' (6 bytes), uint32 grid size N,
float64 box length L, float64 left edge x0, uint32 frame count; then per
frame one float64 time followed by N float64 samples, little endian.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .grid import ConstantBackground, Field, Grid

_MAGIC = b"KLTRJ1"


def write_csv(path, header: str, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            if not isinstance(row, str):
                row = ",".join(f"{v:.12g}" for v in row)
            fh.write(row + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_trajectory(path, fields) -> None:
    fields = list(fields)
    if not fields:
        raise ValueError("empty trajectory")
    grid = fields[0].grid
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Idd I", grid.n, grid.length, grid.x0, len(fields)))
        for f in fields:
            if f.grid != grid:
                raise ValueError("mismatched grids in trajectory")
            fh.write(struct.pack("<d", f.t))
            fh.write(np.asarray(f.values, dtype="<f8").tobytes())


def read_trajectory(path) -> list[Field]:
    with open(path, "rb") as fh:
        if fh.read(6) != _MAGIC:
            raise ValueError("not a trajectory file")
        n, length, x0, count = struct.unpack("<Idd I", fh.read(struct.calcsize("<Idd I")))
        grid = Grid(n, length, x0)
        out = []
        for _ in range(count):
            (t,) = struct.unpack("<d", fh.read(8))
            values = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
            out.append(Field(grid, values, ConstantBackground(0.0), t))
        return out
