"""File formats: phase fields, operator dumps, sweep tables and verdicts.

Binary dumps share a 32-byte little-endian header ``M (int64), L (float64),
hbar (float64), d (int64)`` followed by row-major float64 field values or
complex128 kernel samples.
"""

from __future__ import annotations

import csv
import json
import math
import time
from pathlib import Path

import numpy as np

from .grid import Grid, GridOperator

HEADER = np.dtype([("M", "<i8"), ("L", "<f8"), ("hbar", "<f8"), ("d", "<i8")])


def _header(grid: Grid, hbar: float) -> bytes:
    rec = np.array([(grid.M, grid.L, hbar, grid.dim)], dtype=HEADER)
    return rec.tobytes()


def _read_header(buf: bytes):
    if len(buf) < HEADER.itemsize:
        raise ValueError("file too short for header")
    rec = np.frombuffer(buf[:HEADER.itemsize], dtype=HEADER)[0]
    grid = Grid(float(rec["L"]), int(rec["M"]), int(rec["d"]))
    return grid, float(rec["hbar"]), buf[HEADER.itemsize:]


def write_phase_field_csv(field, path):
    X, XI = field.mesh()
    vals = field.values
    cols = ["x", "xi", "value"] if np.isrealobj(vals) else ["x", "xi", "value", "imag"]
    with open(path, "w", newline="") as fh:
        fh.write(f"# columns: {','.join(cols)}\n")
        fh.write(f"# M={field.grid.M} L={field.grid.L!r} hbar={field.hbar!r} d={field.grid.dim}\n")
        w = csv.writer(fh)
        w.writerow(cols)
        for x, xi, v in zip(X.ravel(), XI.ravel(), vals.ravel()):
            row = [repr(float(x)), repr(float(xi)), repr(float(np.real(v)))]
            if len(cols) == 4:
                row.append(repr(float(np.imag(v))))
            w.writerow(row)


def write_phase_field_bin(field, path):
    vals = np.real_if_close(field.values, tol=1000)
    if np.iscomplexobj(vals):
        raise ValueError("binary phase-field dumps hold real values only")
    with open(path, "wb") as fh:
        fh.write(_header(field.grid, field.hbar))
        fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())


def read_phase_field_bin(path):
    from .phasespace import PhaseField

    grid, hbar, body = _read_header(Path(path).read_bytes())
    vals = np.frombuffer(body, dtype="<f8")
    if vals.size != grid.M**2:
        raise ValueError(f"expected {grid.M**2} values, found {vals.size}")
    return PhaseField(vals.reshape(grid.M, grid.M).copy(), grid, hbar)


def write_operator_bin(op: GridOperator, path):
    with open(path, "wb") as fh:
        fh.write(_header(op.grid, op.hbar))
        fh.write(np.ascontiguousarray(op.kernel, dtype="<c16").tobytes())


def read_operator_bin(path) -> GridOperator:
    grid, hbar, body = _read_header(Path(path).read_bytes())
    k = np.frombuffer(body, dtype="<c16")
    n = grid.size
    if k.size != n * n:
        raise ValueError(f"expected {n * n} kernel samples, found {k.size}")
    return GridOperator(k.reshape(n, n).copy(), grid, hbar)


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(data, path):
    with open(path, "w") as fh:
        json.dump(jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def timestamp() -> str:
    return time.strftime("%Y%m%dT%H%M%S")


def sweep_csv_name(family: str, check: str, stamp: str | None = None) -> str:
    return f"{family}_{check}_{stamp or timestamp()}.csv"


def write_table_csv(rows: list[dict], path, columns: list[str] | None = None):
    """Write dict rows with a gnuplot-friendly ``# columns:`` comment line."""
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    with open(path, "w", newline="") as fh:
        fh.write(f"# columns: {','.join(columns)}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return ";".join(str(_cell(x)) for x in v)
    return v


def read_table_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
