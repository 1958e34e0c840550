"""Strict parsers for point and distance-matrix inputs.

Every parse failure names the offending row and column (1-based).
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .core import InputError, MatrixOracle, PointSet


def _rows_from_csv(path: str, skip_header: bool) -> list[list[float]]:
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for rno, row in enumerate(csv.reader(fh), start=1):
            if skip_header and rno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            values = []
            for cno, cell in enumerate(row, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise InputError(
                        f"{path}: row {rno}, column {cno}: {cell.strip()!r} is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise InputError(f"{path}: row {rno}, column {cno}: non-finite value")
                values.append(value)
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    for rno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise InputError(f"{path}: row {rno} has {len(row)} columns, expected {width}")
    return rows


def read_points_csv(path: str, skip_header: bool = False) -> PointSet:
    return PointSet(np.asarray(_rows_from_csv(path, skip_header)))


def read_points_json(path: str) -> PointSet:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, list) or not data:
        raise InputError(f"{path}: expected a non-empty array of point arrays")
    rows = []
    for rno, row in enumerate(data, start=1):
        if not isinstance(row, list):
            raise InputError(f"{path}: point {rno} is not an array")
        values = []
        for cno, cell in enumerate(row, start=1):
            if not isinstance(cell, (int, float)) or isinstance(cell, bool) or not math.isfinite(cell):
                raise InputError(f"{path}: point {rno}, coordinate {cno}: not a finite number")
            values.append(float(cell))
        rows.append(values)
    width = len(rows[0])
    for rno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise InputError(f"{path}: point {rno} has {len(row)} coordinates, expected {width}")
    return PointSet(np.asarray(rows))


def read_matrix_csv(path: str, skip_header: bool = False) -> MatrixOracle:
    rows = _rows_from_csv(path, skip_header)
    matrix = np.asarray(rows)
    if matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"{path}: distance matrix must be square, got {matrix.shape}")
    return MatrixOracle(matrix)


def write_points_csv(path: str, points: np.ndarray) -> None:
    arr = np.asarray(points, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in arr:
            writer.writerow([repr(float(v)) for v in row])
