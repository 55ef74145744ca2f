"""JSON matrix format: ``{"dim": n, "entries": [[[re, im], ...], ...]}``.

Entries are row-major and written with 17 significant digits, which is
enough for an exact round trip of IEEE doubles.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import numpy as np

PathLike = Union[str, Path]


def _num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("matrix entries must be finite")
    if x == 0.0 and math.copysign(1.0, x) < 0:
        return "-0.0"  # a bare "-0" would parse back as the integer 0
    return f"{x:.17g}"


def matrix_to_json(M) -> str:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    rows = []
    for row in M:
        cells = ", ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in row)
        rows.append(f"    [{cells}]")
    body = ",\n".join(rows)
    return f'{{\n  "dim": {M.shape[0]},\n  "entries": [\n{body}\n  ]\n}}\n'


def matrix_from_json(text: str) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "dim" not in doc or "entries" not in doc:
        raise ValueError('matrix file must be an object with "dim" and "entries"')
    n = doc["dim"]
    entries = doc["entries"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"dim must be a positive integer, got {n!r}")
    if not isinstance(entries, list) or len(entries) != n:
        raise ValueError(f"expected {n} rows")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != n:
            raise ValueError(f"row {i} must have {n} entries")
        for j, cell in enumerate(row):
            if (not isinstance(cell, list) or len(cell) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in cell)):
                raise ValueError(f"entry ({i}, {j}) must be a [re, im] pair of numbers")
            out[i, j] = complex(float(cell[0]), float(cell[1]))
    return out


def write_matrix(path: PathLike, M) -> None:
    Path(path).write_text(matrix_to_json(M))


def read_matrix(path: PathLike) -> np.ndarray:
    return matrix_from_json(Path(path).read_text())
