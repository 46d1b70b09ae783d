"""File formats: dense CSV, `i j w` edge lists, JSON manifests.

Floats are written with 17 significant digits so that every float64 round-trips.
All writers go through a temp file + rename.
"""
from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_matrix_csv(M) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.atleast_2d(np.asarray(M, dtype=float)), fmt=FLOAT_FMT, delimiter=",")
    return buf.getvalue()


def write_matrix_csv(path, M) -> Path:
    return atomic_write_text(path, format_matrix_csv(M))


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)


def write_table_csv(path, header, rows) -> Path:
    """Rows of mixed ints/floats/strings under a header line."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


def read_table_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:] if ln]


def write_edge_list(path, A) -> Path:
    """Header line ``n``, then ``i j w`` for each nonzero entry with i <= j (1-indexed)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    iu, ju = np.nonzero(np.triu(A))
    lines = [str(n)]
    lines += [f"{i + 1} {j + 1} {FLOAT_FMT % A[i, j]}" for i, j in zip(iu, ju)]
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_edge_list(path) -> np.ndarray:
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    n = int(lines[0][0])
    A = np.zeros((n, n))
    for i, j, w in lines[1:]:
        i, j = int(i) - 1, int(j) - 1
        A[i, j] = A[j, i] = float(w)
    return A


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write_text(path, dumps_json(obj))


def read_json(path):
    return json.loads(Path(path).read_text())
