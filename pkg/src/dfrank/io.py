"""Dataset loaders and result writers.

Supported inputs:

* temporal edge lists, ``SRC DST UNIXTIME`` per line (SNAP temporal sets);
* plain edge lists, ``SRC DST`` per line (extra columns ignored);
* Matrix Market coordinate files (``general``, ``symmetric`` or
  ``skew-symmetric``; values, if any, are ignored).

Lines starting with ``#`` or ``%`` are comments in edge lists.
"""
from __future__ import annotations

import csv
import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dynamics import TemporalStream
from .graph import DynGraph, add_self_loops

__all__ = [
    "DatasetDescriptor",
    "ParseError",
    "detect_format",
    "format_float",
    "load_static",
    "load_temporal",
    "read_csv",
    "write_csv",
    "write_edge_list",
    "write_ranks",
]

FORMATS = ("temporal-edge-list", "edge-list", "matrix-market")


class ParseError(ValueError):
    def __init__(self, path, lineno: int | None, msg: str):
        where = f"{path}:{lineno}" if lineno is not None else str(path)
        super().__init__(f"{where}: {msg}")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class DatasetDescriptor:
    path: Path
    format: str
    directed: bool = True

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; expected one of {FORMATS}")


def detect_format(path, explicit: str | None = None) -> DatasetDescriptor:
    """Pick a format from an explicit flag or the file extension.

    ``.mtx`` is Matrix Market; anything else is a plain edge list unless
    ``explicit`` says otherwise.
    """
    path = Path(path)
    fmt = explicit
    if fmt is None:
        suffixes = [s.lower() for s in path.suffixes]
        fmt = "matrix-market" if ".mtx" in suffixes else "edge-list"
    return DatasetDescriptor(path, fmt)


def _fields(path) -> Iterable[tuple[int, list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            yield lineno, s.split()


def _ints(path, lineno, parts) -> list[int]:
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ParseError(path, lineno, f"expected integers, got {' '.join(parts)!r}") from None


def load_temporal(path) -> TemporalStream:
    """Read ``SRC DST UNIXTIME`` lines into a time-sorted stream.

    Vertex ids are compacted to ``[0, |V|)`` in ascending original-id order;
    ``original_ids[i]`` gives the id from the file.  Timestamp ties keep file
    order.
    """
    rows = []
    for lineno, parts in _fields(path):
        if len(parts) != 3:
            raise ParseError(path, lineno, f"expected 3 columns (SRC DST TIME), got {len(parts)}")
        rows.append(_ints(path, lineno, parts))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 3)
    ids, inv = np.unique(arr[:, :2], return_inverse=True)
    inv = inv.reshape(-1, 2)
    order = np.argsort(arr[:, 2], kind="stable")
    return TemporalStream(inv[order, 0], inv[order, 1], arr[order, 2], len(ids), ids)


def _load_edge_list(path) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    for lineno, parts in _fields(path):
        if len(parts) < 2:
            raise ParseError(path, lineno, f"expected at least 2 columns (SRC DST), got {len(parts)}")
        rows.append(_ints(path, lineno, parts[:2]))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 2)
    ids, inv = np.unique(arr, return_inverse=True)
    return inv.reshape(-1, 2), ids


def _load_matrix_market(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        tokens = header.strip().lower().split()
        if len(tokens) < 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
            raise ParseError(path, 1, f"not a Matrix Market header: {header.strip()!r}")
        layout, field, symmetry = tokens[2], tokens[3], tokens[4]
        if layout != "coordinate":
            raise ParseError(path, 1, f"only coordinate layout is supported, got {layout!r}")
        if field not in ("pattern", "real", "integer", "complex"):
            raise ParseError(path, 1, f"unknown field {field!r}")
        if symmetry not in ("general", "symmetric", "skew-symmetric", "hermitian"):
            raise ParseError(path, 1, f"unknown symmetry {symmetry!r}")
        size = None
        entries = []
        for lineno, line in enumerate(fh, 2):
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            parts = s.split()
            if size is None:
                if len(parts) != 3:
                    raise ParseError(path, lineno, "size line must hold ROWS COLS NNZ")
                size = _ints(path, lineno, parts)
                continue
            if len(parts) < 2:
                raise ParseError(path, lineno, "entry needs ROW COL")
            i, j = _ints(path, lineno, parts[:2])
            if not (1 <= i <= size[0] and 1 <= j <= size[1]):
                raise ParseError(path, lineno, f"entry ({i}, {j}) outside {size[0]}x{size[1]}")
            entries.append((i - 1, j - 1))
    if size is None:
        raise ParseError(path, None, "missing size line")
    if len(entries) != size[2]:
        raise ParseError(path, None, f"header declares {size[2]} entries, found {len(entries)}")
    pairs = np.array(entries, dtype=np.int64).reshape(-1, 2)
    if symmetry != "general":
        off = pairs[pairs[:, 0] != pairs[:, 1]]
        pairs = np.concatenate([pairs, off[:, ::-1]])
    n = max(size[0], size[1])
    return pairs, np.arange(1, n + 1, dtype=np.int64)


def load_static(path, format: str | None = None, return_ids: bool = False):
    """Load a static graph, deduplicated and with self-loops on every vertex.

    Edge-list ids are compacted to ``[0, |V|)``; Matrix Market keeps its
    ``1..N`` indexing shifted to zero.  With ``return_ids`` the original ids
    are returned alongside the graph.
    """
    desc = detect_format(path, format)
    if desc.format == "matrix-market":
        pairs, ids = _load_matrix_market(desc.path)
    elif desc.format == "edge-list":
        pairs, ids = _load_edge_list(desc.path)
    else:
        ts = load_temporal(desc.path)
        pairs, ids = np.column_stack([ts.src, ts.dst]), ts.original_ids
    g = add_self_loops(DynGraph.from_edges(len(ids), pairs))
    return (g, ids) if return_ids else g


def format_float(x: float) -> str:
    """17 significant digits, enough for an exact round trip of any double."""
    return format(float(x), ".17g")


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format_float(x)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return str(x)


def write_csv(rows: Sequence, path, columns: Sequence[str] | None = None) -> None:
    """Write dicts or dataclass instances as CSV with a header row.

    Floats are written with 17 significant digits, so reading a cell back
    with ``float`` reproduces it exactly.
    """
    dict_rows = [dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r) for r in rows]
    if columns is None:
        if not dict_rows:
            raise ValueError("columns are required when writing an empty row set")
        columns = list(dict_rows[0])
    for i, r in enumerate(dict_rows):
        if set(r) != set(columns):
            raise ValueError(f"row {i} does not match the column schema")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for r in dict_rows:
            w.writerow([_cell(r[c]) for c in columns])


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_ranks(path, ranks, ids=None) -> None:
    """Tab-separated ``original_id<TAB>rank`` lines."""
    ranks = np.asarray(ranks, dtype=np.float64)
    ids = np.arange(len(ranks)) if ids is None else np.asarray(ids)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id\trank\n")
        for i, r in zip(ids.tolist(), ranks.tolist()):
            fh.write(f"{i}\t{format_float(r)}\n")


def write_edge_list(g: DynGraph, path, ids=None, include_loops: bool = False) -> None:
    edges = g.edges()
    if not include_loops:
        edges = edges[edges[:, 0] != edges[:, 1]]
    if ids is not None:
        edges = np.asarray(ids)[edges]
    tmp = f"{path}.tmp"
    np.savetxt(tmp, edges, fmt="%d", delimiter=" ")
    os.replace(tmp, path)
