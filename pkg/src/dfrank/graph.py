"""Dynamic directed graph with mirrored CSR adjacency and batched updates.

Edges are stored as two sorted key arrays, ``u * n + v`` (out order) and
``v * n + u`` (in order).  CSR views for the kernels are derived from them.
A batch produces a *new* graph, so the caller holds the previous and the
current snapshot side by side for one update cycle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BatchUpdate",
    "BatchValidationError",
    "DynGraph",
    "add_self_loops",
    "apply_batch",
    "normalize_batch",
    "union_out_neighbors",
]


class BatchValidationError(ValueError):
    """A batch does not fit the graph it is applied to."""


def _as_pairs(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (m, 2) array of edges, got shape {arr.shape}")
    return arr


def _csr(keys: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    heads = keys // n if n else keys
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(heads, minlength=n), out=offsets[1:])
    tails = (keys % n).astype(np.int32) if n else keys.astype(np.int32)
    return offsets, tails


class DynGraph:
    """Directed graph over the fixed vertex universe ``[0, num_vertices)``.

    Instances are immutable; use :func:`apply_batch` and
    :func:`add_self_loops` to derive new snapshots.

    Attributes
    ----------
    out_offsets, out_targets : CSR of out-neighbours, sorted per vertex.
    in_offsets, in_sources : CSR of in-neighbours, sorted per vertex.
    out_degree : int64 array, ``out_degree[v] == len(out(v))``.
    """

    def __init__(self, num_vertices: int, out_keys: np.ndarray, in_keys: np.ndarray | None = None):
        n = int(num_vertices)
        if n < 0:
            raise ValueError("num_vertices must be non-negative")
        self.num_vertices = n
        self._out_keys = np.asarray(out_keys, dtype=np.int64)
        if in_keys is None:
            u, v = np.divmod(self._out_keys, max(n, 1))
            in_keys = np.sort(v * n + u)
        self._in_keys = np.asarray(in_keys, dtype=np.int64)
        self.out_offsets, self.out_targets = _csr(self._out_keys, n)
        self.in_offsets, self.in_sources = _csr(self._in_keys, n)
        self.out_degree = np.diff(self.out_offsets)

    @classmethod
    def from_edges(cls, num_vertices: int, edges) -> "DynGraph":
        """Build a graph from ``(u, v)`` pairs; duplicates are collapsed."""
        n = int(num_vertices)
        pairs = _as_pairs(edges)
        if len(pairs) and (pairs.min() < 0 or pairs.max() >= n):
            raise ValueError(f"edge endpoint outside [0, {n})")
        return cls(n, np.unique(pairs[:, 0] * n + pairs[:, 1]))

    @property
    def num_edges(self) -> int:
        return len(self._out_keys)

    def out_neighbors(self, u: int) -> np.ndarray:
        return self.out_targets[self.out_offsets[u]:self.out_offsets[u + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.in_sources[self.in_offsets[v]:self.in_offsets[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        key = int(u) * self.num_vertices + int(v)
        i = np.searchsorted(self._out_keys, key)
        return bool(i < len(self._out_keys) and self._out_keys[i] == key)

    def contains(self, pairs) -> np.ndarray:
        """Vectorised membership test for an ``(m, 2)`` array of edges."""
        pairs = _as_pairs(pairs)
        keys = pairs[:, 0] * self.num_vertices + pairs[:, 1]
        idx = np.searchsorted(self._out_keys, keys)
        hit = idx < len(self._out_keys)
        hit[hit] = self._out_keys[idx[hit]] == keys[hit]
        return hit

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array in (source, target) order."""
        n = max(self.num_vertices, 1)
        u, v = np.divmod(self._out_keys, n)
        return np.column_stack([u, v])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges()}

    def num_self_loops(self) -> int:
        n = max(self.num_vertices, 1)
        return int(np.count_nonzero(self._out_keys // n == self._out_keys % n))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DynGraph):
            return NotImplemented
        return self.num_vertices == other.num_vertices and np.array_equal(self._out_keys, other._out_keys)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"DynGraph(num_vertices={self.num_vertices}, num_edges={self.num_edges})"


@dataclass(frozen=True)
class BatchUpdate:
    """Edge deletions and insertions applied together between two snapshots."""

    deletions: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))
    insertions: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))

    def __post_init__(self):
        object.__setattr__(self, "deletions", _as_pairs(self.deletions))
        object.__setattr__(self, "insertions", _as_pairs(self.insertions))

    def __len__(self) -> int:
        return len(self.deletions) + len(self.insertions)

    def is_empty(self) -> bool:
        return len(self) == 0

    def sources(self) -> np.ndarray:
        """Unique source vertices over deletions and insertions."""
        return np.unique(np.concatenate([self.deletions[:, 0], self.insertions[:, 0]]))

    def reversed(self) -> "BatchUpdate":
        """The batch that undoes this one."""
        return BatchUpdate(deletions=self.insertions, insertions=self.deletions)


def normalize_batch(deletions=(), insertions=()) -> BatchUpdate:
    """Canonical form of a raw batch.

    Duplicates collapse, an edge listed as both deleted and inserted becomes a
    no-op, and self-loop events are dropped since every vertex keeps its loop.
    Both lists come back sorted by (source, target).
    """
    dels = np.unique(_as_pairs(deletions), axis=0)
    ins = np.unique(_as_pairs(insertions), axis=0)
    dels = dels[dels[:, 0] != dels[:, 1]]
    ins = ins[ins[:, 0] != ins[:, 1]]
    if len(dels) and len(ins):
        both = {tuple(e) for e in dels.tolist()} & {tuple(e) for e in ins.tolist()}
        if both:
            dels = np.array([e for e in dels.tolist() if tuple(e) not in both], dtype=np.int64).reshape(-1, 2)
            ins = np.array([e for e in ins.tolist() if tuple(e) not in both], dtype=np.int64).reshape(-1, 2)
    return BatchUpdate(deletions=dels, insertions=ins)


def add_self_loops(g: DynGraph) -> DynGraph:
    """Return ``g`` with a self-loop on every vertex (idempotent)."""
    n = g.num_vertices
    loops = np.arange(n, dtype=np.int64) * (n + 1)
    out_keys = np.union1d(g._out_keys, loops)
    if len(out_keys) == g.num_edges:
        return g
    in_keys = np.union1d(g._in_keys, loops)  # a loop key is the same in both orders
    return DynGraph(n, out_keys, in_keys)


def _remove_keys(keys: np.ndarray, drop: np.ndarray, what: str) -> np.ndarray:
    if not len(drop):
        return keys
    idx = np.searchsorted(keys, drop)
    ok = idx < len(keys)
    ok[ok] = keys[idx[ok]] == drop[ok]
    if not ok.all():
        raise BatchValidationError(f"{what}: {int((~ok).sum())} edge(s) not present in the graph")
    return np.delete(keys, idx)


def _insert_keys(keys: np.ndarray, add: np.ndarray, what: str) -> np.ndarray:
    if not len(add):
        return keys
    idx = np.searchsorted(keys, add)
    ok = idx < len(keys)
    ok[ok] = keys[idx[ok]] == add[ok]
    if ok.any():
        raise BatchValidationError(f"{what}: {int(ok.sum())} edge(s) already present in the graph")
    return np.insert(keys, idx, add)


def apply_batch(g: DynGraph, b: BatchUpdate) -> DynGraph:
    """Return the snapshot ``(E \\ deletions) | insertions``.

    ``g`` is left untouched and remains usable as the previous snapshot.

    Raises
    ------
    BatchValidationError
        If an endpoint is out of range, a self-loop is deleted, a deleted edge
        is absent, or an inserted edge is already present.
    """
    n = g.num_vertices
    if b.is_empty():
        return g
    for name, pairs in (("deletions", b.deletions), ("insertions", b.insertions)):
        if len(pairs) and (pairs.min() < 0 or pairs.max() >= n):
            raise BatchValidationError(f"{name}: vertex id outside [0, {n})")
    if np.any(b.deletions[:, 0] == b.deletions[:, 1]):
        raise BatchValidationError("deletions: self-loops cannot be deleted")
    d, i = b.deletions, b.insertions
    d_out, i_out = np.sort(d[:, 0] * n + d[:, 1]), np.sort(i[:, 0] * n + i[:, 1])
    if len(np.unique(d_out)) != len(d_out) or len(np.unique(i_out)) != len(i_out):
        raise BatchValidationError("batch contains duplicate edges; normalize it first")
    if len(np.intersect1d(d_out, i_out)):
        raise BatchValidationError("batch deletes and inserts the same edge; normalize it first")
    d_in, i_in = np.sort(d[:, 1] * n + d[:, 0]), np.sort(i[:, 1] * n + i[:, 0])
    out_keys = _insert_keys(_remove_keys(g._out_keys, d_out, "deletions"), i_out, "insertions")
    in_keys = _insert_keys(_remove_keys(g._in_keys, d_in, "deletions"), i_in, "insertions")
    return DynGraph(n, out_keys, in_keys)


def union_out_neighbors(g_prev: DynGraph, g_curr: DynGraph, u: int) -> set[int]:
    """Out-neighbours of ``u`` in either snapshot."""
    return set(g_prev.out_neighbors(u).tolist()) | set(g_curr.out_neighbors(u).tolist())
