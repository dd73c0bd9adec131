"""PageRank strategies for dynamic graphs.

All strategies pull ranks from in-neighbours, so each vertex's rank has a
single writer per sweep.  Static iterates synchronously with two vectors;
the dynamic strategies share one vector and update it in place.

``Static``
    Power iteration from the uniform vector.
``ND`` (naive dynamic)
    Same kernel, started from the previous ranks, over every vertex.
``DT`` (dynamic traversal)
    Iterates only over vertices reachable from the updated sources in
    either snapshot.
``DF`` (dynamic frontier)
    Starts from the out-neighbours of updated sources and flags the
    out-neighbours of any vertex whose relative rank change exceeds
    ``frontier_tol``.
``DFP`` (dynamic frontier with pruning)
    DF that also unflags vertices whose relative change is at most
    ``prune_tol`` and uses the closed-form self-loop update.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .graph import BatchUpdate, DynGraph
from .parallel import CHUNK_SIZE, parallel_max

__all__ = [
    "AffectedFlags",
    "PrOptions",
    "PrResult",
    "Strategy",
    "df_mark_initial",
    "dt_mark_affected",
    "dynamic_frontier",
    "dynamic_traversal",
    "naive_dynamic",
    "rank_closed_loop",
    "rank_pull",
    "run_strategy",
    "static_pagerank",
]


class Strategy(str, enum.Enum):
    STATIC = "static"
    ND = "nd"
    DT = "dt"
    DF = "df"
    DFP = "dfp"

    @classmethod
    def parse(cls, name: "str | Strategy") -> "Strategy":
        if isinstance(name, Strategy):
            return name
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {"naive": "nd", "naivedynamic": "nd", "traversal": "dt", "frontier": "df"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown strategy {name!r}; expected one of "
                             f"{', '.join(s.value for s in cls)}") from None


@dataclass(frozen=True)
class PrOptions:
    alpha: float = 0.85
    tol: float = 1e-10
    frontier_tol: float = 1e-6
    prune_tol: float = 1e-6
    max_iters: int = 500
    strategy: Strategy = Strategy.DFP
    threads: int = 1
    chunk_size: int = CHUNK_SIZE

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.frontier_tol < 0.0 or self.prune_tol < 0.0:
            raise ValueError("frontier_tol and prune_tol must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.threads < 1 or self.chunk_size < 1:
            raise ValueError("threads and chunk_size must be at least 1")


@dataclass
class AffectedFlags:
    """Per-vertex affected marks plus the record of every vertex ever marked."""

    flags: np.ndarray
    ever: np.ndarray

    @classmethod
    def empty(cls, n: int) -> "AffectedFlags":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    def affected(self) -> set[int]:
        return set(np.flatnonzero(self.flags).tolist())

    def ever_affected(self) -> set[int]:
        return set(np.flatnonzero(self.ever).tolist())

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.flags))

    @property
    def ever_count(self) -> int:
        return int(np.count_nonzero(self.ever))


@dataclass
class PrResult:
    ranks: np.ndarray
    iterations: int
    residual: float
    ever_affected_count: int
    elapsed: float
    ever_affected: np.ndarray | None = field(default=None, repr=False)

    @property
    def ever_affected_fraction(self) -> float:
        n = len(self.ranks)
        return self.ever_affected_count / n if n else 0.0


def _teleport(g: DynGraph, alpha: float) -> float:
    return (1.0 - alpha) / g.num_vertices


def rank_pull(g: DynGraph, ranks: np.ndarray, v: int, alpha: float = 0.85) -> float:
    """Rank of ``v`` pulled from its in-neighbours' current ``ranks``."""
    return float(K.pull_one(g.in_offsets, g.in_sources, g.out_degree,
                            np.asarray(ranks, dtype=np.float64), int(v), alpha, _teleport(g, alpha)))


def rank_closed_loop(g: DynGraph, ranks: np.ndarray, v: int, alpha: float = 0.85) -> float:
    """Rank of ``v`` with its self-loop resolved in closed form.

    Equals the limit of ``r <- alpha * (c + r / d) + (1 - alpha) / |V|`` with
    ``c``, the contribution of the other in-neighbours, held fixed.
    Requires the self-loop ``(v, v)``.
    """
    return float(K.closed_loop_one(g.in_offsets, g.in_sources, g.out_degree,
                                   np.asarray(ranks, dtype=np.float64), int(v), alpha, _teleport(g, alpha)))


def _check_prev(g: DynGraph, prev) -> np.ndarray:
    prev = np.asarray(prev, dtype=np.float64)
    if prev.shape != (g.num_vertices,):
        raise ValueError(f"previous ranks have shape {prev.shape}, expected ({g.num_vertices},)")
    return prev


def static_pagerank(g: DynGraph, opts: PrOptions = PrOptions()) -> PrResult:
    """Synchronous power iteration from the uniform vector."""
    n = g.num_vertices
    alpha, c0 = opts.alpha, _teleport(g, opts.alpha)
    r = np.full(n, 1.0 / n)
    r_new = np.empty(n)
    contrib = np.empty(n)
    deg = g.out_degree.astype(np.float64)
    in_off, in_src = g.in_offsets, g.in_sources

    t0 = time.perf_counter()
    delta, it = 0.0, 0
    while it < opts.max_iters:
        np.divide(r, deg, out=contrib)
        delta = parallel_max(
            lambda lo, hi: K.static_sweep(in_off, in_src, contrib, r_new, r, lo, hi, alpha, c0),
            n, opts.threads, opts.chunk_size)
        r, r_new = r_new, r
        it += 1
        if delta <= opts.tol:
            break
    elapsed = time.perf_counter() - t0
    return PrResult(r, it, delta, n, elapsed, np.ones(n, dtype=np.uint8))


def naive_dynamic(g_curr: DynGraph, prev, opts: PrOptions = PrOptions()) -> PrResult:
    """Asynchronous iteration over all vertices, started from ``prev``."""
    n = g_curr.num_vertices
    r = _check_prev(g_curr, prev).copy()
    alpha, c0 = opts.alpha, _teleport(g_curr, opts.alpha)
    in_off, in_src, deg = g_curr.in_offsets, g_curr.in_sources, g_curr.out_degree

    t0 = time.perf_counter()
    delta, it = 0.0, 0
    while it < opts.max_iters:
        delta = parallel_max(
            lambda lo, hi: K.async_sweep_range(in_off, in_src, deg, r, lo, hi, alpha, c0),
            n, opts.threads, opts.chunk_size)
        it += 1
        if delta <= opts.tol:
            break
    elapsed = time.perf_counter() - t0
    return PrResult(r, it, delta, n, elapsed, np.ones(n, dtype=np.uint8))


def dt_mark_affected(g_prev: DynGraph, g_curr: DynGraph, b: BatchUpdate,
                     out: AffectedFlags | None = None) -> AffectedFlags:
    """Flag every vertex reachable from an updated source in either snapshot."""
    af = out if out is not None else AffectedFlags.empty(g_curr.num_vertices)
    sources = b.sources()
    if len(sources):
        K.mark_reachable(g_prev.out_offsets, g_prev.out_targets,
                         g_curr.out_offsets, g_curr.out_targets, sources, af.flags)
        np.maximum(af.ever, af.flags, out=af.ever)
    return af


def _iterate_list(g: DynGraph, r: np.ndarray, verts: np.ndarray, opts: PrOptions) -> tuple[int, float]:
    alpha, c0 = opts.alpha, _teleport(g, opts.alpha)
    in_off, in_src, deg = g.in_offsets, g.in_sources, g.out_degree
    delta, it = 0.0, 0
    if not len(verts):
        return 0, 0.0
    while it < opts.max_iters:
        delta = parallel_max(
            lambda lo, hi: K.async_sweep_list(in_off, in_src, deg, r, verts, lo, hi, alpha, c0),
            len(verts), opts.threads, opts.chunk_size)
        it += 1
        if delta <= opts.tol:
            break
    return it, delta


def dynamic_traversal(g_prev: DynGraph, g_curr: DynGraph, b: BatchUpdate, prev,
                      opts: PrOptions = PrOptions()) -> PrResult:
    """Asynchronous iteration restricted to the reachable set of the batch."""
    r = _check_prev(g_curr, prev).copy()
    af = AffectedFlags.empty(g_curr.num_vertices)

    t0 = time.perf_counter()
    dt_mark_affected(g_prev, g_curr, b, out=af)
    verts = np.flatnonzero(af.flags)
    it, delta = _iterate_list(g_curr, r, verts, opts)
    elapsed = time.perf_counter() - t0
    return PrResult(r, it, delta, len(verts), elapsed, af.ever)


def df_mark_initial(g_prev: DynGraph, g_curr: DynGraph, b: BatchUpdate,
                    flags: AffectedFlags | None = None) -> AffectedFlags:
    """Flag the out-neighbours, in either snapshot, of every updated source.

    With self-loops in place each source is its own out-neighbour and gets
    flagged too.
    """
    af = flags if flags is not None else AffectedFlags.empty(g_curr.num_vertices)
    sources = b.sources()
    if len(sources):
        K.mark_out_neighbors(g_prev.out_offsets, g_prev.out_targets,
                             g_curr.out_offsets, g_curr.out_targets, sources, af.flags, af.ever)
    return af


def dynamic_frontier(g_prev: DynGraph, g_curr: DynGraph, b: BatchUpdate, prev,
                     opts: PrOptions = PrOptions(), prune: bool = False,
                     trace: list | None = None) -> PrResult:
    """Incremental update that grows (and with ``prune``, shrinks) a frontier.

    Each sweep processes the vertices flagged when it starts; flags set during
    the sweep take effect on the next one.  Iteration stops once the largest
    rank change in a sweep is within ``opts.tol``, or when no vertex is
    flagged.  If ``trace`` is a list, the flagged set after every sweep is
    appended to it.
    """
    n = g_curr.num_vertices
    r = _check_prev(g_curr, prev).copy()
    af = AffectedFlags.empty(n)
    alpha, c0 = opts.alpha, _teleport(g_curr, opts.alpha)
    in_off, in_src, deg = g_curr.in_offsets, g_curr.in_sources, g_curr.out_degree
    out_off, out_tgt = g_curr.out_offsets, g_curr.out_targets
    ftol, ptol = opts.frontier_tol, opts.prune_tol
    flags, ever = af.flags, af.ever

    t0 = time.perf_counter()
    df_mark_initial(g_prev, g_curr, b, af)
    delta, it = 0.0, 0
    while it < opts.max_iters:
        verts = np.flatnonzero(flags)
        if not len(verts):
            delta = 0.0
            break
        delta = parallel_max(
            lambda lo, hi: K.frontier_sweep(in_off, in_src, out_off, out_tgt, deg, r, verts, lo, hi,
                                            flags, ever, alpha, c0, ftol, ptol, prune),
            len(verts), opts.threads, opts.chunk_size)
        it += 1
        if trace is not None:
            trace.append(af.affected())
        if delta <= opts.tol:
            break
    elapsed = time.perf_counter() - t0
    return PrResult(r, it, delta, af.ever_count, elapsed, ever)


def run_strategy(g_prev: DynGraph, g_curr: DynGraph, b: BatchUpdate, prev,
                 opts: PrOptions) -> PrResult:
    """Update ranks after ``b`` with the strategy named in ``opts``.

    ``prev`` is ignored by Static, which always restarts from uniform.
    """
    s = opts.strategy
    if s is Strategy.STATIC:
        return static_pagerank(g_curr, opts)
    if s is Strategy.ND:
        return naive_dynamic(g_curr, prev, opts)
    if s is Strategy.DT:
        return dynamic_traversal(g_prev, g_curr, b, prev, opts)
    return dynamic_frontier(g_prev, g_curr, b, prev, opts, prune=s is Strategy.DFP)
