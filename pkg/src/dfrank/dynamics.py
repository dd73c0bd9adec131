"""Batch sequences for experiments: temporal replay and random 80/20 batches."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import BatchUpdate, DynGraph, add_self_loops, normalize_batch

__all__ = [
    "ExperimentPlan",
    "PlanTruncatedWarning",
    "ReplayPlan",
    "SamplingError",
    "TemporalStream",
    "batch_size_for",
    "random_batch",
    "replay_plan",
]

PRNG_NAME = "numpy.random.PCG64"


class SamplingError(ValueError):
    """Not enough candidate edges to draw the requested batch."""


class PlanTruncatedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TemporalStream:
    """Timestamped edge arrivals over a dense vertex universe, time-ordered."""

    src: np.ndarray
    dst: np.ndarray
    time: np.ndarray
    num_vertices: int
    original_ids: np.ndarray | None = None

    def __post_init__(self):
        if not (len(self.src) == len(self.dst) == len(self.time)):
            raise ValueError("src, dst and time must have equal lengths")
        if len(self.time) > 1 and np.any(np.diff(self.time) < 0):
            raise ValueError("events must be sorted by timestamp")
        if len(self.src) and max(self.src.max(), self.dst.max()) >= self.num_vertices:
            raise ValueError("event endpoint outside the vertex universe")

    @classmethod
    def from_events(cls, events, num_vertices: int | None = None) -> "TemporalStream":
        """Build from ``(u, v, t)`` triples, stably sorting by ``t``."""
        arr = np.asarray(events, dtype=np.int64).reshape(-1, 3)
        order = np.argsort(arr[:, 2], kind="stable")
        arr = arr[order]
        n = int(arr[:, :2].max()) + 1 if num_vertices is None and len(arr) else int(num_vertices or 0)
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), n)

    @property
    def num_events(self) -> int:
        return len(self.src)

    def num_static_edges(self) -> int:
        return len(np.unique(self.src * self.num_vertices + self.dst))


@dataclass(frozen=True)
class ExperimentPlan:
    """Knobs shared by replay and random batch generation.

    ``batch_size`` is an absolute edge count; use :func:`batch_size_for` to
    derive it from a fraction of ``|E_T|`` or ``|E|``.
    """

    batch_size: int = 1
    preload_fraction: float = 0.90
    num_batches: int = 100
    mix: float = 0.80
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.preload_fraction <= 1.0:
            raise ValueError("preload_fraction must lie in (0, 1]")
        if self.num_batches < 1:
            raise ValueError("num_batches must be at least 1")
        if not 0.0 <= self.mix <= 1.0:
            raise ValueError("mix must lie in [0, 1]")
        if self.batch_size < 0:
            raise ValueError("batch_size must be non-negative")


def batch_size_for(fraction: float, total: int) -> int:
    """``max(1, round_half_up(fraction * total))``."""
    if fraction <= 0:
        raise ValueError("batch fraction must be positive")
    return max(1, math.floor(fraction * total + 0.5))


class ReplayPlan(NamedTuple):
    initial: DynGraph
    batches: list[BatchUpdate]
    batch_size: int
    truncated: bool


def replay_plan(ts: TemporalStream, plan: ExperimentPlan) -> ReplayPlan:
    """Preload a prefix of the stream, then cut the next events into batches.

    Each batch consumes ``plan.batch_size`` events.  An event whose edge is
    already in the graph (or repeats within the batch) still consumes budget
    but adds nothing, so batches contain insertions only.
    """
    n, total = ts.num_vertices, ts.num_events
    preload = math.floor(plan.preload_fraction * total)
    if preload < 1:
        raise ValueError("preload would load no events; stream too short")
    keys = ts.src * n + ts.dst
    _, first = np.unique(keys, return_index=True)
    is_first = np.zeros(total, dtype=bool)
    is_first[first] = True
    is_first &= ts.src != ts.dst  # loops are always present

    initial = add_self_loops(DynGraph.from_edges(n, np.column_stack([ts.src[:preload], ts.dst[:preload]])))
    B = plan.batch_size
    available = total - preload
    count = plan.num_batches if B == 0 else min(plan.num_batches, available // B)
    truncated = count < plan.num_batches
    if truncated:
        warnings.warn(f"stream holds {available} events after preload; only {count} of "
                      f"{plan.num_batches} batches of {B} fit", PlanTruncatedWarning, stacklevel=2)
    batches = []
    for k in range(count):
        lo = preload + k * B
        sel = np.flatnonzero(is_first[lo:lo + B]) + lo
        batches.append(normalize_batch(insertions=np.column_stack([ts.src[sel], ts.dst[sel]])))
    return ReplayPlan(initial, batches, B, truncated)


def _sample_insertions(g: DynGraph, k: int, rng: np.random.Generator, max_rounds: int) -> np.ndarray:
    n = g.num_vertices
    chosen: dict[int, None] = {}
    for _ in range(max_rounds):
        need = k - len(chosen)
        if need <= 0:
            break
        cand = rng.integers(0, n, size=(2 * need + 8, 2))
        cand = cand[~g.contains(cand)]
        for u, v in cand.tolist():
            key = u * n + v
            if key not in chosen:
                chosen[key] = None
                if len(chosen) == k:
                    break
    if len(chosen) < k:
        raise SamplingError(f"insertions: could only find {len(chosen)} of {k} absent vertex pairs")
    keys = np.fromiter(chosen, dtype=np.int64, count=k)
    return np.column_stack([keys // n, keys % n])


def random_batch(g: DynGraph, plan: ExperimentPlan, rng: np.random.Generator | None = None,
                 max_rounds: int = 64) -> BatchUpdate:
    """Random batch of ``plan.batch_size`` edges, split by ``plan.mix``.

    Insertions are uniform vertex pairs absent from ``g``; deletions are drawn
    uniformly from its non-loop edges.  The vertex set never changes.
    """
    if rng is None:
        rng = np.random.default_rng(plan.seed)
    B = plan.batch_size
    n_ins = math.ceil(round(plan.mix * B, 9))
    n_del = B - n_ins
    edges = g.edges()
    edges = edges[edges[:, 0] != edges[:, 1]]
    if n_del > len(edges):
        raise SamplingError(f"deletions: requested {n_del} but the graph has {len(edges)} non-loop edges")
    dels = edges[rng.choice(len(edges), size=n_del, replace=False)] if n_del else edges[:0]
    ins = _sample_insertions(g, n_ins, rng, max_rounds) if n_ins else np.empty((0, 2), dtype=np.int64)
    return normalize_batch(dels, ins)
