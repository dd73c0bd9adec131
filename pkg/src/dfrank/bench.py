"""Experiment drivers behind the ``dfrank`` subcommands.

Each driver returns a list of :class:`RunRecord`, one per strategy run on one
batch, plus a metadata dict.  Every dynamic strategy carries its own rank
lineage from batch to batch; Static restarts from uniform on every batch.
"""
from __future__ import annotations

import logging
import math
import warnings
from collections import defaultdict
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from . import __version__
from .algorithms import PrOptions, Strategy, run_strategy, static_pagerank
from .dynamics import (PRNG_NAME, ExperimentPlan, PlanTruncatedWarning, SamplingError, TemporalStream,
                       batch_size_for, random_batch, replay_plan)
from .graph import BatchUpdate, DynGraph, add_self_loops, apply_batch
from .metrics import geomean, l1_error, reference_ranks

log = logging.getLogger(__name__)

DEFAULT_TEMPORAL_FRACTIONS = (1e-5, 1e-4, 1e-3)
DEFAULT_RANDOM_FRACTIONS = (1e-7, 1e-6, 1e-5, 1e-4, 1e-3)
ALL_STRATEGIES = tuple(Strategy)


@dataclass
class RunRecord:
    graph: str
    strategy: str
    batch_fraction: float
    batch_index: int
    B: int
    elapsed: float
    iterations: int
    residual: float
    l1_error: float
    ever_affected_fraction: float
    threads: int
    seed: int
    status: str = "ok"


COLUMNS = [f.name for f in fields(RunRecord)]
TIMING_COLUMNS = ("elapsed",)


def _opts(strategy: Strategy, threads: int, base: PrOptions | None) -> PrOptions:
    base = base or PrOptions()
    return PrOptions(alpha=base.alpha, tol=base.tol, frontier_tol=base.frontier_tol,
                     prune_tol=base.prune_tol, max_iters=base.max_iters, strategy=strategy,
                     threads=threads, chunk_size=base.chunk_size)


def _warm_up(strategies: Sequence[Strategy], threads: int, base: PrOptions | None) -> None:
    """Trigger kernel compilation so the first timed run is not a JIT outlier."""
    g0 = add_self_loops(DynGraph.from_edges(3, [(0, 1), (1, 2)]))
    b = BatchUpdate(insertions=[(2, 0)])
    g1 = apply_batch(g0, b)
    prev = np.full(3, 1.0 / 3)
    for s in strategies:
        run_strategy(g0, g1, b, prev, _opts(s, threads, base))


def run_temporal(ts: TemporalStream, name: str = "graph", fractions=DEFAULT_TEMPORAL_FRACTIONS,
                 strategies=ALL_STRATEGIES, threads: int = 1, seed: int = 0, num_batches: int = 100,
                 preload_fraction: float = 0.9, reference_every: int = 1,
                 options: PrOptions | None = None) -> tuple[list[RunRecord], dict]:
    """Replay a temporal stream: preload, then consecutive batches per fraction."""
    strategies = [Strategy.parse(s) for s in strategies]
    _warm_up(strategies, threads, options)
    alpha = (options or PrOptions()).alpha
    rows: list[RunRecord] = []
    meta = {"graph": name, "num_vertices": ts.num_vertices, "num_events": ts.num_events, "fractions": []}
    for frac in fractions:
        B = batch_size_for(frac, ts.num_events)
        plan = ExperimentPlan(batch_size=B, preload_fraction=preload_fraction,
                              num_batches=num_batches, seed=seed)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", PlanTruncatedWarning)
            rp = replay_plan(ts, plan)
        for w in caught:
            log.warning("%s: %s", name, w.message)
        status = "truncated" if rp.truncated else "ok"
        meta["fractions"].append({"fraction": frac, "B": B, "batches": len(rp.batches), "truncated": rp.truncated})
        log.info("%s: fraction %g, B=%d, %d batches", name, frac, B, len(rp.batches))

        g = rp.initial
        start = static_pagerank(g, _opts(Strategy.STATIC, threads, options)).ranks
        lineage = {s: start for s in strategies}
        for k, b in enumerate(rp.batches):
            g_next = add_self_loops(apply_batch(g, b))
            ref = reference_ranks(g_next, alpha, threads) if k % reference_every == 0 else None
            for s in strategies:
                res = run_strategy(g, g_next, b, lineage[s], _opts(s, threads, options))
                lineage[s] = res.ranks
                rows.append(RunRecord(name, s.value, frac, k, B, res.elapsed, res.iterations, res.residual,
                                      l1_error(res.ranks, ref) if ref is not None else math.nan,
                                      res.ever_affected_fraction, threads, seed, status))
            g = g_next
    return rows, meta


def run_random(g: DynGraph, name: str = "graph", fractions=DEFAULT_RANDOM_FRACTIONS, mix: float = 0.8,
               strategies=ALL_STRATEGIES, trials: int = 5, threads: int = 1, seed: int = 0,
               options: PrOptions | None = None) -> tuple[list[RunRecord], dict]:
    """Apply independent random batches to a static graph.

    Trial ``t`` at fraction index ``i`` draws its batch from a generator
    seeded with ``(seed, i, t)``, so batches do not depend on thread count
    or on which strategies run.
    """
    strategies = [Strategy.parse(s) for s in strategies]
    _warm_up(strategies, threads, options)
    alpha = (options or PrOptions()).alpha
    start = static_pagerank(g, _opts(Strategy.STATIC, threads, options)).ranks
    rows: list[RunRecord] = []
    meta = {"graph": name, "num_vertices": g.num_vertices, "num_edges": g.num_edges, "mix": mix,
            "trials": trials, "fractions": []}
    for i, frac in enumerate(fractions):
        B = batch_size_for(frac, g.num_edges)
        plan = ExperimentPlan(batch_size=B, mix=mix, seed=seed)
        meta["fractions"].append({"fraction": frac, "B": B})
        log.info("%s: fraction %g, B=%d, %d trials", name, frac, B, trials)
        for t in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence([seed, i, t]))
            try:
                b = random_batch(g, plan, rng)
            except SamplingError as exc:
                log.warning("%s: trial %d at fraction %g: %s", name, t, frac, exc)
                for s in strategies:
                    rows.append(RunRecord(name, s.value, frac, t, B, math.nan, 0, math.nan, math.nan,
                                          math.nan, threads, seed, f"error: {exc}"))
                continue
            g_next = add_self_loops(apply_batch(g, b))
            ref = reference_ranks(g_next, alpha, threads)
            for s in strategies:
                res = run_strategy(g, g_next, b, start, _opts(s, threads, options))
                rows.append(RunRecord(name, s.value, frac, t, B, res.elapsed, res.iterations, res.residual,
                                      l1_error(res.ranks, ref), res.ever_affected_fraction, threads, seed))
    return rows, meta


def run_scaling(ts: TemporalStream, name: str = "graph", fraction: float = 1e-4,
                strategies=ALL_STRATEGIES, thread_list=(1, 2, 4, 8), seed: int = 0,
                **kwargs) -> tuple[list[RunRecord], dict]:
    """The temporal experiment at one fraction, repeated per thread count."""
    rows: list[RunRecord] = []
    meta = {"graph": name, "thread_list": list(thread_list), "runs": []}
    for t in thread_list:
        r, m = run_temporal(ts, name, [fraction], strategies, threads=t, seed=seed, **kwargs)
        rows.extend(r)
        meta["runs"].append(m)
    return rows, meta


def _mean_or_nan(xs):
    xs = [x for x in xs if not math.isnan(x)]
    return math.fsum(xs) / len(xs) if xs else math.nan


def _geomean_or_nan(xs):
    xs = [x for x in xs if not math.isnan(x)]
    try:
        return geomean(xs)
    except ValueError:
        return math.nan


def summarize(rows: Sequence[RunRecord]) -> list[dict]:
    """Per (graph, strategy, fraction, threads) means over batches.

    Geometric means are NaN when any value is zero (e.g. an exact match with
    the reference); the arithmetic means are always reported next to them.
    """
    groups = defaultdict(list)
    for r in rows:
        if r.status.startswith("error"):
            continue
        groups[(r.graph, r.strategy, r.batch_fraction, r.threads)].append(r)
    out = []
    for (graph, strategy, frac, threads), rs in groups.items():
        el = [r.elapsed for r in rs]
        err = [r.l1_error for r in rs]
        out.append({
            "graph": graph, "strategy": strategy, "batch_fraction": frac, "threads": threads,
            "batches": len(rs),
            "elapsed_geomean": _geomean_or_nan(el), "elapsed_mean": _mean_or_nan(el),
            "l1_error_geomean": _geomean_or_nan(err), "l1_error_mean": _mean_or_nan(err),
            "ever_affected_fraction_mean": _mean_or_nan([r.ever_affected_fraction for r in rs]),
            "iterations_mean": _mean_or_nan([float(r.iterations) for r in rs]),
        })
    return out


def metadata(command: str, params: dict, meta: dict) -> dict:
    return {"command": command, "version": __version__, "prng": PRNG_NAME, "params": params, **meta}


def strip_timing(rows: Sequence[RunRecord]) -> list[dict]:
    return [{k: v for k, v in asdict(r).items() if k not in TIMING_COLUMNS} for r in rows]
