"""Reference ranks, error norms and aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algorithms import PrOptions, PrResult, Strategy, static_pagerank
from .graph import DynGraph

__all__ = ["ErrorReport", "error_report", "geomean", "l1_error", "linf_error", "reference_ranks"]

REFERENCE_TOL = 1e-100
REFERENCE_ITERS = 500


def reference_ranks(g: DynGraph, alpha: float = 0.85, threads: int = 1) -> np.ndarray:
    """Ground-truth ranks: synchronous power iteration at an unreachable tolerance.

    In practice this runs exactly ``REFERENCE_ITERS`` sweeps unless the ranks
    stop changing altogether (e.g. a loops-only graph).
    """
    opts = PrOptions(alpha=alpha, tol=REFERENCE_TOL, max_iters=REFERENCE_ITERS,
                     strategy=Strategy.STATIC, threads=threads)
    return static_pagerank(g, opts).ranks


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"rank vectors differ in shape: {a.shape} vs {b.shape}")
    return a, b


def l1_error(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.abs(a - b).sum())


def linf_error(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.abs(a - b).max()) if a.size else 0.0


def geomean(xs) -> float:
    """Geometric mean of strictly positive values."""
    xs = [float(x) for x in xs]
    if not xs:
        raise ValueError("geomean of an empty sequence")
    if any(not x > 0.0 for x in xs):
        raise ValueError("geomean requires strictly positive values")
    return math.exp(math.fsum(math.log(x) for x in xs) / len(xs))


@dataclass(frozen=True)
class ErrorReport:
    l1: float
    linf: float
    ever_affected_fraction: float
    elapsed: float
    iterations: int


def error_report(result: PrResult, reference) -> ErrorReport:
    return ErrorReport(
        l1=l1_error(result.ranks, reference),
        linf=linf_error(result.ranks, reference),
        ever_affected_fraction=result.ever_affected_fraction,
        elapsed=result.elapsed,
        iterations=result.iterations,
    )
