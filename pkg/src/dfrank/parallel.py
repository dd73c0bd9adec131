"""Dynamically scheduled chunked loops over GIL-free kernels.

Workers claim fixed-size chunks from a shared counter until the range is
exhausted, the same policy as an OpenMP ``schedule(dynamic, chunk)`` loop.
With one thread the whole range runs as a single call in ascending order,
which keeps single-threaded runs bit-for-bit reproducible.
"""
from __future__ import annotations

import itertools
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

CHUNK_SIZE = 2048

_pools: dict[int, ThreadPoolExecutor] = {}
_pools_lock = threading.Lock()


def default_threads() -> int:
    """Thread count from ``DFRANK_THREADS``, else 1."""
    raw = os.environ.get("DFRANK_THREADS", "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError(f"DFRANK_THREADS must be >= 1, got {raw!r}")
    return n


def _pool(threads: int) -> ThreadPoolExecutor:
    with _pools_lock:
        pool = _pools.get(threads)
        if pool is None:
            pool = _pools[threads] = ThreadPoolExecutor(threads, thread_name_prefix="dfrank")
        return pool


def parallel_max(body: Callable[[int, int], float], n: int, threads: int = 1,
                 chunk_size: int = CHUNK_SIZE) -> float:
    """Run ``body(lo, hi)`` over ``[0, n)`` and max-reduce the returned values.

    ``body`` must release the GIL for threads to overlap.
    """
    if n <= 0:
        return 0.0
    if threads <= 1 or n <= chunk_size:
        return float(body(0, n))
    counter = itertools.count()

    def worker() -> float:
        best = 0.0
        while True:
            lo = next(counter) * chunk_size
            if lo >= n:
                return best
            val = body(lo, min(lo + chunk_size, n))
            if val > best:
                best = val

    workers = min(threads, -(-n // chunk_size))
    futures = [_pool(threads).submit(worker) for _ in range(workers)]
    return float(max(f.result() for f in futures))
