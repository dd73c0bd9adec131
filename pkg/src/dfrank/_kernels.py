"""Numba kernels behind the rank strategies.

Every kernel works on a half-open slice ``[lo, hi)`` of either the vertex
range or an explicit vertex list, so the executor can hand out chunks to
worker threads.  All kernels release the GIL.  Ranks written by one worker
may be read, stale or fresh, by another; that is the asynchronous contract.
"""
import numpy as np
from numba import njit

_JIT = dict(nogil=True, cache=True)


@njit(**_JIT)
def pull_sum(in_off, in_src, deg, r, v):
    c = 0.0
    for j in range(in_off[v], in_off[v + 1]):
        u = in_src[j]
        c += r[u] / deg[u]
    return c


@njit(**_JIT)
def pull_one(in_off, in_src, deg, r, v, alpha, c0):
    return c0 + alpha * pull_sum(in_off, in_src, deg, r, v)


@njit(**_JIT)
def closed_loop_one(in_off, in_src, deg, r, v, alpha, c0):
    c = pull_sum(in_off, in_src, deg, r, v)
    d = deg[v]
    return 1.0 / (1.0 - alpha / d) * (c0 + alpha * (c - r[v] / d))


@njit(**_JIT)
def static_sweep(in_off, in_src, contrib, r_new, r_old, lo, hi, alpha, c0):
    """Synchronous step: ``r_new[v]`` from the frozen contributions ``r_old / deg``."""
    delta = 0.0
    for v in range(lo, hi):
        c = 0.0
        for j in range(in_off[v], in_off[v + 1]):
            c += contrib[in_src[j]]
        x = c0 + alpha * c
        dx = abs(x - r_old[v])
        if dx > delta:
            delta = dx
        r_new[v] = x
    return delta


@njit(**_JIT)
def async_sweep_range(in_off, in_src, deg, r, lo, hi, alpha, c0):
    delta = 0.0
    for v in range(lo, hi):
        x = pull_one(in_off, in_src, deg, r, v, alpha, c0)
        dx = abs(x - r[v])
        if dx > delta:
            delta = dx
        r[v] = x
    return delta


@njit(**_JIT)
def async_sweep_list(in_off, in_src, deg, r, verts, lo, hi, alpha, c0):
    delta = 0.0
    for i in range(lo, hi):
        v = verts[i]
        x = pull_one(in_off, in_src, deg, r, v, alpha, c0)
        dx = abs(x - r[v])
        if dx > delta:
            delta = dx
        r[v] = x
    return delta


@njit(**_JIT)
def frontier_sweep(in_off, in_src, out_off, out_tgt, deg, r, verts, lo, hi,
                   flags, ever, alpha, c0, frontier_tol, prune_tol, prune):
    """One pass of the frontier update over ``verts[lo:hi]``.

    Pruned vertices are unflagged before the expansion test, so a vertex
    whose self-loop expands the frontier flags itself again.
    """
    delta = 0.0
    for i in range(lo, hi):
        v = verts[i]
        if prune:
            x = closed_loop_one(in_off, in_src, deg, r, v, alpha, c0)
        else:
            x = pull_one(in_off, in_src, deg, r, v, alpha, c0)
        old = r[v]
        dx = abs(x - old)
        if dx > delta:
            delta = dx
        rel = dx / max(x, old)
        if prune and rel <= prune_tol:
            flags[v] = 0
        if rel > frontier_tol:
            for j in range(out_off[v], out_off[v + 1]):
                w = out_tgt[j]
                flags[w] = 1
                ever[w] = 1
        r[v] = x
    return delta


@njit(**_JIT)
def mark_out_neighbors(prev_off, prev_tgt, curr_off, curr_tgt, sources, flags, ever):
    for i in range(len(sources)):
        u = sources[i]
        for j in range(prev_off[u], prev_off[u + 1]):
            flags[prev_tgt[j]] = 1
            ever[prev_tgt[j]] = 1
        for j in range(curr_off[u], curr_off[u + 1]):
            flags[curr_tgt[j]] = 1
            ever[curr_tgt[j]] = 1


@njit(**_JIT)
def mark_reachable(prev_off, prev_tgt, curr_off, curr_tgt, sources, flags):
    """Breadth-first marking over the union of both out-adjacencies."""
    n = len(flags)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for i in range(len(sources)):
        u = sources[i]
        if flags[u] == 0:
            flags[u] = 1
            queue[tail] = u
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for j in range(prev_off[u], prev_off[u + 1]):
            w = prev_tgt[j]
            if flags[w] == 0:
                flags[w] = 1
                queue[tail] = w
                tail += 1
        for j in range(curr_off[u], curr_off[u + 1]):
            w = curr_tgt[j]
            if flags[w] == 0:
                flags[w] = 1
                queue[tail] = w
                tail += 1
    return tail
