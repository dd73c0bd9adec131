import numpy as np
import pytest

from dfrank.graph import BatchUpdate, DynGraph, add_self_loops, apply_batch, normalize_batch


def random_graph(seed, n, avg_degree, loops=True):
    rng = np.random.default_rng(seed)
    g = DynGraph.from_edges(n, rng.integers(0, n, size=(int(n * avg_degree), 2)))
    return add_self_loops(g) if loops else g


def random_insertions(g, k, rng):
    """Up to ``k`` distinct absent edges, drawn uniformly."""
    cand = rng.integers(0, g.num_vertices, size=(20 * k + 20, 2))
    cand = cand[~g.contains(cand)]
    _, first = np.unique(cand[:, 0] * g.num_vertices + cand[:, 1], return_index=True)
    return cand[np.sort(first)][:k]


def dense_transition(g):
    """Column-stochastic matrix M with M[v, u] = 1 / outdeg(u) for each edge u -> v."""
    n = g.num_vertices
    M = np.zeros((n, n))
    for u, v in g.edges():
        M[v, u] += 1.0
    return M / M.sum(axis=0, keepdims=True)


def dense_pagerank(g, alpha=0.85):
    """Exact fixpoint by a dense linear solve of (I - alpha M) r = (1 - alpha) / n."""
    n = g.num_vertices
    M = dense_transition(g)
    return np.linalg.solve(np.eye(n) - alpha * M, np.full(n, (1 - alpha) / n))


def dense_power(g, iters, alpha=0.85):
    n = g.num_vertices
    M = dense_transition(g)
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        r = alpha * (M @ r) + (1 - alpha) / n
    return r


def self_loop_fixpoint(c, d, n, alpha, start, tol=1e-13):
    """Iterate r <- alpha * (c + r / d) + (1 - alpha) / n with c held fixed.

    Stops once the contraction bound puts the remaining error below ``tol``.
    """
    rho = alpha / d
    r = start
    for _ in range(1_000_000):
        nxt = alpha * (c + r / d) + (1 - alpha) / n
        if abs(nxt - r) * rho / (1 - rho) < tol:
            return nxt
        r = nxt
    raise AssertionError("recurrence did not settle")


def contribution_without_self(g, ranks, v):
    """Sum of ranks[u] / outdeg(u) over in-neighbours u != v, straight from the edge list."""
    deg = {}
    for u, _ in g.edges():
        deg[int(u)] = deg.get(int(u), 0) + 1
    return sum(ranks[u] / deg[int(u)] for u, w in g.edges() if w == v and u != v)


# The 16-vertex walkthrough graph, labelled 1..16 and stored as id = label - 1.
# Before the batch it has 23 edges including 2->1 and excluding 4->12.
WALKTHROUGH_EDGES = [
    (2, 1), (2, 8), (4, 14),
    (1, 3), (8, 5), (8, 9), (12, 10), (12, 14), (14, 15),
    (3, 4), (5, 6), (9, 10), (15, 16),
    (10, 6), (6, 16), (16, 1), (10, 9), (16, 5),
    (7, 2), (11, 12), (13, 6), (7, 11), (11, 13),
]


def L(*labels):
    return {x - 1 for x in labels}


@pytest.fixture
def walkthrough():
    """(g_prev, g_curr, batch) for the walkthrough: delete 2->1, insert 4->12."""
    assert len(WALKTHROUGH_EDGES) == 23
    g_prev = add_self_loops(DynGraph.from_edges(16, [(u - 1, v - 1) for u, v in WALKTHROUGH_EDGES]))
    b = normalize_batch(deletions=[(1, 0)], insertions=[(3, 11)])
    return g_prev, apply_batch(g_prev, b), b


@pytest.fixture
def empty_batch():
    return BatchUpdate()
