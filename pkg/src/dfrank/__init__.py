"""Incremental PageRank on dynamic directed graphs."""
from .algorithms import (AffectedFlags, PrOptions, PrResult, Strategy, df_mark_initial, dt_mark_affected,
                         dynamic_frontier, dynamic_traversal, naive_dynamic, rank_closed_loop, rank_pull,
                         run_strategy, static_pagerank)
from .graph import (BatchUpdate, BatchValidationError, DynGraph, add_self_loops, apply_batch,
                    normalize_batch, union_out_neighbors)

__all__ = [
    "AffectedFlags", "BatchUpdate", "BatchValidationError", "DynGraph", "PrOptions", "PrResult", "Strategy",
    "add_self_loops", "apply_batch", "df_mark_initial", "dt_mark_affected", "dynamic_frontier",
    "dynamic_traversal", "naive_dynamic", "normalize_batch", "rank_closed_loop", "rank_pull", "run_strategy",
    "static_pagerank", "union_out_neighbors",
]

__version__ = "0.1.0"
