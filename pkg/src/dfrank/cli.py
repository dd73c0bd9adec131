"""``dfrank`` command line.

Exit status: 0 on success, 1 on invalid input or arguments, 2 on I/O errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .algorithms import PrOptions, Strategy, run_strategy, static_pagerank
from .dynamics import ExperimentPlan, batch_size_for, random_batch, replay_plan
from .graph import add_self_loops, apply_batch
from .io import detect_format, load_static, load_temporal, write_csv, write_ranks
from .parallel import default_threads

log = logging.getLogger("dfrank")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive numbers, got {text!r}")
    return vals


def _ints(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers >= 1, got {text!r}")
    return vals


def _strategies(text: str) -> list[Strategy]:
    try:
        return [Strategy.parse(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser, threads_list: bool = False) -> None:
    p.add_argument("--input", required=True, type=Path, help="dataset file")
    p.add_argument("--format", choices=["temporal-edge-list", "edge-list", "matrix-market"],
                   help="input format (default: by command and file extension)")
    p.add_argument("--name", help="graph name used in the output (default: file stem)")
    p.add_argument("--strategies", type=_strategies, default=list(Strategy),
                   help="comma-separated subset of static,nd,dt,df,dfp (default: all)")
    if threads_list:
        p.add_argument("--threads", type=_ints, default=[1, 2, 4, 8], help="comma-separated thread counts")
    else:
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: $DFRANK_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="CSV output path")
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--frontier-tol", type=float, default=1e-6)
    p.add_argument("--prune-tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=500)


def _replay_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--batches", type=int, default=100, help="batches per fraction")
    p.add_argument("--preload", type=float, default=0.9, help="fraction of events loaded up front")
    p.add_argument("--reference-every", type=int, default=1,
                   help="compute reference ranks on every k-th batch only")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dfrank", description="Incremental PageRank experiments on dynamic graphs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("temporal", help="replay a temporal edge stream in consecutive batches")
    _common(p)
    p.add_argument("--fractions", type=_floats, default=list(bench.DEFAULT_TEMPORAL_FRACTIONS),
                   help="batch sizes as fractions of |E_T|")
    _replay_args(p)

    p = sub.add_parser("random", help="random 80/20 insert/delete batches on a static graph")
    _common(p)
    p.add_argument("--fractions", type=_floats, default=list(bench.DEFAULT_RANDOM_FRACTIONS),
                   help="batch sizes as fractions of |E|")
    p.add_argument("--mix", type=float, default=0.8, help="insertion share of each batch")
    p.add_argument("--trials", type=int, default=5)

    p = sub.add_parser("scaling", help="temporal experiment repeated per thread count")
    _common(p, threads_list=True)
    p.add_argument("--fraction", type=float, default=1e-4)
    _replay_args(p)

    p = sub.add_parser("ranks", help="dump original-id to rank pairs")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", choices=["temporal-edge-list", "edge-list", "matrix-market"])
    p.add_argument("--strategy", type=Strategy.parse, default=Strategy.DFP)
    p.add_argument("--fraction", type=float, default=1e-4,
                   help="batch size for the update lineage of a dynamic strategy")
    p.add_argument("--batches", type=int, default=100)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--out", type=Path, required=True, help="TSV output path")
    return ap


def _options(args) -> PrOptions:
    return PrOptions(alpha=args.alpha, tol=args.tol, frontier_tol=args.frontier_tol,
                     prune_tol=args.prune_tol, max_iters=args.max_iters)


def _threads(args) -> int:
    t = args.threads if args.threads is not None else default_threads()
    if t < 1:
        raise UsageError("--threads must be at least 1")
    return t


def _write_outputs(args, rows, meta) -> None:
    write_csv(rows, args.out, bench.COLUMNS)
    summary = bench.summarize(rows)
    summary_path = args.out.with_suffix(".summary.csv")
    if summary:
        write_csv(summary, summary_path)
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    params = json.loads(json.dumps(params, default=lambda o: getattr(o, "value", str(o))))
    with open(args.out.with_suffix(".meta.json"), "w", encoding="utf-8") as fh:
        json.dump(bench.metadata(args.command, params, meta), fh, indent=2, allow_nan=True)
    log.info("wrote %d rows to %s", len(rows), args.out)


def _is_temporal(args) -> bool:
    if args.format is not None:
        return args.format == "temporal-edge-list"
    return args.command in ("temporal", "scaling")


def cmd_temporal(args) -> None:
    ts = load_temporal(args.input)
    rows, meta = bench.run_temporal(
        ts, args.name or args.input.stem, args.fractions, args.strategies, _threads(args), args.seed,
        num_batches=args.batches, preload_fraction=args.preload, reference_every=args.reference_every,
        options=_options(args))
    _write_outputs(args, rows, meta)


def cmd_random(args) -> None:
    g = load_static(args.input, args.format)
    rows, meta = bench.run_random(
        g, args.name or args.input.stem, args.fractions, args.mix, args.strategies, args.trials,
        _threads(args), args.seed, options=_options(args))
    _write_outputs(args, rows, meta)


def cmd_scaling(args) -> None:
    name = args.name or args.input.stem
    if _is_temporal(args):
        ts = load_temporal(args.input)
        rows, meta = bench.run_scaling(
            ts, name, args.fraction, args.strategies, args.threads, args.seed,
            num_batches=args.batches, preload_fraction=args.preload,
            reference_every=args.reference_every, options=_options(args))
    else:
        g = load_static(args.input, args.format)
        rows, meta = [], {"graph": name, "thread_list": args.threads, "runs": []}
        for t in args.threads:
            r, m = bench.run_random(g, name, [args.fraction], 0.8, args.strategies, 1, t, args.seed,
                                    options=_options(args))
            rows.extend(r)
            meta["runs"].append(m)
    _write_outputs(args, rows, meta)


def cmd_ranks(args) -> None:
    threads = _threads(args)
    opts = PrOptions(alpha=args.alpha, strategy=args.strategy, threads=threads)
    temporal = args.format == "temporal-edge-list" or (args.format is None and _sniff_temporal(args.input))
    if temporal:
        ts = load_temporal(args.input)
        ids = ts.original_ids
        if args.strategy is Strategy.STATIC:
            g = load_static(args.input, "temporal-edge-list")
            ranks = static_pagerank(g, opts).ranks
        else:
            rp = replay_plan(ts, ExperimentPlan(batch_size_for(args.fraction, ts.num_events),
                                                num_batches=args.batches, seed=args.seed))
            g = rp.initial
            ranks = static_pagerank(g, opts).ranks
            for b in rp.batches:
                g_next = add_self_loops(apply_batch(g, b))
                ranks = run_strategy(g, g_next, b, ranks, opts).ranks
                g = g_next
    else:
        g, ids = load_static(args.input, args.format, return_ids=True)
        ranks = static_pagerank(g, opts).ranks
        if args.strategy is not Strategy.STATIC:
            plan = ExperimentPlan(batch_size_for(args.fraction, g.num_edges), seed=args.seed)
            rng = np.random.default_rng(args.seed)
            for _ in range(args.batches):
                b = random_batch(g, plan, rng)
                g_next = add_self_loops(apply_batch(g, b))
                ranks = run_strategy(g, g_next, b, ranks, opts).ranks
                g = g_next
    write_ranks(args.out, ranks, ids)
    log.info("wrote %d ranks to %s", len(ranks), args.out)


def _sniff_temporal(path: Path) -> bool:
    """True when the first data line of a non-Matrix-Market file has 3 columns."""
    if detect_format(path).format == "matrix-market":
        return False
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if s and s[0] not in "#%":
                return len(s.split()) == 3
    return False


COMMANDS = {"temporal": cmd_temporal, "random": cmd_random, "scaling": cmd_scaling, "ranks": cmd_ranks}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"dfrank: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except OSError as exc:
        print(f"dfrank: I/O error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"dfrank: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
