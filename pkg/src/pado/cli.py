"""Command-line interface.

::

    pado generate grid 10 10 --seed 1 --out g.txt
    pado build g.txt --epsilon 0.5 --out g.pado
    pado query g.pado --random 5 --seed 2
    pado verify g.pado g.txt --random 1000
    pado bench --kind delaunay --sizes 100 1000 --epsilon 0.1 0.5 1.0
    pado stats g.pado

Reports are JSON lines on stdout, benches are CSV.  Exit codes: 1 for bad
input files or unknown nodes, 2 for usage errors, 3 when verification
finds a stretch violation.  ``PADO_LOG`` (off, info, debug) sets the log
level on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import dijkstra as cs_dijkstra

from pado.connections import AuditLog, graph_csr
from pado.decomposition import build_decomposition, depth_constant
from pado.errors import InvalidGraph, InvalidParams, OracleFileError, ParseError, PadoError, UnknownNode
from pado.graph import generate, read_graph, serialize_graph, validate
from pado.oracle import OracleParams, preprocess
from pado.rdivision import compute_rdivision
from pado.storage import load, save, to_bytes

log = logging.getLogger("pado")

BENCH_COLUMNS = ["n", "epsilon", "c_ell", "build_s", "query_us_mean", "bytes", "connections", "max_stretch"]
STRETCH_RTOL = 1e-9


class UsageError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("PADO_LOG", "off").lower()
    levels = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise UsageError(f"PADO_LOG must be one of off, info, debug (got {level!r})")
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(levels[level])


def _positive(kind):
    def parse(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if not (isinstance(x, int) or math.isfinite(x)) or x <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return x

    return parse


def _nonnegative_int(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return x


def _emit(record, out=None):
    print(json.dumps(record, sort_keys=False), file=out or sys.stdout)


def _read_pairs(path, n):
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError("expected 's t'", lineno)
        try:
            s, t = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError("node ids must be integers", lineno)
        pairs.append((s, t))
    for s, t in pairs:
        for v in (s, t):
            if not 0 <= v < n:
                raise UnknownNode(f"node {v} not in graph with {n} nodes")
    return pairs


def random_pairs(n: int, k: int, seed: int) -> list[tuple[int, int]]:
    """``k`` uniform node pairs, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    return [tuple(p) for p in rng.integers(0, n, size=(k, 2)).tolist()]


def _pairs(args, n):
    if args.pairs is not None and args.random is not None:
        raise UsageError("give either --pairs or --random, not both")
    if args.pairs is not None:
        return _read_pairs(args.pairs, n)
    if args.random is not None:
        return random_pairs(n, args.random, args.seed)
    raise UsageError("one of --pairs or --random is required")


def _timed_queries(oracle, pairs, threads):
    """Estimates and per-query seconds, in input order."""

    def one(p):
        t0 = time.perf_counter()
        est = oracle.estimate(p[0], p[1])
        return est, time.perf_counter() - t0

    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, pairs))
    else:
        out = [one(p) for p in pairs]
    return [e for e, _ in out], [s for _, s in out]


def exact_distances(graph, pairs) -> list[float]:
    """Exact distances for ``pairs``, one Dijkstra per distinct source."""
    if not pairs:
        return []
    csr = graph_csr(graph)
    sources = sorted({s for s, _ in pairs})
    row = {s: i for i, s in enumerate(sources)}
    table = cs_dijkstra(csr, directed=False, indices=sources)
    return [float(table[row[s], t]) for s, t in pairs]


def stretch_summary(estimates, exact, epsilon) -> dict:
    """Stretch statistics; a pair violates if its estimate leaves
    ``[exact, (1 + epsilon) exact]`` by more than the relative tolerance."""
    ratios, violations = [], 0
    for est, d in zip(estimates, exact):
        tol = STRETCH_RTOL * max(abs(d), 1.0)
        if est < d - tol or est > (1.0 + epsilon) * d + tol:
            violations += 1
        ratios.append(1.0 if d == 0 and est <= tol else (est / d if d > 0 else math.inf))
    if not ratios:
        return {"pairs": 0, "min_stretch": None, "mean_stretch": None, "max_stretch": None, "violations": 0}
    return {
        "pairs": len(ratios),
        "min_stretch": min(ratios),
        "mean_stretch": float(np.mean(ratios)),
        "max_stretch": max(ratios),
        "violations": violations,
    }


def _build(graph, epsilon, c_ell, tree=None, audit=None):
    """Preprocess and collect the run-report fields."""
    params = OracleParams.for_graph(epsilon, c_ell, graph.n)
    t0 = time.perf_counter()
    if tree is None:
        tree = build_decomposition(graph)
    div = compute_rdivision(graph, params.r)
    oracle = preprocess(graph, epsilon, c_ell, audit=audit, decomposition=tree, rdivision=div)
    build_s = time.perf_counter() - t0
    conn = oracle.connection_count
    consts = div.constants(graph.n)
    report = {
        "n": graph.n,
        "m": graph.edge_count,
        "epsilon": params.epsilon,
        "c_ell": params.c_ell,
        "ell": params.ell,
        "r": params.r,
        "build_s": build_s,
        "connections": conn,
        "regions": div.region_count,
        "boundary_nodes": len(div.boundary),
        "c_r": consts["c_r"],
        "c_b": consts["c_b"],
        "c_B": consts["c_B"],
        "c_space": conn / max(graph.n, 1),
        "c_d": depth_constant(tree, graph.n),
        "depth": tree.depth,
    }
    return oracle, tree, report


def cmd_generate(args):
    graph = generate(args.kind, args.sizes, seed=args.seed, lengths=args.lengths)
    text = serialize_graph(graph)
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        _emit({"command": "generate", "kind": args.kind, "n": graph.n, "m": graph.edge_count, "out": args.out})
    return 0


def cmd_build(args):
    graph = read_graph(args.graph)
    validate(graph)
    audit = AuditLog() if args.audit else None
    oracle, _, report = _build(graph, args.epsilon, args.c_ell, audit=audit)
    size = save(oracle, args.out)
    report = {"command": "build", **report, "bytes": size, "out": args.out}
    if audit is not None:
        report.update(
            phase_bound=audit.phase_bound,
            max_phase_count=audit.max_phase_count,
            audit_ok=audit.ok,
        )
    log.info("built oracle with %d connections in %.2fs", report["connections"], report["build_s"])
    _emit(report)
    return 0


def cmd_query(args):
    oracle = load(args.oracle)
    pairs = _pairs(args, oracle.n)
    estimates, _ = _timed_queries(oracle, pairs, args.threads)
    out = sys.stdout
    for (s, t), est in zip(pairs, estimates):
        out.write(f"{s} {t} {est!r}\n")
    return 0


def cmd_verify(args):
    oracle = load(args.oracle)
    graph = read_graph(args.graph)
    if graph.n != oracle.n:
        raise InvalidGraph(f"graph has {graph.n} nodes, oracle was built for {oracle.n}")
    if args.pairs is None and args.random is None:
        args.random = 1000
    pairs = _pairs(args, oracle.n)
    estimates, secs = _timed_queries(oracle, pairs, args.threads)
    exact = exact_distances(graph, pairs)
    summary = stretch_summary(estimates, exact, oracle.params.epsilon)
    report = {"command": "verify", "epsilon": oracle.params.epsilon, **summary}
    if secs:
        us = np.asarray(secs) * 1e6
        report.update(
            query_us_mean=float(us.mean()),
            query_us_median=float(np.median(us)),
            query_us_p99=float(np.percentile(us, 99)),
        )
    _emit(report)
    return 3 if summary["violations"] else 0


def _bench_graph(kind, n, seed, lengths):
    if kind == "grid":
        side = max(1, round(math.sqrt(n)))
        return generate("grid", [side, side], seed=seed, lengths=lengths)
    return generate(kind, [n], seed=seed, lengths=lengths)


def cmd_bench(args):
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        for n in args.sizes:
            graph = _bench_graph(args.kind, n, args.seed, args.lengths)
            pairs = random_pairs(graph.n, args.random, args.seed)
            exact = exact_distances(graph, pairs)
            tree = None
            for c_ell in args.c_ell:
                for eps in args.epsilon:
                    oracle, tree, report = _build(graph, eps, c_ell, tree=tree)
                    estimates, secs = _timed_queries(oracle, pairs, args.threads)
                    summary = stretch_summary(estimates, exact, eps)
                    writer.writerow(
                        [
                            graph.n,
                            eps,
                            c_ell,
                            f"{report['build_s']:.6f}",
                            f"{np.mean(secs) * 1e6:.3f}" if secs else "",
                            len(to_bytes(oracle)),
                            report["connections"],
                            "" if summary["max_stretch"] is None else f"{summary['max_stretch']:.12g}",
                        ]
                    )
                    out.flush()
                    log.info("bench n=%d eps=%g c_ell=%g done", graph.n, eps, c_ell)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _histogram(name, values, bins=10):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {"histogram": name, "count": 0}
    counts, edges = np.histogram(values, bins=bins)
    return {
        "histogram": name,
        "count": int(values.size),
        "min": float(values.min()),
        "mean": float(values.mean()),
        "max": float(values.max()),
        "edges": [float(e) for e in edges],
        "counts": [int(c) for c in counts],
    }


def cmd_stats(args):
    oracle = load(args.oracle)
    tree = oracle.decomposition
    p = oracle.params
    _emit(
        {
            "command": "stats",
            "n": oracle.n,
            "epsilon": p.epsilon,
            "c_ell": p.c_ell,
            "ell": p.ell,
            "r": p.r,
            "regions": len(oracle.region_edges),
            "boundary_nodes": len(oracle.store),
            "connections": oracle.connection_count,
            "decomposition_nodes": len(tree.nodes),
            "depth": tree.depth,
        }
    )
    sep_nodes = [x for x in tree.nodes if x.separator is not None]
    _emit(_histogram("decomposition_node_depth", [x.depth for x in tree.nodes], bins=max(tree.depth + 1, 1)))
    _emit(_histogram("separator_path_nodes", [len(pth.nodes) for x in sep_nodes for pth in x.separator.paths]))
    _emit(_histogram("region_edges", [len(u) for u, _, _ in oracle.region_edges]))
    _emit(_histogram("region_boundary_nodes", [len(b) for b in oracle.region_boundary]))
    _emit(_histogram("keys_per_boundary_node", [len(e) for e in oracle.store.values()]))
    _emit(_histogram("connections_per_boundary_node", [sum(len(c) for c in e.values()) for e in oracle.store.values()]))
    _emit(_histogram("connections_per_key", [len(c) for e in oracle.store.values() for c in e.values()]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pado", description="Approximate distance oracle for planar graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def pair_flags(p, default_random=None):
        p.add_argument("--pairs", help="file with one 's t' pair per line")
        p.add_argument("--random", type=_nonnegative_int, default=default_random, help="number of random pairs")
        p.add_argument("--seed", type=_nonnegative_int, default=0)
        p.add_argument("--threads", type=_positive(int), default=1)

    p = sub.add_parser("generate", help="write a generated graph")
    p.add_argument("kind", choices=["grid", "delaunay", "random-triangulation"])
    p.add_argument("sizes", nargs="+", type=_positive(int), help="rows [cols] for grids, else n")
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--lengths", choices=["default", "unit", "uniform"], default="default")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="preprocess a graph file into an oracle file")
    p.add_argument("graph")
    p.add_argument("--epsilon", type=_positive(float), default=0.5)
    p.add_argument("--c-ell", dest="c_ell", type=_positive(float), default=1.0)
    p.add_argument("--out", required=True)
    p.add_argument("--audit", action="store_true", help="audit connection budgets and potentials")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="print 's t estimate' for each pair")
    p.add_argument("oracle")
    pair_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("verify", help="compare estimates with exact distances")
    p.add_argument("oracle")
    p.add_argument("graph")
    pair_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="CSV sweep over sizes and parameters")
    p.add_argument("--kind", choices=["grid", "delaunay", "random-triangulation"], default="delaunay")
    p.add_argument("--sizes", nargs="+", type=_positive(int), default=[100, 1000])
    p.add_argument("--epsilon", nargs="+", type=_positive(float), default=[0.5])
    p.add_argument("--c-ell", dest="c_ell", nargs="+", type=_positive(float), default=[1.0])
    p.add_argument("--lengths", choices=["default", "unit", "uniform"], default="default")
    p.add_argument("--random", type=_nonnegative_int, default=200)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--threads", type=_positive(int), default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="histograms of an oracle's structure")
    p.add_argument("oracle")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _setup_logging()
        return args.func(args)
    except (UsageError, InvalidParams) as exc:
        parser.print_usage(sys.stderr)
        print(f"pado: error: {exc}", file=sys.stderr)
        return 2
    except (InvalidGraph, ParseError, OracleFileError, UnknownNode, PadoError, OSError) as exc:
        print(f"pado: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
