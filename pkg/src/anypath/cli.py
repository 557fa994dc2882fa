"""Command-line entry point: ``anypath {solve,validate,simulate,eval,gen}``.

Exit codes: 0 success, 1 solver/oracle mismatch, 2 usage or input error.
Set ``ANYPATH_LOG=DEBUG`` (or INFO, WARNING, ...) for log output on stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time

from . import algorithms
from .graph import DEFAULT_PACKET_BITS, GraphError, format_graph, generate_random_graph, parse_rate, read_graph
from .metrics import Metric
from .evaluation import write_evaluation
from .oracle import OracleDegreeError, brute_force_optimal, simulate_delivery

log = logging.getLogger("anypath")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
VALIDATE_TOL = 1e-9


class UsageError(Exception):
    pass


def _rate_list(text: str) -> list[int]:
    try:
        return [parse_rate(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rate_mode(text: str):
    if text == "multi":
        return None
    kind, _, value = text.partition(":")
    if kind != "single" or not value:
        raise argparse.ArgumentTypeError("rate mode must be 'multi' or 'single:<bps>'")
    try:
        return parse_rate(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser, graph_source: bool = True):
    if graph_source:
        src = p.add_argument_group("graph source (exactly one)")
        src.add_argument("--graph", metavar="PATH", help="graph file")
        src.add_argument("--gen-nodes", type=int, metavar="N", help="generate an N-node random graph")
        src.add_argument("--gen-rates", type=_rate_list, default=[1_000_000, 2_000_000, 5_500_000, 11_000_000],
                         metavar="R1,R2,...", help="rates for the generated graph (bits/s)")
        src.add_argument("--gen-density", type=float, default=0.3, help="link probability per rate")
        src.add_argument("--gen-law", default="rate-decaying", help="delivery-ratio law")
    p.add_argument("--metric", choices=["eatx", "eatt"], default="eatx")
    p.add_argument("--packet-bytes", type=int, default=DEFAULT_PACKET_BITS // 8)
    p.add_argument("--rate-mode", type=_rate_mode, default=None, metavar="multi|single:<bps>")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".", metavar="DIR")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--force", action="store_true", help="overwrite existing output files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anypath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute a routing table toward one destination")
    _common(p)
    p.add_argument("--dest", type=int, required=True)
    p.add_argument("--algorithm", choices=["dijkstra", "bellman-ford"], default="dijkstra")

    p = sub.add_parser("validate", help="compare all four solvers with the brute-force oracle")
    _common(p)
    p.add_argument("--dest", type=int, help="destination (default: every node)")

    p = sub.add_parser("simulate", help="Monte Carlo forwarding along the optimal table")
    _common(p)
    p.add_argument("--dest", type=int, required=True)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--cap", type=int, default=1000, help="max broadcasts per hop")

    p = sub.add_parser("eval", help="all-pairs gains, rate histogram and connectivity CSVs")
    _common(p)
    p.add_argument("--fixed-rate", type=_rate_list, metavar="R1,R2,...",
                   help="single rates to compare against (default: every rate)")

    p = sub.add_parser("gen", help="write a synthetic graph file")
    _common(p, graph_source=False)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--rates", type=_rate_list, required=True, metavar="R1,R2,...")
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--law", default="rate-decaying")
    p.add_argument("--name", default="graph.apg", help="output file name inside --out")
    return parser


def _metric(args) -> Metric:
    if args.packet_bytes <= 0:
        raise UsageError("--packet-bytes must be positive")
    return Metric(args.metric, args.packet_bytes * 8)


def _load_graph(args):
    if (args.graph is None) == (args.gen_nodes is None):
        raise UsageError("give exactly one of --graph or --gen-nodes")
    bits = args.packet_bytes * 8
    if args.graph is not None:
        return read_graph(args.graph, bits)
    if args.seed is None:
        raise UsageError("--seed is required when generating a graph")
    return generate_random_graph(args.gen_nodes, args.gen_rates, args.gen_density,
                                 args.gen_law, args.seed, packet_size_bits=bits)


def _output_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    if os.path.exists(path) and not args.force:
        raise UsageError(f"{path} exists; pass --force to overwrite")
    return path


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _check_node(g, node, what):
    if not 0 <= node < g.node_count:
        raise UsageError(f"{what} {node} out of range 0..{g.node_count - 1}")


def cmd_solve(args) -> int:
    g = _load_graph(args)
    _check_node(g, args.dest, "destination")
    if args.rate_mode is not None and args.rate_mode not in g.rates:
        raise UsageError(f"rate {args.rate_mode} not in graph rate set {list(g.rates)}")
    table = algorithms.solve(g, args.dest, _metric(args), args.rate_mode, args.algorithm)
    path = _output_path(args, f"table_{args.dest}.csv")
    _write(path, table.to_csv())
    print(table.summary())
    print(f"wrote {path}")
    return EXIT_OK


def _compare(name, table, ref, tol=VALIDATE_TOL):
    """First node where ``table`` and ``ref`` disagree, or None."""
    for i in range(ref.node_count):
        a, b = table.cost[i], ref.cost[i]
        if math.isinf(a) or math.isinf(b):
            if a != b:
                return i, a, b
        elif abs(a - b) > tol:
            return i, a, b
    return None


def cmd_validate(args) -> int:
    g = _load_graph(args)
    m = _metric(args)
    dests = range(g.node_count) if args.dest is None else [args.dest]
    if args.dest is not None:
        _check_node(g, args.dest, "destination")
    worst = 0.0
    checks = 0
    started = time.perf_counter()
    for d in dests:
        try:
            oracles = {r: brute_force_optimal(g, d, m, rate=r) for r in g.rates}
            oracles[None] = brute_force_optimal(g, d, m)
        except OracleDegreeError as exc:
            raise UsageError(f"{exc}; the oracle enumerates every neighbor subset, "
                             "so validate graphs with smaller out-degree") from None
        runs = []
        for r in g.rates:
            runs.append(("SAF", r, algorithms.shortest_anypath_first(g, d, r, m)))
            runs.append(("ABF", r, algorithms.anypath_bellman_ford(g, d, r, m)))
        runs.append(("SMAF", None, algorithms.shortest_multirate_anypath_first(g, d, m)))
        runs.append(("MABF", None, algorithms.multirate_anypath_bellman_ford(g, d, m)))
        for name, r, table in runs:
            ref = oracles[r]
            checks += 1
            bad = _compare(name, table, ref)
            if bad is not None:
                i, a, b = bad
                label = name if r is None else f"{name}@{r}"
                print(f"MISMATCH dest={d} node={i} solver={label} solver_cost={a!r} oracle_cost={b!r}")
                return EXIT_MISMATCH
            finite = [abs(a - b) for a, b in zip(table.cost, ref.cost) if math.isfinite(b)]
            worst = max([worst] + finite)
    print(f"OK {checks} solver runs over {len(dests)} destination(s); "
          f"max |solver - oracle| = {worst:.3e} ({time.perf_counter() - started:.2f} s)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for simulate")
    g = _load_graph(args)
    _check_node(g, args.dest, "destination")
    _check_node(g, args.source, "source")
    if args.trials < 1 or args.cap < 1:
        raise UsageError("--trials and --cap must be positive")
    m = _metric(args)
    table = algorithms.solve(g, args.dest, m, args.rate_mode)
    report = simulate_delivery(g, table, args.source, args.trials, args.cap, args.seed)
    path = _output_path(args, f"sim_{args.source}_{args.dest}.csv")
    _write(path, report.to_csv(ms=m.is_time))
    scale, unit = (1000.0, " ms") if m.is_time else (1.0, "")
    print(f"analytic cost  {table.cost[args.source] * scale:.6g}{unit}")
    print(f"simulated mean {report.mean_cost * scale:.6g}{unit} +- {report.std_error * scale:.3g} "
          f"({report.trials} trials, {report.delivery_failures} failures, "
          f"{report.mean_hops:.3f} hops)")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    g = _load_graph(args)
    m = _metric(args)
    fixed = args.fixed_rate or list(g.rates)
    for r in fixed:
        if r not in g.rates:
            raise UsageError(f"fixed rate {r} not in graph rate set {list(g.rates)}")
    try:
        files = write_evaluation(g, args.out, m, fixed, args.jobs, args.force)
    except FileExistsError as exc:
        raise UsageError(f"{exc} exists; pass --force to overwrite") from None
    for r in fixed:
        with open(files[f"gains_{r}.csv"], encoding="utf-8") as fh:
            inf_count = sum(1 for line in fh if line.rstrip().endswith(",inf"))
        print(f"fixed rate {r}: {inf_count} pair(s) reachable only with multirate routing")
    for name in sorted(files):
        print(f"wrote {files[name]}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for gen")
    g = generate_random_graph(args.nodes, args.rates, args.density, args.law, args.seed,
                              packet_size_bits=args.packet_bytes * 8)
    path = _output_path(args, args.name)
    _write(path, format_graph(g))
    print(f"wrote {path}: {g}")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "eval": cmd_eval,
    "gen": cmd_gen,
}


def main(argv=None) -> int:
    level = os.environ.get("ANYPATH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    log.debug("command %s with %s", args.command, vars(args))
    try:
        return COMMANDS[args.command](args)
    except (UsageError, GraphError, ValueError, OSError) as exc:
        print(f"anypath {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
