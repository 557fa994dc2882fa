"""Network-wide analysis: all-pairs costs, multirate gains, rate usage, connectivity.

All functions accept any :class:`~anypath.graph.Graph`; CSV writers produce
the file formats consumed by plotting scripts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .algorithms import RoutingTable, shortest_anypath_first, shortest_multirate_anypath_first
from .graph import Graph
from .metrics import EATX, Metric

__all__ = [
    "ConnectivityReport",
    "GainDistribution",
    "GainRecord",
    "all_pairs_costs",
    "all_pairs_tables",
    "connectivity_report",
    "gain_distribution",
    "rate_histogram",
    "write_evaluation",
]


def _solve_one(g: Graph, mode, m: Metric, d: int) -> RoutingTable:
    if mode == "multi":
        return shortest_multirate_anypath_first(g, d, m)
    return shortest_anypath_first(g, d, mode, m)


def all_pairs_tables(g: Graph, mode="multi", m: Metric = EATX, jobs: int = 1) -> list[RoutingTable]:
    """One routing table per destination.  ``mode`` is ``"multi"`` or a rate."""
    if mode != "multi" and mode not in g.rates:
        raise ValueError(f"rate {mode} not in graph rate set")
    work = partial(_solve_one, g, mode, m)
    dests = range(g.node_count)
    if jobs > 1 and g.node_count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(work, dests))
    return [work(d) for d in dests]


def all_pairs_costs(g: Graph, mode="multi", m: Metric = EATX, jobs: int = 1) -> np.ndarray:
    """``C[i, d]`` is node ``i``'s anypath cost toward ``d``."""
    tables = all_pairs_tables(g, mode, m, jobs)
    return np.column_stack([t.cost for t in tables])


@dataclass(frozen=True)
class GainRecord:
    source: int
    destination: int
    fixed_rate: int
    gain: float


@dataclass
class GainDistribution:
    """Gains of multirate over single-rate routing at ``fixed_rate``.

    ``records`` holds finite gains sorted descending; ``infinite`` holds pairs
    reachable only with multirate routing; pairs unreachable either way are
    only counted.
    """

    fixed_rate: int
    records: list[GainRecord] = field(default_factory=list)
    infinite: list[GainRecord] = field(default_factory=list)
    unreachable_pairs: int = 0

    @property
    def infinite_count(self) -> int:
        return len(self.infinite)

    def gains(self) -> np.ndarray:
        return np.array([r.gain for r in self.records])

    def to_csv(self) -> str:
        rows = ["src,dst,gain"]
        rows += [f"{r.source},{r.destination},{r.gain!r}" for r in self.records]
        rows += [f"{r.source},{r.destination},inf" for r in self.infinite]
        return "\n".join(rows) + "\n"


def gain_distribution(g: Graph, fixed_rate: int, m: Metric = EATX, jobs: int = 1,
                      multi: np.ndarray | None = None,
                      single: np.ndarray | None = None) -> GainDistribution:
    """Per-pair ratio of single-rate cost at ``fixed_rate`` to multirate cost.

    Precomputed cost matrices may be passed to avoid re-solving.
    """
    if fixed_rate not in g.rates:
        raise ValueError(f"rate {fixed_rate} not in graph rate set")
    if multi is None:
        multi = all_pairs_costs(g, "multi", m, jobs)
    if single is None:
        single = all_pairs_costs(g, fixed_rate, m, jobs)
    out = GainDistribution(fixed_rate)
    n = g.node_count
    for d in range(n):
        for i in range(n):
            if i == d:
                continue
            cm, cs = multi[i, d], single[i, d]
            if math.isinf(cm):
                out.unreachable_pairs += 1
            elif math.isinf(cs):
                out.infinite.append(GainRecord(i, d, fixed_rate, math.inf))
            else:
                out.records.append(GainRecord(i, d, fixed_rate, float(cs / cm)))
    out.records.sort(key=lambda rec: (-rec.gain, rec.source, rec.destination))
    return out


def rate_histogram(g: Graph, m: Metric = EATX, jobs: int = 1,
                   tables: Sequence[RoutingTable] | None = None) -> dict[int, float]:
    """Fraction of (node, destination) pairs whose optimal multirate choice is each rate."""
    if tables is None:
        tables = all_pairs_tables(g, "multi", m, jobs)
    votes = {r: 0 for r in g.rates}
    for t in tables:
        for i in range(g.node_count):
            if i != t.destination and math.isfinite(t.cost[i]):
                votes[t.rate[i]] += 1
    total = sum(votes.values())
    if total == 0:
        return {r: 0.0 for r in g.rates}
    return {r: v / total for r, v in votes.items()}


@dataclass
class ConnectivityReport:
    """Per rate: fraction of ordered pairs with a finite single-rate anypath,
    and delivery ratios of that rate's links in rank order (largest first)."""

    fraction_connected: dict[int, float]
    rank_curves: dict[int, np.ndarray]


def connectivity_report(g: Graph, jobs: int = 1) -> ConnectivityReport:
    n = g.node_count
    pairs = n * (n - 1)
    frac, curves = {}, {}
    for r in g.rates:
        if pairs:
            costs = all_pairs_costs(g, r, EATX, jobs)
            finite = np.isfinite(costs).sum() - n
            frac[r] = finite / pairs
        else:
            frac[r] = 1.0
        ratios = np.array([link.ratio for link in g.links(r)])
        curves[r] = np.sort(ratios)[::-1]
    return ConnectivityReport(frac, curves)


def _fmt_cost(c: float, scale: float) -> str:
    return "inf" if math.isinf(c) else repr(float(c * scale))


def write_evaluation(g: Graph, out_dir, m: Metric = EATX, fixed_rates: Sequence[int] | None = None,
                     jobs: int = 1, force: bool = False) -> dict[str, str]:
    """Run the whole pipeline and write its CSV files into ``out_dir``.

    Files: ``costs.csv``, ``gains_<rate>.csv``, ``rate_hist.csv``,
    ``connectivity.csv`` and ``rank_<rate>.csv``.  EATT costs are written in
    milliseconds.  Returns a mapping of file name to path.
    """
    fixed_rates = list(g.rates if fixed_rates is None else fixed_rates)
    os.makedirs(out_dir, exist_ok=True)
    files: dict[str, str] = {}

    def emit(name, text):
        path = os.path.join(out_dir, name)
        if os.path.exists(path) and not force:
            raise FileExistsError(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        files[name] = path

    scale = 1000.0 if m.is_time else 1.0
    tables = all_pairs_tables(g, "multi", m, jobs)
    multi = np.column_stack([t.cost for t in tables])
    n = g.node_count
    header = "node," + ",".join(f"to_{d}" for d in range(n))
    rows = [header] + [f"{i}," + ",".join(_fmt_cost(c, scale) for c in multi[i]) for i in range(n)]
    emit("costs.csv", "\n".join(rows) + "\n")

    for r in fixed_rates:
        gains = gain_distribution(g, r, m, jobs, multi=multi)
        emit(f"gains_{r}.csv", gains.to_csv())

    hist = rate_histogram(g, m, tables=tables)
    emit("rate_hist.csv", "rate,fraction\n" + "".join(f"{r},{f!r}\n" for r, f in hist.items()))

    conn = connectivity_report(g, jobs)
    emit("connectivity.csv", "rate,fraction_connected\n"
         + "".join(f"{r},{f!r}\n" for r, f in conn.fraction_connected.items()))
    for r, curve in conn.rank_curves.items():
        emit(f"rank_{r}.csv", "rank,delivery_ratio\n"
             + "".join(f"{k},{p!r}\n" for k, p in enumerate(curve, start=1)))
    return files
