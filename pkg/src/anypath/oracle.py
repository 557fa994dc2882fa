"""Independent ground truth for the solvers.

:func:`brute_force_optimal` runs synchronous value iteration in which every
node tries every non-empty subset of its neighbors at every rate.  It never
assumes that the best set is a cost-sorted prefix.

:func:`simulate_delivery` forwards packets hop by hop under the relay-priority
rule and measures the realised cost, for comparison with the analytic one.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .algorithms import RoutingTable
from .graph import Graph, JointReceptionModel
from .metrics import EATX, Metric, anypath_cost, priority_order, transmission_cost

__all__ = [
    "IndependenceReport",
    "MAX_ORACLE_DEGREE",
    "OracleDegreeError",
    "SimulationReport",
    "brute_force_optimal",
    "independence_report",
    "sample_reception",
    "simulate_delivery",
]

MAX_ORACLE_DEGREE = 15
DEFAULT_CAP = 1000
BLOCK_TRIALS = 8192


class OracleDegreeError(ValueError):
    """A node has too many neighbors for exhaustive subset enumeration."""


def brute_force_optimal(g: Graph, d: int, m: Metric = EATX, rate: int | None = None,
                        rel_tol: float = 1e-12) -> RoutingTable:
    """Exhaustive optimum toward ``d``.

    ``rate=None`` lets every node pick any rate; otherwise all nodes use
    ``rate``.  Runs exactly ``|V| - 1`` synchronous rounds.  Among subsets
    whose cost is within ``rel_tol`` of the best, the one with fewest members
    wins (then the lexicographically smallest in priority order); among rates,
    the slowest one within ``rel_tol`` wins.
    """
    if not 0 <= d < g.node_count:
        raise ValueError(f"destination {d} out of range")
    rates = g.rates if rate is None else (rate,)
    if rate is not None and rate not in g.rates:
        raise ValueError(f"rate {rate} not in graph rate set")
    for r in rates:
        deg = g.max_out_degree(r)
        if deg > MAX_ORACLE_DEGREE:
            raise OracleDegreeError(
                f"out-degree {deg} at rate {r} exceeds the oracle bound of {MAX_ORACLE_DEGREE}")

    n = g.node_count
    D = [math.inf] * n
    D[d] = 0.0
    F: list[tuple[int, ...]] = [()] * n
    T: list[int | None] = [None] * n
    Dr = {r: [math.inf] * n for r in rates}
    Fr = {r: [()] * n for r in rates}
    for r in rates:
        Dr[r][d] = 0.0

    for _ in range(n - 1):
        prev = D
        D, F, T = list(prev), list(F), list(T)
        for i in range(n):
            if i == d:
                continue
            per_rate = []
            for r in rates:
                cost, members = _best_subset(g, i, r, prev, m, rel_tol)
                Dr[r][i], Fr[r][i] = cost, members
                per_rate.append((cost, r, members))
            best = min(c for c, _, _ in per_rate)
            if math.isinf(best):
                D[i], F[i], T[i] = math.inf, (), None
                continue
            for c, r, members in per_rate:
                if c <= best * (1.0 + rel_tol):
                    D[i], F[i], T[i] = c, members, r
                    break

    return RoutingTable(
        destination=d,
        metric=m,
        cost=np.array(D),
        forwarding_set=F,
        rate=T,
        rate_cost={r: np.array(Dr[r]) for r in rates},
        rate_forwarding_set={r: list(Fr[r]) for r in rates},
        rounds=n - 1,
        algorithm="oracle",
    )


def _best_subset(g, i, r, costs, m, rel_tol):
    nbrs = list(g.out_links(i, r))
    candidates = []
    for k in range(1, len(nbrs) + 1):
        for J in combinations(nbrs, k):
            c = anypath_cost(i, J, r, costs, g, m)
            if math.isfinite(c):
                candidates.append((c, J))
    if not candidates:
        return math.inf, ()
    best = min(c for c, _ in candidates)
    tied = [(len(J), [(costs[j], j) for j in priority_order(J, costs)], c, J)
            for c, J in candidates if c <= best * (1.0 + rel_tol)]
    _, _, c, J = min(tied)
    return c, tuple(priority_order(J, costs))


# -- sampling ---------------------------------------------------------------


def _sample_matrix(g: Graph, i: int, members: Sequence[int], r: int,
                   rng: np.random.Generator, size: int) -> np.ndarray:
    """Boolean ``(size, len(members))`` reception outcomes."""
    out = g.out_links(i, r)
    model = g.joint_model(i, r)
    got = np.empty((size, len(members)), dtype=bool)
    masks = None
    if model is not None and any(model.bit(j) is not None for j in members):
        masks = rng.choice(model.pmf.size, size=size, p=model.pmf)
    for k, j in enumerate(members):
        bit = None if model is None else model.bit(j)
        if bit is not None:
            got[:, k] = (masks & bit) != 0
        else:
            got[:, k] = rng.random(size) < out[j]
    return got


def sample_reception(i: int, J: Sequence[int], r: int, g: Graph,
                     rng: np.random.Generator) -> frozenset[int]:
    """Draw the set of members of ``J`` that receive one frame from ``i`` at ``r``."""
    for j in J:
        if j not in g.out_links(i, r):
            raise ValueError(f"node {j} is not a neighbor of {i} at rate {r}")
    row = _sample_matrix(g, i, list(J), r, rng, 1)[0]
    return frozenset(j for j, hit in zip(J, row) if hit)


# -- Monte Carlo forwarding -------------------------------------------------


@dataclass(frozen=True)
class SimulationReport:
    source: int
    destination: int
    trials: int
    mean_cost: float
    std_error: float
    delivery_failures: int
    mean_hops: float
    seed: int

    CSV_HEADER = "source,dest,trials,mean,stderr,failures,mean_hops,seed"

    def csv_row(self, ms: bool = False) -> str:
        scale = 1000.0 if ms else 1.0
        return (f"{self.source},{self.destination},{self.trials},{self.mean_cost * scale!r},"
                f"{self.std_error * scale!r},{self.delivery_failures},{self.mean_hops!r},{self.seed}")

    def to_csv(self, ms: bool = False) -> str:
        return self.CSV_HEADER + "\n" + self.csv_row(ms) + "\n"


def simulate_delivery(g: Graph, table: RoutingTable, source: int, trials: int = 100_000,
                      cap: int = DEFAULT_CAP, seed: int = 0) -> SimulationReport:
    """Forward ``trials`` packets from ``source`` along ``table``.

    At each hop the current node broadcasts at its table rate until some
    member of its forwarding set receives; the lowest-cost receiver relays.
    A hop needing more than ``cap`` broadcasts counts as a delivery failure
    and the trial is excluded from the cost statistics.

    Trials run in blocks of ``BLOCK_TRIALS``; block ``b`` draws from
    ``default_rng([seed, b])`` so results do not depend on scheduling.
    """
    if cap < 1:
        raise ValueError("retransmission cap must be at least 1")
    if trials < 1:
        raise ValueError("need at least one trial")
    n = g.node_count
    if not 0 <= source < n:
        raise ValueError(f"source {source} out of range")
    dest = table.destination
    unit = np.array([transmission_cost(table.rate[i], g, table.metric) if table.rate[i] else 0.0
                     for i in range(n)])
    fsets = [np.asarray(table.forwarding_set[i], dtype=np.int64) for i in range(n)]

    costs, hops = [], []
    failures = 0
    for b, start in enumerate(range(0, trials, BLOCK_TRIALS)):
        size = min(BLOCK_TRIALS, trials - start)
        rng = np.random.default_rng([seed, b])
        c, h, fail = _simulate_block(g, table, source, dest, size, cap, rng, unit, fsets)
        costs.append(c[~fail])
        hops.append(h[~fail])
        failures += int(fail.sum())

    costs = np.concatenate(costs)
    hops = np.concatenate(hops)
    ok = costs.size
    if ok == 0:
        mean = stderr = mean_hops = math.nan
    else:
        mean = float(costs.mean())
        mean_hops = float(hops.mean())
        stderr = float(costs.std(ddof=1) / math.sqrt(ok)) if ok > 1 else 0.0
    return SimulationReport(source, dest, trials, mean, stderr, failures, mean_hops, seed)


def _simulate_block(g, table, source, dest, size, cap, rng, unit, fsets):
    at = np.full(size, source, dtype=np.int64)
    cost = np.zeros(size)
    hops = np.zeros(size, dtype=np.int64)
    tries = np.zeros(size, dtype=np.int64)
    failed = np.zeros(size, dtype=bool)
    active = np.flatnonzero(at != dest)
    while active.size:
        for i in np.unique(at[active]):
            idx = active[at[active] == i]
            members = fsets[i]
            if members.size == 0:
                failed[idx] = True
                continue
            got = _sample_matrix(g, int(i), members.tolist(), table.rate[i], rng, idx.size)
            any_got = got.any(axis=1)
            cost[idx] += unit[i]
            tries[idx] += 1
            moved = idx[any_got]
            at[moved] = members[np.argmax(got[any_got], axis=1)]
            hops[moved] += 1
            tries[moved] = 0
            stuck = idx[~any_got]
            failed[stuck[tries[stuck] >= cap]] = True
        active = active[(at[active] != dest) & ~failed[active]]
    return cost, hops, failed


# -- correlation diagnostics ------------------------------------------------


@dataclass(frozen=True)
class IndependenceReport:
    """Observed joint pmf next to the product of its per-receiver marginals."""

    neighbors: tuple[int, ...]
    observed: np.ndarray
    independent: np.ndarray
    marginals: np.ndarray

    @property
    def total_variation(self) -> float:
        return 0.5 * float(np.abs(self.observed - self.independent).sum())

    @property
    def max_abs_difference(self) -> float:
        return float(np.abs(self.observed - self.independent).max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("receiver_set,observed,independent\n")
        for mask, (o, p) in enumerate(zip(self.observed, self.independent)):
            buf.write(f"{mask},{o!r},{p!r}\n")
        return buf.getvalue()


def independence_report(joint: JointReceptionModel) -> IndependenceReport:
    marg = joint.marginals()
    masks = np.arange(joint.pmf.size)
    product = np.ones(masks.size)
    for k, p in enumerate(marg):
        product *= np.where((masks >> k) & 1, p, 1.0 - p)
    return IndependenceReport(joint.neighbors, np.array(joint.pmf), product, marg)
