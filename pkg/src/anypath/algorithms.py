"""Shortest (multirate) anypath solvers.

Two engines cover the four algorithms:

* the Dijkstra-style engine settles nodes in ascending cost order and grows
  each node's per-rate forwarding set one settled neighbor at a time, updating
  its cost in constant time (:func:`shortest_anypath_first`,
  :func:`shortest_multirate_anypath_first`);
* the Bellman-Ford-style engine rebuilds every node's forwarding sets each
  round from the previous round's costs (:func:`anypath_bellman_ford`,
  :func:`multirate_anypath_bellman_ford`).

The single-rate solvers are the multirate ones restricted to one rate.
"""

from __future__ import annotations

import heapq
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import Graph
from .metrics import EATX, Metric, anypath_cost, incremental_update

__all__ = [
    "RoutingTable",
    "anypath_bellman_ford",
    "multirate_anypath_bellman_ford",
    "shortest_anypath_first",
    "shortest_multirate_anypath_first",
    "solve",
]

# trace(node, rate, member, old_cost, new_cost) is called each time a member is
# admitted to a per-rate forwarding set.
AdmitHook = Callable[[int, int, int, float, float], None]


@dataclass
class RoutingTable:
    """Routing state toward one destination.

    ``cost[i]``, ``forwarding_set[i]`` and ``rate[i]`` describe node ``i``'s
    selected anypath.  ``rate_cost[r][i]`` and ``rate_forwarding_set[r][i]``
    hold the best estimate when ``i`` is pinned to rate ``r``.
    """

    destination: int
    metric: Metric
    cost: np.ndarray
    forwarding_set: list[tuple[int, ...]]
    rate: list[int | None]
    rate_cost: dict[int, np.ndarray] = field(default_factory=dict)
    rate_forwarding_set: dict[int, list[tuple[int, ...]]] = field(default_factory=dict)
    settle_order: list[int] | None = None
    rounds: int | None = None
    algorithm: str = ""

    @property
    def node_count(self) -> int:
        return len(self.cost)

    def reachable(self, i: int) -> bool:
        return math.isfinite(self.cost[i])

    def to_csv(self) -> str:
        """``node,cost,rate,forwarding_set`` rows; EATT costs are written in ms."""
        scale = 1000.0 if self.metric.is_time else 1.0
        buf = io.StringIO()
        buf.write("node,cost,rate,forwarding_set\n")
        for i in range(self.node_count):
            c = self.cost[i]
            cost = "inf" if math.isinf(c) else repr(float(c * scale))
            rate = "" if self.rate[i] is None else str(self.rate[i])
            fs = ";".join(str(j) for j in self.forwarding_set[i])
            buf.write(f"{i},{cost},{rate},{fs}\n")
        return buf.getvalue()

    def summary(self) -> str:
        unit = " ms" if self.metric.is_time else ""
        scale = 1000.0 if self.metric.is_time else 1.0
        lines = [f"{self.algorithm} toward node {self.destination} ({self.metric})"]
        for i in range(self.node_count):
            c = self.cost[i]
            cost = "unreachable" if math.isinf(c) else f"{c * scale:.4f}{unit}"
            rate = "-" if self.rate[i] is None else f"{self.rate[i] / 1e6:g} Mb/s"
            fs = "{" + ", ".join(map(str, self.forwarding_set[i])) + "}"
            lines.append(f"  node {i:>4}: {cost:>16}  rate {rate:>10}  via {fs}")
        return "\n".join(lines)


def _check(g: Graph, d: int, rates: Sequence[int]):
    if not 0 <= d < g.node_count:
        raise ValueError(f"destination {d} out of range 0..{g.node_count - 1}")
    for r in rates:
        if r not in g.rates:
            raise ValueError(f"rate {r} not in graph rate set {list(g.rates)}")


def _extend_loss(g: Graph, i: int, r: int, members: list[int], q_old: float, p_ij: float) -> float:
    """P[all members lose] after ``members[-1]`` was appended."""
    if g.joint_model(i, r) is None:
        return q_old * (1.0 - p_ij)
    return g.all_lose_probability(i, members, r)


def _settling_engine(g: Graph, d: int, rates: Sequence[int], m: Metric, name: str,
                     trace: AdmitHook | None) -> RoutingTable:
    n = g.node_count
    inf = math.inf

    D = [inf] * n
    T: list[int | None] = [None] * n
    flen = [0] * n
    D[d] = 0.0
    Dr = {r: [inf] * n for r in rates}
    Fr: dict[int, list[list[int]]] = {r: [[] for _ in range(n)] for r in rates}
    Qr = {r: [1.0] * n for r in rates}  # P[current per-rate set all lose]
    for r in rates:
        Dr[r][d] = 0.0

    settled = [False] * n
    order: list[int] = []
    heap = [(0.0, d)]
    while heap:
        c, j = heapq.heappop(heap)
        if settled[j] or c > D[j]:
            continue
        settled[j] = True
        order.append(j)
        Dj = D[j]
        for r in rates:
            dr, fr, qr = Dr[r], Fr[r], Qr[r]
            for i, p_ij in g.in_links(j, r).items():
                if i == d or not dr[i] > Dj:
                    continue
                members = fr[i]
                members.append(j)
                q_new = _extend_loss(g, i, r, members, qr[i], p_ij)
                p_new = 1.0 - q_new
                old = dr[i]
                if qr[i] < 1.0:
                    new = incremental_update(old, 1.0 - qr[i], p_new, Dj)
                else:
                    new = anypath_cost(i, members, r, D, g, m)
                dr[i] = new
                qr[i] = q_new
                if trace is not None:
                    trace(i, r, j, old, new)
                if not settled[i] and D[i] > new:
                    D[i] = new
                    T[i] = r
                    flen[i] = len(members)
                    heapq.heappush(heap, (new, i))

    unreached = [i for i in range(n) if not settled[i]]
    F = [tuple(Fr[T[i]][i][:flen[i]]) if T[i] is not None else () for i in range(n)]
    return RoutingTable(
        destination=d,
        metric=m,
        cost=np.array(D),
        forwarding_set=F,
        rate=T,
        rate_cost={r: np.array(Dr[r]) for r in rates},
        rate_forwarding_set={r: [tuple(s) for s in Fr[r]] for r in rates},
        settle_order=order + unreached,
        algorithm=name,
    )


def _bellman_ford_engine(g: Graph, d: int, rates: Sequence[int], m: Metric, name: str,
                         trace: AdmitHook | None) -> RoutingTable:
    n = g.node_count
    inf = math.inf

    D = [inf] * n
    D[d] = 0.0
    F: list[tuple[int, ...]] = [()] * n
    T: list[int | None] = [None] * n
    Dr = {r: [inf] * n for r in rates}
    Fr = {r: [()] * n for r in rates}
    for r in rates:
        Dr[r][d] = 0.0

    rounds = 0
    for t in range(1, n):
        prev = D  # previous-round snapshot; D is rebuilt, never mutated in place
        newD, newF, newT = list(D), list(F), list(T)
        for i in range(n):
            if i == d:
                continue
            best, best_set, best_rate = inf, (), None
            for r in rates:
                out = g.out_links(i, r)
                nbrs = sorted((prev[j], j) for j in out if prev[j] < inf)
                cur, q, members = inf, 1.0, []
                for Dj, j in nbrs:
                    if not cur > Dj:
                        break
                    members.append(j)
                    q_new = _extend_loss(g, i, r, members, q, out[j])
                    if q < 1.0:
                        new = incremental_update(cur, 1.0 - q, 1.0 - q_new, Dj)
                    else:
                        new = anypath_cost(i, members, r, prev, g, m)
                    if trace is not None:
                        trace(i, r, j, cur, new)
                    cur, q = new, q_new
                Dr[r][i] = cur
                Fr[r][i] = tuple(members)
                if best > cur:
                    best, best_set, best_rate = cur, tuple(members), r
            newD[i], newF[i], newT[i] = best, best_set, best_rate
        changed = newD != D or newF != F or newT != T
        D, F, T = newD, newF, newT
        if not changed:
            break
        rounds = t

    return RoutingTable(
        destination=d,
        metric=m,
        cost=np.array(D),
        forwarding_set=F,
        rate=T,
        rate_cost={r: np.array(Dr[r]) for r in rates},
        rate_forwarding_set={r: list(Fr[r]) for r in rates},
        rounds=rounds,
        algorithm=name,
    )


def shortest_anypath_first(g: Graph, d: int, r: int, m: Metric = EATX,
                           trace: AdmitHook | None = None) -> RoutingTable:
    """Single-rate Dijkstra-style anypath solver (every node transmits at ``r``)."""
    _check(g, d, [r])
    return _settling_engine(g, d, [r], m, "SAF", trace)


def anypath_bellman_ford(g: Graph, d: int, r: int, m: Metric = EATX,
                         trace: AdmitHook | None = None) -> RoutingTable:
    """Single-rate Bellman-Ford anypath solver with synchronous rounds."""
    _check(g, d, [r])
    return _bellman_ford_engine(g, d, [r], m, "ABF", trace)


def shortest_multirate_anypath_first(g: Graph, d: int, m: Metric = EATX,
                                     trace: AdmitHook | None = None) -> RoutingTable:
    """Dijkstra-style solver choosing both forwarding set and rate per node.

    Runs in O(V log V + E R) for independent losses.
    """
    _check(g, d, g.rates)
    return _settling_engine(g, d, g.rates, m, "SMAF", trace)


def multirate_anypath_bellman_ford(g: Graph, d: int, m: Metric = EATX,
                                   trace: AdmitHook | None = None) -> RoutingTable:
    """Bellman-Ford-style multirate solver; at most ``|V| - 1`` rounds."""
    _check(g, d, g.rates)
    return _bellman_ford_engine(g, d, g.rates, m, "MABF", trace)


def solve(g: Graph, d: int, m: Metric = EATX, rate: int | None = None,
          algorithm: str = "dijkstra") -> RoutingTable:
    """Dispatch to one of the four solvers.

    ``rate=None`` selects the multirate variant; ``algorithm`` is
    ``"dijkstra"`` or ``"bellman-ford"``.
    """
    if algorithm not in ("dijkstra", "bellman-ford"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if rate is None:
        if algorithm == "dijkstra":
            return shortest_multirate_anypath_first(g, d, m)
        return multirate_anypath_bellman_ford(g, d, m)
    if algorithm == "dijkstra":
        return shortest_anypath_first(g, d, rate, m)
    return anypath_bellman_ford(g, d, rate, m)
