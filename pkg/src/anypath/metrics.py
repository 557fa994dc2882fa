"""Closed-form anypath cost machinery.

Costs are plain floats; ``math.inf`` marks an unreachable node.  A forwarding
set is a sequence of node ids in relay-priority order (ascending remote cost,
ties by ascending id).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph

__all__ = [
    "EATT",
    "EATX",
    "Metric",
    "anypath_cost",
    "hyperlink_cost",
    "hyperlink_delivery_ratio",
    "incremental_update",
    "priority_order",
    "relay_weights",
    "remaining_cost",
    "transmission_cost",
]


@dataclass(frozen=True)
class Metric:
    """Routing metric.

    ``kind`` is ``"eatx"`` (expected anypath transmissions) or ``"eatt"``
    (expected anypath transmission time, in seconds).  For EATT a
    ``packet_size_bits`` of ``None`` defers to the graph's packet size.
    """

    kind: str = "eatx"
    packet_size_bits: int | None = None

    def __post_init__(self):
        if self.kind not in ("eatx", "eatt"):
            raise ValueError(f"unknown metric {self.kind!r}")
        if self.packet_size_bits is not None and self.packet_size_bits <= 0:
            raise ValueError("packet size must be positive")

    @classmethod
    def parse(cls, name: str, packet_size_bits: int | None = None) -> Metric:
        return cls(name.lower(), packet_size_bits)

    @property
    def is_time(self) -> bool:
        return self.kind == "eatt"

    def __str__(self):
        return self.kind


EATX = Metric("eatx")
EATT = Metric("eatt")


def transmission_cost(rate: int, g: Graph, m: Metric = EATX) -> float:
    """Cost of one broadcast: 1 for EATX, ``s / r`` seconds for EATT."""
    if m.kind == "eatx":
        return 1.0
    bits = m.packet_size_bits or g.packet_size_bits
    return bits / rate


def priority_order(members, costs) -> list[int]:
    """Sort ``members`` by ascending ``costs[j]``, ties by id."""
    return sorted(members, key=lambda j: (costs[j], j))


def hyperlink_delivery_ratio(i: int, J: Sequence[int], r: int, g: Graph) -> float:
    """Probability that at least one member of ``J`` receives a frame from ``i`` at ``r``."""
    if len(J) == 0:
        raise ValueError("forwarding set is empty")
    return 1.0 - g.all_lose_probability(i, list(J), r)


def relay_weights(i: int, J: Sequence[int], r: int, g: Graph) -> np.ndarray:
    """Probability that each member relays, given that someone in ``J`` received.

    ``J`` must already be in priority order.
    """
    if len(J) == 0:
        raise ValueError("forwarding set is empty")
    first = g.first_receiver_probabilities(i, list(J), r)
    p = 1.0 - g.all_lose_probability(i, list(J), r)
    if p <= 0.0:
        raise ValueError(f"hyperlink {i}->{list(J)} at rate {r} has zero delivery ratio")
    return first / p


def remaining_cost(w: Sequence[float], costs: Sequence[float]) -> float:
    """Relay-weighted average of member costs.  Zero-weight members are ignored."""
    if len(w) != len(costs):
        raise ValueError("weights and costs differ in length")
    total = 0.0
    for wj, cj in zip(w, costs):
        if wj > 0.0:
            if math.isinf(cj):
                return math.inf
            total += wj * cj
    return total


def hyperlink_cost(i: int, J: Sequence[int], r: int, g: Graph, m: Metric = EATX) -> float:
    p = hyperlink_delivery_ratio(i, J, r, g)
    if p <= 0.0:
        return math.inf
    return transmission_cost(r, g, m) / p


def anypath_cost(i: int, J: Sequence[int], r: int, remote_costs, g: Graph, m: Metric = EATX) -> float:
    """Cost of ``i`` reaching the destination through hyperlink ``(i, J)`` at rate ``r``.

    ``remote_costs[j]`` is member ``j``'s cost; ``J`` is re-sorted into
    priority order before weighting.
    """
    order = priority_order(J, remote_costs)
    d = hyperlink_cost(i, order, r, g, m)
    if math.isinf(d):
        return math.inf
    w = relay_weights(i, order, r, g)
    return d + remaining_cost(w, [remote_costs[j] for j in order])


def incremental_update(D_i: float, p_J: float, p_J_new: float, D_j: float) -> float:
    """Cost after appending a lowest-priority member ``j`` to the forwarding set.

    ``p_J`` and ``p_J_new`` are the hyperlink delivery ratios before and after
    adding ``j``; ``D_i`` is the cost through the old set.
    """
    if p_J_new < p_J:
        raise ValueError(f"adding a receiver lowered the delivery ratio ({p_J} -> {p_J_new})")
    if p_J <= 0.0:
        raise ValueError("previous delivery ratio must be positive")
    keep = p_J / p_J_new
    if keep == 1.0:
        return D_i
    return keep * D_i + (1.0 - keep) * D_j

