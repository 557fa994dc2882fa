"""Multirate lossy graph model, the text file format, and synthetic generators.

A :class:`Graph` holds one directed link layer per transmission rate.  Each
link carries a delivery ratio.  Losses at different receivers are independent
unless a :class:`JointReceptionModel` is attached to a (node, rate) pair, in
which case the joint pmf over the listed receivers governs reception.

Both loss models are exposed through the same two queries,
:meth:`Graph.all_lose_probability` and :meth:`Graph.first_receiver_probabilities`,
so the metric code never needs to know which one is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

import numpy as np

__all__ = [
    "DEFAULT_PACKET_BITS",
    "MAX_JOINT_NEIGHBORS",
    "Graph",
    "GraphError",
    "GraphFormatError",
    "JointReceptionModel",
    "Link",
    "format_graph",
    "generate_random_graph",
    "independent_joint_model",
    "parse_graph",
    "parse_rate",
    "read_graph",
    "write_graph",
]

DEFAULT_PACKET_BITS = 12000
MAX_JOINT_NEIGHBORS = 12


class GraphError(ValueError):
    """Raised when a graph violates a structural invariant."""


class GraphFormatError(GraphError):
    """Syntax or validation error while parsing a graph file."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class Link(NamedTuple):
    src: int
    dst: int
    rate: int
    ratio: float


def parse_rate(token: str | int | float) -> int:
    """Parse a rate token such as ``"5.5e6"`` or ``"11000000"`` into exact bits/s."""
    try:
        value = Decimal(str(token).strip())
    except InvalidOperation:
        raise ValueError(f"invalid rate {token!r}") from None
    if not value.is_finite() or value != value.to_integral_value():
        raise ValueError(f"rate must be a whole number of bits/s, got {token!r}")
    rate = int(value)
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {token!r}")
    return rate


@dataclass(frozen=True, eq=False)
class JointReceptionModel:
    """Joint reception distribution of ``node``'s broadcasts at ``rate``.

    ``pmf[mask]`` is the probability that exactly the neighbors whose bits are
    set in ``mask`` receive a frame (bit ``m`` stands for ``neighbors[m]``).
    """

    node: int
    rate: int
    neighbors: tuple[int, ...]
    pmf: np.ndarray

    def __post_init__(self):
        neighbors = tuple(int(j) for j in self.neighbors)
        pmf = np.array(self.pmf, dtype=float)
        n = len(neighbors)
        if n == 0 or n > MAX_JOINT_NEIGHBORS:
            raise GraphError(f"joint model needs 1..{MAX_JOINT_NEIGHBORS} neighbors, got {n}")
        if len(set(neighbors)) != n:
            raise GraphError(f"duplicate neighbor in joint model of node {self.node}")
        if self.node in neighbors:
            raise GraphError(f"joint model of node {self.node} lists itself")
        if pmf.shape != (1 << n,):
            raise GraphError(f"joint pmf must have {1 << n} entries, got {pmf.size}")
        if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
            raise GraphError("joint pmf entries must be finite and non-negative")
        if abs(pmf.sum() - 1.0) > 1e-9:
            raise GraphError(f"joint pmf sums to {pmf.sum()!r}, not 1")
        pmf.setflags(write=False)
        object.__setattr__(self, "node", int(self.node))
        object.__setattr__(self, "rate", int(self.rate))
        object.__setattr__(self, "neighbors", neighbors)
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "_index", {j: m for m, j in enumerate(neighbors)})
        object.__setattr__(self, "_masks", np.arange(1 << n))

    def bit(self, j: int) -> int | None:
        m = self._index.get(j)
        return None if m is None else 1 << m

    def mask_of(self, members: Iterable[int]) -> int:
        mask = 0
        for j in members:
            mask |= 1 << self._index[j]
        return mask

    def none_receive(self, mask: int) -> float:
        """P[no neighbor in ``mask`` receives]."""
        if mask == 0:
            return 1.0
        return float(self.pmf[(self._masks & mask) == 0].sum())

    def marginal(self, j: int) -> float:
        return 1.0 - self.none_receive(self.mask_of([j]))

    def marginals(self) -> np.ndarray:
        return np.array([self.marginal(j) for j in self.neighbors])

    def __eq__(self, other):
        if not isinstance(other, JointReceptionModel):
            return NotImplemented
        return (
            self.node == other.node
            and self.rate == other.rate
            and self.neighbors == other.neighbors
            and np.array_equal(self.pmf, other.pmf)
        )

    def __hash__(self):
        return hash((self.node, self.rate, self.neighbors))


def independent_joint_model(node: int, rate: int, neighbors: Sequence[int],
                            ratios: Sequence[float]) -> JointReceptionModel:
    """Joint model equal to the product of independent per-receiver ratios."""
    ratios = np.asarray(ratios, dtype=float)
    masks = np.arange(1 << len(neighbors))
    pmf = np.ones(masks.size)
    for m, p in enumerate(ratios):
        got = (masks >> m) & 1
        pmf *= np.where(got == 1, p, 1.0 - p)
    pmf /= pmf.sum()
    return JointReceptionModel(node, rate, tuple(neighbors), pmf)


LinkSpec = Union[Link, tuple]


class Graph:
    """Immutable multirate graph.

    Parameters
    ----------
    node_count:
        Number of nodes; ids are ``0 .. node_count - 1``.
    rates:
        Available rates in bits/s.  Stored sorted ascending.
    links:
        ``(src, dst, rate, ratio)`` tuples.  Links with ratio 0 are dropped.
    joint_models:
        Optional correlated-loss models, at most one per (node, rate).
    packet_size_bits:
        Packet size used by the transmission-time metric.
    """

    def __init__(self, node_count: int, rates: Iterable[int], links: Iterable[LinkSpec] = (),
                 joint_models: Iterable[JointReceptionModel] = (),
                 packet_size_bits: int = DEFAULT_PACKET_BITS):
        if int(node_count) != node_count or node_count < 1:
            raise GraphError(f"node count must be a positive integer, got {node_count!r}")
        rates = [parse_rate(r) if isinstance(r, str) else int(r) for r in rates]
        if not rates:
            raise GraphError("rate set is empty")
        if len(set(rates)) != len(rates):
            raise GraphError("rates must be distinct")
        if any(r <= 0 for r in rates):
            raise GraphError("rates must be positive")
        if int(packet_size_bits) != packet_size_bits or packet_size_bits <= 0:
            raise GraphError("packet size must be a positive integer number of bits")

        self._n = int(node_count)
        self._rates = tuple(sorted(rates))
        self._packet_bits = int(packet_size_bits)
        self._out: dict[int, list[dict[int, float]]] = {r: [{} for _ in range(self._n)] for r in self._rates}
        self._in: dict[int, list[dict[int, float]]] = {r: [{} for _ in range(self._n)] for r in self._rates}
        self._joint: dict[tuple[int, int], JointReceptionModel] = {}
        self._dropped: set[tuple[int, int, int]] = set()

        for link in links:
            src, dst, rate, ratio = link
            self._add_link(int(src), int(dst), int(rate), float(ratio))

        # Canonical adjacency order: ascending neighbor id.
        for r in self._rates:
            for lst in (self._out[r], self._in[r]):
                for k, adj in enumerate(lst):
                    lst[k] = dict(sorted(adj.items()))

        for model in joint_models:
            self._add_joint(model)

    def _add_link(self, src, dst, rate, ratio):
        if rate not in self._out:
            raise GraphError(f"link {src}->{dst} uses undeclared rate {rate}")
        for v in (src, dst):
            if not 0 <= v < self._n:
                raise GraphError(f"node id {v} out of range 0..{self._n - 1}")
        if src == dst:
            raise GraphError(f"self-loop on node {src}")
        if not 0.0 <= ratio <= 1.0 or math.isnan(ratio):
            raise GraphError(f"delivery ratio {ratio!r} of link {src}->{dst} outside [0, 1]")
        if dst in self._out[rate][src] or (src, dst, rate) in self._dropped:
            raise GraphError(f"duplicate link {src}->{dst} at rate {rate}")
        if ratio == 0.0:
            # dropped, but remembered so duplicates are still caught
            self._dropped.add((src, dst, rate))
            return
        self._out[rate][src][dst] = ratio
        self._in[rate][dst][src] = ratio

    def _add_joint(self, model: JointReceptionModel):
        key = (model.node, model.rate)
        if model.rate not in self._out:
            raise GraphError(f"joint model uses undeclared rate {model.rate}")
        if not 0 <= model.node < self._n:
            raise GraphError(f"joint model node {model.node} out of range")
        if key in self._joint:
            raise GraphError(f"duplicate joint model for node {model.node} at rate {model.rate}")
        out = self._out[model.rate][model.node]
        missing = [j for j in model.neighbors if j not in out]
        if missing:
            raise GraphError(
                f"joint model of node {model.node} at rate {model.rate} names non-neighbors {missing}")
        self._joint[key] = model

    # -- basic accessors -------------------------------------------------

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def rates(self) -> tuple[int, ...]:
        return self._rates

    @property
    def packet_size_bits(self) -> int:
        return self._packet_bits

    @property
    def joint_models(self) -> tuple[JointReceptionModel, ...]:
        return tuple(self._joint[k] for k in sorted(self._joint))

    def nodes(self) -> range:
        return range(self._n)

    def out_links(self, i: int, rate: int) -> Mapping[int, float]:
        """Out-neighbors of ``i`` at ``rate`` mapped to their delivery ratio."""
        return self._out[rate][i]

    def in_links(self, j: int, rate: int) -> Mapping[int, float]:
        return self._in[rate][j]

    def ratio(self, i: int, j: int, rate: int) -> float:
        return self._out[rate][i].get(j, 0.0)

    def joint_model(self, i: int, rate: int) -> JointReceptionModel | None:
        return self._joint.get((i, rate))

    def links(self, rate: int | None = None) -> Iterator[Link]:
        """All links in canonical ``(src, dst, rate)`` order."""
        rates = self._rates if rate is None else (rate,)
        for i in range(self._n):
            dsts = sorted({j for r in rates for j in self._out[r][i]})
            for j in dsts:
                for r in rates:
                    p = self._out[r][i].get(j)
                    if p is not None:
                        yield Link(i, j, r, p)

    def link_count(self, rate: int | None = None) -> int:
        rates = self._rates if rate is None else (rate,)
        return sum(len(adj) for r in rates for adj in self._out[r])

    def max_out_degree(self, rate: int | None = None) -> int:
        rates = self._rates if rate is None else (rate,)
        return max((len(adj) for r in rates for adj in self._out[r]), default=0)

    # -- reception-probability queries ----------------------------------

    def _check_members(self, i, members, rate):
        out = self._out[rate][i]
        for j in members:
            if j not in out:
                raise GraphError(f"node {j} is not a neighbor of {i} at rate {rate}")

    def all_lose_probability(self, i: int, members: Sequence[int], rate: int) -> float:
        """P[no node of ``members`` receives a frame sent by ``i`` at ``rate``].

        Members not covered by a joint model are treated as independent of the
        covered ones.
        """
        self._check_members(i, members, rate)
        return self._all_lose(i, members, rate)

    def _all_lose(self, i, members, rate):
        out = self._out[rate][i]
        model = self._joint.get((i, rate))
        q = 1.0
        if model is None:
            for j in members:
                q *= 1.0 - out[j]
            return q
        mask = 0
        for j in members:
            b = model.bit(j)
            if b is None:
                q *= 1.0 - out[j]
            else:
                mask |= b
        return q * model.none_receive(mask)

    def first_receiver_probabilities(self, i: int, members: Sequence[int], rate: int) -> np.ndarray:
        """For each position k, P[members[:k] all lose and members[k] receives]."""
        self._check_members(i, members, rate)
        probs = np.empty(len(members))
        prev = 1.0
        for k in range(len(members)):
            cur = self._all_lose(i, members[:k + 1], rate)
            probs[k] = max(prev - cur, 0.0)
            prev = cur
        return probs

    # -- misc ------------------------------------------------------------

    def with_packet_size(self, bits: int) -> Graph:
        return Graph(self._n, self._rates, self.links(), self.joint_models, bits)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._n == other._n
            and self._rates == other._rates
            and self._packet_bits == other._packet_bits
            and list(self.links()) == list(other.links())
            and self.joint_models == other.joint_models
        )

    def __repr__(self):
        return (f"Graph(nodes={self._n}, rates={list(self._rates)}, "
                f"links={self.link_count()}, joint_models={len(self._joint)})")


# -- file format ------------------------------------------------------------


def _int(token, lineno, what):
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"expected integer {what}, got {token!r}", lineno) from None


def _float(token, lineno, what):
    try:
        value = float(token)
    except ValueError:
        raise GraphFormatError(f"expected number for {what}, got {token!r}", lineno) from None
    if math.isnan(value):
        raise GraphFormatError(f"{what} is NaN", lineno)
    return value


def _rate(token, lineno):
    try:
        return parse_rate(token)
    except ValueError as exc:
        raise GraphFormatError(str(exc), lineno) from None


def parse_graph(text: str, packet_size_bits: int = DEFAULT_PACKET_BITS) -> Graph:
    """Parse the line-oriented graph format::

        # comment
        nodes 4
        rates 1000000 2000000
        link 0 1 1000000 0.8
        joint 0 1000000 2 1 2 0.1 0.3 0.2 0.4

    Raises :class:`GraphFormatError` with the offending line number.
    """
    node_count = None
    rates = None
    links: list[Link] = []
    seen_links: set[tuple[int, int, int]] = set()
    joints: list[tuple[int, JointReceptionModel]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kw, args = tok[0], tok[1:]
        if node_count is None and kw != "nodes":
            raise GraphFormatError("first statement must be 'nodes <N>'", lineno)

        if kw == "nodes":
            if node_count is not None:
                raise GraphFormatError("'nodes' given twice", lineno)
            if len(args) != 1:
                raise GraphFormatError("usage: nodes <N>", lineno)
            node_count = _int(args[0], lineno, "node count")
            if node_count < 1:
                raise GraphFormatError("node count must be positive", lineno)
        elif kw == "rates":
            if rates is not None:
                raise GraphFormatError("'rates' given twice", lineno)
            if not args:
                raise GraphFormatError("rate list is empty", lineno)
            rates = [_rate(a, lineno) for a in args]
            if len(set(rates)) != len(rates):
                raise GraphFormatError("duplicate rate", lineno)
        elif kw == "link":
            if rates is None:
                raise GraphFormatError("'link' before 'rates'", lineno)
            if len(args) != 4:
                raise GraphFormatError("usage: link <src> <dst> <rate> <ratio>", lineno)
            src = _int(args[0], lineno, "source")
            dst = _int(args[1], lineno, "destination")
            rate = _rate(args[2], lineno)
            ratio = _float(args[3], lineno, "ratio")
            if rate not in rates:
                raise GraphFormatError(f"rate {rate} not declared in 'rates'", lineno)
            if not 0.0 <= ratio <= 1.0:
                raise GraphFormatError(f"ratio {ratio!r} outside [0, 1]", lineno)
            for v in (src, dst):
                if not 0 <= v < node_count:
                    raise GraphFormatError(f"node id {v} out of range", lineno)
            if src == dst:
                raise GraphFormatError("self-loop", lineno)
            if (src, dst, rate) in seen_links:
                raise GraphFormatError(f"duplicate link {src} {dst} {rate}", lineno)
            seen_links.add((src, dst, rate))
            links.append(Link(src, dst, rate, ratio))
        elif kw == "joint":
            if rates is None:
                raise GraphFormatError("'joint' before 'rates'", lineno)
            if len(args) < 3:
                raise GraphFormatError("usage: joint <node> <rate> <k> <nbrs...> <pmf...>", lineno)
            node = _int(args[0], lineno, "node")
            rate = _rate(args[1], lineno)
            k = _int(args[2], lineno, "neighbor count")
            if rate not in rates:
                raise GraphFormatError(f"rate {rate} not declared in 'rates'", lineno)
            if not 1 <= k <= MAX_JOINT_NEIGHBORS:
                raise GraphFormatError(f"neighbor count must be 1..{MAX_JOINT_NEIGHBORS}", lineno)
            if len(args) != 3 + k + (1 << k):
                raise GraphFormatError(f"expected {k} neighbors and {1 << k} pmf entries", lineno)
            nbrs = [_int(a, lineno, "neighbor") for a in args[3:3 + k]]
            pmf = np.array([_float(a, lineno, "pmf entry") for a in args[3 + k:]])
            if np.any(pmf < 0):
                raise GraphFormatError("negative pmf entry", lineno)
            total = pmf.sum()
            if abs(total - 1.0) > 1e-6:
                raise GraphFormatError(f"joint pmf sums to {total!r}, not 1 within 1e-6", lineno)
            try:
                if abs(total - 1.0) > 1e-12:
                    pmf = pmf / total
                model = JointReceptionModel(node, rate, tuple(nbrs), pmf)
            except GraphError as exc:
                raise GraphFormatError(str(exc), lineno) from None
            joints.append((lineno, model))
        else:
            raise GraphFormatError(f"unknown statement {kw!r}", lineno)

    if node_count is None:
        raise GraphFormatError("missing 'nodes' statement")
    if rates is None:
        raise GraphFormatError("missing 'rates' statement")
    used = {l.rate for l in links} | {m.rate for _, m in joints}
    unused = sorted(set(rates) - used)
    # an edgeless file (e.g. a lone destination) has nothing to reference
    if unused and used:
        raise GraphFormatError(f"declared rates never referenced: {unused}")

    try:
        g = Graph(node_count, rates, links, packet_size_bits=packet_size_bits)
    except GraphError as exc:
        raise GraphFormatError(str(exc)) from None
    for lineno, model in joints:
        try:
            g._add_joint(model)
        except GraphError as exc:
            raise GraphFormatError(str(exc), lineno) from None
    return g


def format_graph(g: Graph) -> str:
    """Serialize ``g`` in canonical form (parse-able by :func:`parse_graph`)."""
    lines = [f"nodes {g.node_count}", "rates " + " ".join(str(r) for r in g.rates)]
    for link in g.links():
        lines.append(f"link {link.src} {link.dst} {link.rate} {link.ratio!r}")
    for m in g.joint_models:
        lines.append(
            f"joint {m.node} {m.rate} {len(m.neighbors)} "
            + " ".join(str(j) for j in m.neighbors) + " "
            + " ".join(repr(float(p)) for p in m.pmf)
        )
    return "\n".join(lines) + "\n"


def read_graph(path, packet_size_bits: int = DEFAULT_PACKET_BITS) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read(), packet_size_bits)


def write_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g))


# -- synthetic generation ---------------------------------------------------

RatioLaw = Union[str, Callable[[np.random.Generator, int, int], np.ndarray]]


def _ratio_sampler(law: RatioLaw):
    """Return ``f(rng, rate_index, count) -> ratios`` for a law spec.

    Supported strings: ``"uniform"`` (0.05..1), ``"uniform:<lo>:<hi>"``,
    ``"constant:<p>"``, ``"rate-decaying"`` and ``"rate-decaying:<lo>:<hi>"``.
    The rate-decaying law draws ``u`` uniformly and returns ``u ** (k + 1)``
    for the k-th slowest rate, so faster rates get lossier links.
    """
    if callable(law):
        return law
    name, _, params = law.partition(":")
    vals = [float(v) for v in params.split(":")] if params else []
    if name == "constant":
        if len(vals) != 1:
            raise ValueError("constant law needs one value, e.g. 'constant:0.8'")
        (p,) = vals
        return lambda rng, k, size: np.full(size, p)
    if name in ("uniform", "rate-decaying"):
        lo, hi = vals if vals else (0.05, 1.0)
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"bad bounds for {name} law: {lo}, {hi}")
        if name == "uniform":
            return lambda rng, k, size: rng.uniform(lo, hi, size)
        return lambda rng, k, size: rng.uniform(lo, hi, size) ** (k + 1)
    raise ValueError(f"unknown ratio law {law!r}")


def generate_random_graph(n: int, rates: Sequence[int | str], density: float | Sequence[float] = 0.5,
                          ratio_law: RatioLaw = "uniform", seed: int = 0,
                          max_out_degree: int | None = None,
                          packet_size_bits: int = DEFAULT_PACKET_BITS) -> Graph:
    """Random directed multirate graph.

    Every ordered pair ``(i, j)`` carries a link at rate ``r`` with probability
    ``density`` (a scalar, or one value per rate in ascending-rate order).
    ``max_out_degree`` keeps the first neighbors of each node (by a random
    permutation) when the per-rate degree would exceed it.  A rate that draws
    no link at all gets one random link.  Deterministic for a fixed seed.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes")
    rates = sorted(parse_rate(r) if isinstance(r, str) else int(r) for r in rates)
    if not rates:
        raise ValueError("rate list is empty")
    dens = np.broadcast_to(np.asarray(density, dtype=float), (len(rates),))
    if np.any(dens <= 0) or np.any(dens > 1):
        raise ValueError("density must lie in (0, 1]")
    sample = _ratio_sampler(ratio_law)
    rng = np.random.default_rng(seed)
    off_diag = ~np.eye(n, dtype=bool)

    links = []
    for k, r in enumerate(rates):
        present = (rng.random((n, n)) < dens[k]) & off_diag
        if max_out_degree is not None:
            for i in range(n):
                nbrs = np.flatnonzero(present[i])
                if nbrs.size > max_out_degree:
                    drop = rng.permutation(nbrs)[max_out_degree:]
                    present[i, drop] = False
        if not present.any():
            # keep every declared rate referenced so the graph can be written out
            a, b = rng.choice(n, size=2, replace=False)
            present[a, b] = True
        src, dst = np.nonzero(present)
        ratios = np.clip(np.asarray(sample(rng, k, src.size), dtype=float), 0.0, 1.0)
        links.extend(Link(int(a), int(b), r, float(p)) for a, b, p in zip(src, dst, ratios))
    return Graph(n, rates, links, packet_size_bits=packet_size_bits)
