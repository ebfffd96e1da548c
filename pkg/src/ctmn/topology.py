"""Nodes and conflict graphs.

A conflict graph joins two nodes when they cannot transmit at the same time.
Three builders are provided: explicit pairs, carrier-sense geometry and
basic-channel overlap.  Adjacency is stored as one integer bit mask per node,
in input order, which is the canonical order every downstream bit-vector uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import ConfigError

MAX_NODES = 32


@dataclass(frozen=True)
class Node:
    """A saturated CSMA/CA contender.

    Times are in seconds and packet lengths in bits.  ``tx_time_mean`` is the
    mean packet duration on a single basic channel; a node bonding ``c``
    channels transmits ``c`` times faster.
    """

    id: str
    backoff_mean: float
    tx_time_mean: float
    packet_len_mean: float
    channels: frozenset[int] = field(default_factory=frozenset)
    position: tuple[float, float] | None = None
    cs_range: float | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ConfigError(f"node id must be a non-empty string, got {self.id!r}")
        for name in ("backoff_mean", "tx_time_mean", "packet_len_mean"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"node {self.id}: {name} must be a finite positive number, got {value!r}")
        object.__setattr__(self, "channels", frozenset(self.channels))
        if self.channels:
            _check_channel_block(self.id, self.channels)
        if self.position is not None:
            if len(self.position) != 2 or not all(math.isfinite(float(v)) for v in self.position):
                raise ConfigError(f"node {self.id}: position must be two finite coordinates")
            object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        if self.cs_range is not None and not (math.isfinite(self.cs_range) and self.cs_range >= 0):
            raise ConfigError(f"node {self.id}: cs_range must be a finite non-negative number")

    @property
    def width(self) -> int:
        """Number of bonded basic channels (1 when no channels are given)."""
        return len(self.channels) or 1

    @property
    def attempt_rate(self) -> float:
        return 1.0 / self.backoff_mean

    @property
    def service_rate(self) -> float:
        """Effective transmission completion rate, width / E[T]."""
        return self.width / self.tx_time_mean

    @property
    def effective_tx_time(self) -> float:
        return self.tx_time_mean / self.width

    @property
    def bitrate(self) -> float:
        """Bits per second while transmitting, E[L] * width / E[T]."""
        return self.packet_len_mean * self.service_rate

    def with_params(self, **changes) -> Node:
        return replace(self, **changes)


def _check_channel_block(node_id: str, channels: frozenset[int]) -> None:
    if not all(isinstance(c, int) and not isinstance(c, bool) for c in channels):
        raise ConfigError(f"node {node_id}: channel indices must be integers")
    size = len(channels)
    if size & (size - 1):
        raise ConfigError(f"node {node_id}: channel count {size} is not a power of two")
    if max(channels) - min(channels) + 1 != size:
        raise ConfigError(f"node {node_id}: channels {sorted(channels)} are not contiguous")


@dataclass(frozen=True)
class ConflictGraph:
    nodes: tuple[Node, ...]
    adjacency: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) != len(self.adjacency):
            raise ValueError("adjacency must have one mask per node")
        for i, mask in enumerate(self.adjacency):
            if mask >> i & 1:
                raise ValueError(f"self-edge on node {self.nodes[i].id}")
            for j in _bits(mask):
                if not self.adjacency[j] >> i & 1:
                    raise ValueError("adjacency is not symmetric")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def ids(self) -> list[str]:
        return [node.id for node in self.nodes]

    def index(self, node_id: str) -> int:
        for i, node in enumerate(self.nodes):
            if node.id == node_id:
                return i
        raise KeyError(node_id)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i] >> j & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in _bits(self.adjacency[i]) if i < j]

    def edge_ids(self) -> set[frozenset[str]]:
        return {frozenset((self.nodes[i].id, self.nodes[j].id)) for i, j in self.edges()}

    def with_nodes(self, nodes: Sequence[Node]) -> ConflictGraph:
        """Same conflict structure with re-parameterized nodes (ids must match)."""
        nodes = tuple(nodes)
        if [n.id for n in nodes] != self.ids:
            raise ConfigError("replacement nodes must keep ids and order")
        return ConflictGraph(nodes, self.adjacency)


def _bits(mask: int) -> Iterable[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _check_nodes(nodes: Sequence[Node]) -> tuple[Node, ...]:
    nodes = tuple(nodes)
    if not nodes:
        raise ConfigError("a network needs at least one node")
    if len(nodes) > MAX_NODES:
        raise ConfigError(f"{len(nodes)} nodes exceeds the maximum of {MAX_NODES}")
    seen = set()
    for node in nodes:
        if node.id in seen:
            raise ConfigError(f"duplicate node id {node.id!r}")
        seen.add(node.id)
    return nodes


def _from_edges(nodes: tuple[Node, ...], edges: Iterable[tuple[int, int]]) -> ConflictGraph:
    adjacency = [0] * len(nodes)
    for i, j in edges:
        adjacency[i] |= 1 << j
        adjacency[j] |= 1 << i
    return ConflictGraph(nodes, tuple(adjacency))


def build_from_pairs(nodes: Sequence[Node], conflict_pairs: Iterable[Sequence[str]]) -> ConflictGraph:
    nodes = _check_nodes(nodes)
    position = {node.id: i for i, node in enumerate(nodes)}
    edges = []
    for pair in conflict_pairs:
        if len(pair) != 2:
            raise ConfigError(f"conflict pair must have two ids, got {pair!r}")
        a, b = pair
        for x in (a, b):
            if x not in position:
                raise ConfigError(f"conflict pair references unknown node id {x!r}")
        if a == b:
            raise ConfigError(f"self-conflict pair ({a!r}, {b!r})")
        edges.append((position[a], position[b]))
    return _from_edges(nodes, edges)


def build_from_geometry(nodes: Sequence[Node]) -> ConflictGraph:
    """Nodes conflict when their distance is within the larger of the two ranges."""
    nodes = _check_nodes(nodes)
    for node in nodes:
        if node.position is None or node.cs_range is None:
            raise ConfigError(f"node {node.id}: geometry mode requires position and cs_range")
    edges = []
    for i, a in enumerate(nodes):
        for j in range(i + 1, len(nodes)):
            b = nodes[j]
            reach = max(a.cs_range, b.cs_range)
            if math.dist(a.position, b.position) <= reach:
                edges.append((i, j))
    return _from_edges(nodes, edges)


def build_from_channels(nodes: Sequence[Node]) -> ConflictGraph:
    """Co-located nodes conflict when they share at least one basic channel."""
    nodes = _check_nodes(nodes)
    for node in nodes:
        if not node.channels:
            raise ConfigError(f"node {node.id}: channel mode requires a non-empty channel set")
    edges = [
        (i, j)
        for i in range(len(nodes))
        for j in range(i + 1, len(nodes))
        if nodes[i].channels & nodes[j].channels
    ]
    return _from_edges(nodes, edges)
