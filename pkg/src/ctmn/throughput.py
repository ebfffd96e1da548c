"""Per-node airtime and throughput from a stationary distribution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import StationaryDistribution
from .statespace import StateSpace
from .topology import Node


@dataclass(frozen=True)
class ThroughputReport:
    ids: tuple[str, ...]
    airtime: np.ndarray  # fraction of time each node transmits
    throughput: np.ndarray  # bits/s

    @property
    def total(self) -> float:
        return float(self.throughput.sum())

    def __getitem__(self, node_id: str) -> float:
        return float(self.throughput[self.ids.index(node_id)])

    def airtime_of(self, node_id: str) -> float:
        return float(self.airtime[self.ids.index(node_id)])


def node_throughput(
    space: StateSpace, dist: StationaryDistribution, nodes: Sequence[Node]
) -> ThroughputReport:
    """Airtime is the probability mass of states containing the node; throughput
    multiplies it by the node's bitrate ``E[L] * c / E[T]``."""
    airtime = dist.pi @ space.membership()
    bitrate = np.array([n.bitrate for n in nodes])
    return ThroughputReport(
        ids=tuple(n.id for n in nodes),
        airtime=airtime,
        throughput=bitrate * airtime,
    )
