"""Built-in networks: vehicular platoons, a PLC relay chain and bonded WLANs."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .core import compute_theta, product_form
from .errors import ConfigError
from .statespace import enumerate_states
from .throughput import node_throughput
from .topology import ConflictGraph, Node, build_from_channels, build_from_pairs


class ScenarioId(str, Enum):
    VEHICULAR_POS1 = "vehicular_pos1"
    VEHICULAR_POS2 = "vehicular_pos2"
    PLC_CHAIN = "plc_chain"
    WLAN_BONDING = "wlan_bonding"


@dataclass(frozen=True)
class Defaults:
    eb: float
    et: float
    el: float


VEHICULAR = Defaults(eb=3e-3, et=3e-3, el=8000.0)
PLC = Defaults(eb=1359.02e-6, et=1359.02e-6, el=12000.0)
BONDING = Defaults(eb=50e-6, et=0.1e-3, el=12000.0)

# Basic channels per WLAN; widths 1, 1, 2, 4, 8.
BONDING_CHANNELS = {
    "A": (1,),
    "B": (5,),
    "C": (7, 8),
    "D": (1, 2, 3, 4),
    "E": (1, 2, 3, 4, 5, 6, 7, 8),
}

_DEFAULTS = {
    ScenarioId.VEHICULAR_POS1: VEHICULAR,
    ScenarioId.VEHICULAR_POS2: VEHICULAR,
    ScenarioId.PLC_CHAIN: PLC,
    ScenarioId.WLAN_BONDING: BONDING,
}

_OVERRIDE_KEYS = {"eb": "backoff_mean", "et": "tx_time_mean", "el": "packet_len_mean"}


def chain_conflicts(ids: Sequence[str], hops: int = 2) -> list[tuple[str, str]]:
    """Pairs of chain nodes at most ``hops`` positions apart."""
    return [
        (ids[i], ids[j])
        for i in range(len(ids))
        for j in range(i + 1, min(i + hops + 1, len(ids)))
    ]


def _resolve(id: ScenarioId | str) -> ScenarioId:
    try:
        return ScenarioId(id)
    except ValueError:
        names = ", ".join(s.value for s in ScenarioId)
        raise ConfigError(f"unknown scenario {id!r}; expected one of {names}") from None


def _param(overrides: Mapping, key: str, ids: Sequence[str], node_id: str, default: float) -> float:
    value = overrides.get(key)
    if value is None:
        return default
    if isinstance(value, Mapping):
        unknown = set(value) - set(ids)
        if unknown:
            raise ConfigError(f"override {key!r} names unknown nodes {sorted(unknown)}")
        value = value.get(node_id, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"override {key!r} must be positive, got {value!r}")
    return float(value)


def build(id: ScenarioId | str, overrides: Mapping | None = None) -> tuple[list[Node], ConflictGraph]:
    """Nodes and conflict graph for a built-in scenario.

    ``overrides`` may set ``eb``, ``et`` and ``el`` (seconds, seconds, bits),
    each either a single value for all nodes or a mapping from node id.
    """
    sid = _resolve(id)
    overrides = dict(overrides or {})
    bad = set(overrides) - set(_OVERRIDE_KEYS)
    if bad:
        raise ConfigError(f"unsupported overrides {sorted(bad)}; only eb, et, el may be set")
    d = _DEFAULTS[sid]

    if sid in (ScenarioId.VEHICULAR_POS1, ScenarioId.VEHICULAR_POS2):
        ids = ("A", "B", "D")
    else:
        ids = ("A", "B", "C", "D", "E")

    nodes = []
    for node_id in ids:
        nodes.append(
            Node(
                id=node_id,
                backoff_mean=_param(overrides, "eb", ids, node_id, d.eb),
                tx_time_mean=_param(overrides, "et", ids, node_id, d.et),
                packet_len_mean=_param(overrides, "el", ids, node_id, d.el),
                channels=frozenset(BONDING_CHANNELS[node_id]) if sid is ScenarioId.WLAN_BONDING else frozenset(),
            )
        )

    if sid is ScenarioId.VEHICULAR_POS1:
        # B and D are out of each other's carrier sense; A hears both.
        graph = build_from_pairs(nodes, [("A", "B"), ("A", "D")])
    elif sid is ScenarioId.VEHICULAR_POS2:
        graph = build_from_pairs(nodes, [("A", "B"), ("A", "D"), ("B", "D")])
    elif sid is ScenarioId.PLC_CHAIN:
        graph = build_from_pairs(nodes, chain_conflicts(ids, hops=2))
    else:
        graph = build_from_channels(nodes)
    return nodes, graph


def default_grid(id: ScenarioId | str, points: int = 50) -> np.ndarray:
    """Log-spaced backoff means spanning ``[E[T]/100, 10 E[T]]``."""
    et = _DEFAULTS[_resolve(id)].et
    return np.logspace(np.log10(et / 100), np.log10(10 * et), points)


def sweep_nodes(
    nodes: Sequence[Node], graph: ConflictGraph, eb_grid: Sequence[float]
) -> list[tuple[float, dict[str, float]]]:
    """Per-node throughput (bits/s) with every node's backoff mean set to each grid value."""
    grid = [float(x) for x in eb_grid]
    if not grid:
        raise ConfigError("backoff grid is empty")
    if any(not (x > 0 and np.isfinite(x)) for x in grid):
        raise ConfigError("backoff grid values must be finite and positive")
    space = enumerate_states(graph)
    rows = []
    for eb in grid:
        swept = [n.with_params(backoff_mean=eb) for n in nodes]
        report = node_throughput(space, product_form(space, compute_theta(swept)), swept)
        rows.append((eb, dict(zip(report.ids, report.throughput.tolist()))))
    return rows


def sweep_backoff(
    id: ScenarioId | str, eb_grid: Sequence[float], overrides: Mapping | None = None
) -> list[tuple[float, dict[str, float]]]:
    """Backoff sweep of a built-in scenario; rows follow the grid order."""
    nodes, graph = build(id, overrides)
    return sweep_nodes(nodes, graph, eb_grid)
