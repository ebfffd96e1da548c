"""JSON network descriptions.

::

    {
      "mode": "pairs" | "geometry" | "channels",
      "nodes": [{"id": "A", "eb_s": 5e-05, "et_s": 1e-04, "el_bits": 12000,
                 "channels": [1], "x": 0.0, "y": 0.0, "cs_range": 50.0}, ...],
      "conflicts": [["A", "B"], ...]
    }

``channels`` may appear in any mode (it sets the bonded width); ``x``, ``y``
and ``cs_range`` belong to geometry mode and ``conflicts`` to pairs mode.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ConfigError
from .topology import ConflictGraph, Node, build_from_channels, build_from_geometry, build_from_pairs

MODES = ("pairs", "geometry", "channels")
_NODE_REQUIRED = ("id", "eb_s", "et_s", "el_bits")
_GEOMETRY = ("x", "y", "cs_range")


def _number(value, where: str, positive: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{where}: must be > 0, got {value!r}")
    return float(value)


def _node(raw, k: int, mode: str) -> Node:
    where = f"nodes[{k}]"
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    allowed = set(_NODE_REQUIRED) | {"channels"}
    if mode == "geometry":
        allowed |= set(_GEOMETRY)
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"{where}: field(s) {', '.join(unknown)} not allowed in mode {mode!r}")
    required = _NODE_REQUIRED + (_GEOMETRY if mode == "geometry" else ()) + (
        ("channels",) if mode == "channels" else ()
    )
    for name in required:
        if name not in raw:
            raise ConfigError(f"{where}.{name}: required field missing")
    node_id = raw["id"]
    if not isinstance(node_id, str) or not node_id:
        raise ConfigError(f"{where}.id: expected a non-empty string")
    channels = raw.get("channels", [])
    if not isinstance(channels, list) or not all(
        isinstance(c, int) and not isinstance(c, bool) for c in channels
    ):
        raise ConfigError(f"{where}.channels: expected a list of integers")
    if "channels" in raw and not channels:
        raise ConfigError(f"{where}.channels: must not be empty")
    if len(set(channels)) != len(channels):
        raise ConfigError(f"{where}.channels: duplicate channel index")
    position = cs_range = None
    if mode == "geometry":
        position = (_number(raw["x"], f"{where}.x", False), _number(raw["y"], f"{where}.y", False))
        cs_range = _number(raw["cs_range"], f"{where}.cs_range")
    try:
        return Node(
            id=node_id,
            backoff_mean=_number(raw["eb_s"], f"{where}.eb_s"),
            tx_time_mean=_number(raw["et_s"], f"{where}.et_s"),
            packet_len_mean=_number(raw["el_bits"], f"{where}.el_bits"),
            channels=frozenset(channels),
            position=position,
            cs_range=cs_range,
        )
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(doc) -> tuple[list[Node], ConflictGraph]:
    """Validate a decoded JSON document and build its conflict graph."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    unknown = sorted(set(doc) - {"mode", "nodes", "conflicts"})
    if unknown:
        raise ConfigError(f"top level: unknown field(s) {', '.join(unknown)}")
    mode = doc.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode: expected one of {', '.join(MODES)}, got {mode!r}")
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise ConfigError("nodes: expected a non-empty array")
    nodes = [_node(raw, k, mode) for k, raw in enumerate(raw_nodes)]

    if mode == "pairs":
        if "conflicts" not in doc:
            raise ConfigError("conflicts: required in mode 'pairs'")
        pairs = doc["conflicts"]
        if not isinstance(pairs, list):
            raise ConfigError("conflicts: expected an array of id pairs")
        for k, pair in enumerate(pairs):
            if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
                raise ConfigError(f"conflicts[{k}]: expected a pair of node ids")
        return nodes, build_from_pairs(nodes, [tuple(p) for p in pairs])
    if "conflicts" in doc:
        raise ConfigError(f"conflicts: not allowed in mode {mode!r}")
    if mode == "geometry":
        return nodes, build_from_geometry(nodes)
    return nodes, build_from_channels(nodes)


def load_config(path: str | Path) -> tuple[list[Node], ConflictGraph]:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def dump_config(nodes, graph: ConflictGraph, mode: str = "pairs") -> dict:
    """Inverse of :func:`parse_config` for pairs or channels mode."""
    doc = {"mode": mode, "nodes": []}
    for n in nodes:
        entry = {"id": n.id, "eb_s": n.backoff_mean, "et_s": n.tx_time_mean, "el_bits": n.packet_len_mean}
        if n.channels:
            entry["channels"] = sorted(n.channels)
        doc["nodes"].append(entry)
    if mode == "pairs":
        doc["conflicts"] = [[graph.nodes[i].id, graph.nodes[j].id] for i, j in graph.edges()]
    return doc
