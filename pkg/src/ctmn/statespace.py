"""Feasible network states: the independent sets of a conflict graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, StateExplosionError
from .topology import MAX_NODES, ConflictGraph, Node

DEFAULT_STATE_CAP = 2**20

UP = +1
DOWN = -1


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Feasible states as bit masks, sorted by (popcount, mask).

    The single-node transitions are kept as three parallel arrays of "up"
    edges: ``up_from[e] -> up_to[e]`` adds node ``up_node[e]``.  Per-state
    views (``states``, ``index``, ``adjacency``) are built on first use.
    """

    n_nodes: int
    masks: np.ndarray = field(repr=False)
    up_from: np.ndarray = field(repr=False)
    up_to: np.ndarray = field(repr=False)
    up_node: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.masks)

    def __contains__(self, mask: int) -> bool:
        return mask in self.index

    @cached_property
    def states(self) -> tuple[int, ...]:
        return tuple(int(m) for m in self.masks)

    @cached_property
    def index(self) -> dict[int, int]:
        return {m: k for k, m in enumerate(self.states)}

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int, int], ...], ...]:
        """For each state, ``(neighbor_position, node_index, direction)`` triples."""
        lists: list[list[tuple[int, int, int]]] = [[] for _ in range(len(self))]
        for a, b, i in zip(self.up_from.tolist(), self.up_to.tolist(), self.up_node.tolist()):
            lists[a].append((b, i, UP))
            lists[b].append((a, i, DOWN))
        return tuple(tuple(sorted(x)) for x in lists)

    def membership(self) -> np.ndarray:
        """Boolean matrix, rows = states, columns = nodes."""
        shifts = np.arange(self.n_nodes, dtype=np.uint64)
        return ((self.masks[:, None] >> shifts) & np.uint64(1)).astype(bool)

    def up_edges(self):
        """Yield ``(position_of_s, position_of_s_plus_i, i)`` for every adjacent pair."""
        return zip(self.up_from.tolist(), self.up_to.tolist(), self.up_node.tolist())

    def maximal_states(self) -> list[int]:
        has_up = np.zeros(len(self), dtype=bool)
        has_up[self.up_from] = True
        return [int(m) for m in self.masks[~has_up]]


def _popcount(masks: np.ndarray) -> np.ndarray:
    counts = np.zeros(len(masks), dtype=np.int64)
    rest = masks.copy()
    while rest.any():
        counts += (rest & np.uint64(1)).astype(np.int64)
        rest >>= np.uint64(1)
    return counts


def enumerate_states(graph: ConflictGraph, cap: int = DEFAULT_STATE_CAP) -> StateSpace:
    """Enumerate every independent set of ``graph``.

    Sets are grown one node at a time in index order, so node ``i`` is only
    ever added to sets whose members all have smaller indices and each set is
    produced exactly once.  Raises :class:`StateExplosionError` once more than
    ``cap`` states exist.
    """
    n = graph.n
    if n > MAX_NODES:
        raise ConfigError(f"{n} nodes exceeds the maximum of {MAX_NODES}")
    masks = np.zeros(1, dtype=np.uint64)
    for i in range(n):
        free = masks[(masks & np.uint64(graph.adjacency[i])) == 0]
        masks = np.concatenate([masks, free | np.uint64(1 << i)])
        if len(masks) > cap:
            raise StateExplosionError(f"state space exceeds the cap of {cap} states for {n} nodes")

    masks = masks[np.lexsort((masks, _popcount(masks)))]
    by_mask = np.argsort(masks, kind="stable")
    sorted_masks = masks[by_mask]

    froms, tos, nodes = [], [], []
    for i in range(n):
        bit = np.uint64(1 << i)
        upper = np.nonzero(masks & bit)[0]
        lower = by_mask[np.searchsorted(sorted_masks, masks[upper] ^ bit)]
        froms.append(lower)
        tos.append(upper)
        nodes.append(np.full(len(upper), i, dtype=np.int64))
    if n:
        up_from, up_to, up_node = (np.concatenate(x).astype(np.int64) for x in (froms, tos, nodes))
        order = np.lexsort((up_node, up_from))
        up_from, up_to, up_node = up_from[order], up_to[order], up_node[order]
    else:
        up_from = up_to = up_node = np.zeros(0, dtype=np.int64)
    return StateSpace(n, masks, up_from, up_to, up_node)


def transition_rate(space: StateSpace, s: int, s2: int, nodes: list[Node]) -> float:
    """Rate of the jump ``s -> s2``: attempt rate up, completion rate down, else 0."""
    for mask in (s, s2):
        if mask not in space.index:
            raise ConfigError(f"state {mask:#x} is not feasible")
    diff = s ^ s2
    if diff == 0 or diff & (diff - 1):
        return 0.0
    i = diff.bit_length() - 1
    if s2 & diff:
        return nodes[i].attempt_rate
    return nodes[i].service_rate


def state_label(mask: int, ids: list[str]) -> str:
    """Sorted member ids, ``-`` for the empty state.

    Single-character ids are concatenated (``AD``); longer ids are joined
    with ``+`` so labels stay unambiguous.
    """
    members = sorted(ids[i] for i in range(len(ids)) if mask >> i & 1)
    if not members:
        return "-"
    sep = "" if all(len(x) == 1 for x in ids) else "+"
    return sep.join(members)
