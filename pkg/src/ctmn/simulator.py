"""Event-driven simulation of idealized CSMA/CA with frozen backoff.

Every node is saturated.  A node's backoff counts down only while none of its
conflict-graph neighbors is transmitting; when it reaches zero the node
transmits for a sampled duration and then immediately draws a new backoff.
Propagation delay is zero, so conflicting nodes never collide; exact ties in
floating point are broken by node index.

The event loop is compiled with numba.  Samples are pre-drawn per node in
blocks from independent, deterministically seeded generators, so results
depend only on (seed, config, node order).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numba
import numpy as np
from scipy import stats

from .core import compute_theta, product_form
from .errors import ConfigError
from .statespace import DEFAULT_STATE_CAP, StateSpace, enumerate_states
from .throughput import node_throughput
from .topology import ConflictGraph, Node

KINDS = ("exponential", "deterministic", "uniform")
BLOCK = 4096

_DONE, _REFILL, _INFEASIBLE = 0, 1, 2


@dataclass(frozen=True)
class DistributionSpec:
    """Sampling law for backoff or transmission times; uniform spans [0, 2*mean]."""

    kind: str
    mean: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown distribution {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ConfigError(f"distribution mean must be positive, got {self.mean!r}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "exponential":
            return rng.exponential(self.mean, size)
        if self.kind == "uniform":
            return rng.uniform(0.0, 2.0 * self.mean, size)
        return np.full(size, self.mean)


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.  ``warmup``/``measure`` default to 1e3 and 1e5
    times the largest single-channel mean transmission time."""

    seed: int = 0
    warmup: float | None = None
    measure: float | None = None
    replications: int = 10
    backoff_dist: str = "exponential"
    txtime_dist: str = "exponential"
    jobs: int = 1
    state_cap: int = DEFAULT_STATE_CAP

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if self.warmup is not None and not (math.isfinite(self.warmup) and self.warmup >= 0):
            raise ConfigError(f"warmup must be >= 0, got {self.warmup!r}")
        if self.measure is not None and not (math.isfinite(self.measure) and self.measure > 0):
            raise ConfigError(f"measurement window must be > 0, got {self.measure!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications!r}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs!r}")
        for kind in (self.backoff_dist, self.txtime_dist):
            if kind not in KINDS:
                raise ConfigError(f"unknown distribution {kind!r}; expected one of {', '.join(KINDS)}")

    def windows(self, nodes: Sequence[Node]) -> tuple[float, float]:
        longest = max(n.tx_time_mean for n in nodes)
        warmup = 1e3 * longest if self.warmup is None else self.warmup
        measure = 1e5 * longest if self.measure is None else self.measure
        return warmup, measure


@dataclass(frozen=True)
class SimResult:
    ids: tuple[str, ...]
    states: tuple[int, ...]
    airtime: np.ndarray  # per node, mean over replications
    airtime_hw: np.ndarray  # 95% half-width
    throughput: np.ndarray  # bits/s
    throughput_hw: np.ndarray
    state_fraction: np.ndarray  # per feasible state, mean over replications
    state_fraction_hw: np.ndarray
    rep_airtime: np.ndarray = field(repr=False)  # replications x nodes
    rep_state_fraction: np.ndarray = field(repr=False)  # replications x states
    partition_error: float = 0.0  # worst relative gap between summed state time and window
    config: SimConfig | None = None


@numba.njit(cache=True)
def _advance(adj, sorted_masks, sorted_pos, t_end, t_start, clock, active, busy, residual, tx_end,
             bo, bo_pos, tx, tx_pos, occupancy, who_out):
    """Run events until ``t_end`` or until a node runs out of pre-drawn samples.

    ``clock[0]`` and ``active[0]`` carry the time and active set across calls.
    """
    n = adj.shape[0]
    block = bo.shape[1]
    t = clock[0]
    act = active[0]
    while True:
        best = np.inf
        who = -1
        for i in range(n):
            if busy[i]:
                te = tx_end[i]
            elif act & adj[i]:
                continue
            else:
                te = t + residual[i]
            if te < best:
                best = te
                who = i
        stop = best >= t_end
        if not stop:
            if busy[who]:
                if bo_pos[who] >= block:
                    clock[0] = t
                    active[0] = act
                    who_out[0] = who
                    return _REFILL
            elif tx_pos[who] >= block:
                clock[0] = t
                active[0] = act
                who_out[0] = who
                return _REFILL
        nxt = t_end if stop else best

        lo = t if t > t_start else t_start
        if nxt > lo:
            k = np.searchsorted(sorted_masks, act)
            if k >= sorted_masks.shape[0] or sorted_masks[k] != act:
                clock[0] = t
                active[0] = act
                who_out[0] = -1
                return _INFEASIBLE
            occupancy[sorted_pos[k]] += nxt - lo
        dt = nxt - t
        for j in range(n):
            if not busy[j] and not (act & adj[j]):
                r = residual[j] - dt
                residual[j] = r if r > 0.0 else 0.0
        t = nxt
        if stop:
            clock[0] = t
            active[0] = act
            return _DONE

        bit = np.int64(1) << np.int64(who)
        if busy[who]:
            busy[who] = False
            act &= ~bit
            residual[who] = bo[who, bo_pos[who]]
            bo_pos[who] += 1
        else:
            if act & adj[who]:
                clock[0] = t
                active[0] = act
                who_out[0] = who
                return _INFEASIBLE
            busy[who] = True
            act |= bit
            residual[who] = 0.0
            tx_end[who] = t + tx[who, tx_pos[who]]
            tx_pos[who] += 1


def _replication(args):
    adj, states, backoff_specs, tx_specs, seed, rep, warmup, measure = args
    n = len(adj)
    gens = []
    for i in range(n):
        bo_ss, tx_ss = np.random.SeedSequence([seed, i, rep]).spawn(2)
        gens.append((np.random.default_rng(bo_ss), np.random.default_rng(tx_ss)))

    bo = np.empty((n, BLOCK))
    tx = np.empty((n, BLOCK))
    residual = np.empty(n)
    for i, (g_bo, g_tx) in enumerate(gens):
        bo[i] = backoff_specs[i].sample(g_bo, BLOCK)
        tx[i] = tx_specs[i].sample(g_tx, BLOCK)
        # random initial phase so deterministic laws do not start in lock-step
        residual[i] = g_bo.random() * bo[i, 0]
    bo_pos = np.ones(n, dtype=np.int64)
    tx_pos = np.zeros(n, dtype=np.int64)

    masks = np.asarray(states, dtype=np.int64)
    order = np.argsort(masks, kind="stable")
    sorted_masks = masks[order]
    sorted_pos = order.astype(np.int64)
    adj_arr = np.asarray(adj, dtype=np.int64)
    occupancy = np.zeros(len(states))
    clock = np.zeros(1)
    active = np.zeros(1, dtype=np.int64)
    busy = np.zeros(n, dtype=np.bool_)
    tx_end = np.zeros(n)
    who = np.zeros(1, dtype=np.int64)
    t_start, t_end = warmup, warmup + measure

    while True:
        status = _advance(adj_arr, sorted_masks, sorted_pos, t_end, t_start, clock, active, busy,
                          residual, tx_end, bo, bo_pos, tx, tx_pos, occupancy, who)
        if status == _DONE:
            break
        i = int(who[0])
        if status == _INFEASIBLE:
            raise RuntimeError(f"simulator entered infeasible state {int(active[0]):#x} (node index {i})")
        g_bo, g_tx = gens[i]
        if busy[i]:
            bo[i] = backoff_specs[i].sample(g_bo, BLOCK)
            bo_pos[i] = 0
        else:
            tx[i] = tx_specs[i].sample(g_tx, BLOCK)
            tx_pos[i] = 0
    return occupancy


def _half_width(samples: np.ndarray) -> np.ndarray:
    reps = samples.shape[0]
    if reps < 2:
        return np.full(samples.shape[1:], np.nan)
    q = stats.t.ppf(0.975, reps - 1)
    return q * samples.std(axis=0, ddof=1) / math.sqrt(reps)


def simulate(
    graph: ConflictGraph,
    nodes: Sequence[Node] | None = None,
    config: SimConfig | None = None,
    space: StateSpace | None = None,
) -> SimResult:
    """Simulate ``config.replications`` independent runs and average them.

    ``nodes`` defaults to the graph's nodes; passing a list re-parameterizes
    the same conflict structure.
    """
    config = config or SimConfig()
    nodes = list(graph.nodes if nodes is None else nodes)
    if [n.id for n in nodes] != graph.ids:
        raise ConfigError("nodes must match the graph's node ids and order")
    space = space or enumerate_states(graph, cap=config.state_cap)
    warmup, measure = config.windows(nodes)

    backoff_specs = [DistributionSpec(config.backoff_dist, n.backoff_mean) for n in nodes]
    tx_specs = [DistributionSpec(config.txtime_dist, n.effective_tx_time) for n in nodes]
    jobs = [
        (graph.adjacency, space.masks.astype(np.int64), backoff_specs, tx_specs, config.seed, rep, warmup, measure)
        for rep in range(config.replications)
    ]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(config.jobs, len(jobs))) as pool:
            occupancies = list(pool.map(_replication, jobs))
    else:
        occupancies = [_replication(job) for job in jobs]

    occ = np.array(occupancies)
    fractions = occ / measure
    partition_error = float(np.max(np.abs(occ.sum(axis=1) - measure)) / measure)
    rep_airtime = fractions @ space.membership()
    bitrate = np.array([n.bitrate for n in nodes])
    rep_throughput = rep_airtime * bitrate
    return SimResult(
        ids=tuple(n.id for n in nodes),
        states=space.states,
        airtime=rep_airtime.mean(axis=0),
        airtime_hw=_half_width(rep_airtime),
        throughput=rep_throughput.mean(axis=0),
        throughput_hw=_half_width(rep_throughput),
        state_fraction=fractions.mean(axis=0),
        state_fraction_hw=_half_width(fractions),
        rep_airtime=rep_airtime,
        rep_state_fraction=fractions,
        partition_error=partition_error,
        config=config,
    )


@dataclass(frozen=True)
class InsensitivityReport:
    """Airtimes under every (backoff law, transmission law) pair.

    ``discrepancy`` and ``ci_overlap`` summarize all pairs of laws;
    ``ref_discrepancy`` and ``ref_overlap`` compare each pair against the
    all-exponential run, which is what ``passed`` is judged on.
    """

    ids: tuple[str, ...]
    combos: tuple[tuple[str, str], ...]
    results: tuple[SimResult, ...]
    analytic_airtime: np.ndarray
    discrepancy: np.ndarray  # per node, (max - min) / reference airtime
    ci_overlap: np.ndarray  # per node, every pair of 95% intervals overlaps
    ref_discrepancy: np.ndarray  # combos x nodes, |a - a_ref| / a_ref
    ref_overlap: np.ndarray  # combos x nodes
    tolerance: float

    @property
    def passed(self) -> np.ndarray:
        """Per node: every law pair is within tolerance of, and overlaps, the reference."""
        return ((self.ref_discrepancy < self.tolerance) & self.ref_overlap).all(axis=0)

    @property
    def all_passed(self) -> bool:
        return bool(self.passed.all())

    def failures(self) -> list[tuple[tuple[str, str], str]]:
        bad = ~((self.ref_discrepancy < self.tolerance) & self.ref_overlap)
        return [(self.combos[c], self.ids[i]) for c, i in zip(*np.nonzero(bad))]


REFERENCE = ("exponential", "exponential")


def insensitivity_check(
    graph: ConflictGraph,
    nodes: Sequence[Node] | None = None,
    config: SimConfig | None = None,
    kinds: Sequence[str] = KINDS,
    tolerance: float = 0.02,
) -> InsensitivityReport:
    """Simulate every (backoff, transmission) law pair with the same means and
    compare per-node airtimes with the all-exponential run."""
    config = config or SimConfig()
    nodes = list(graph.nodes if nodes is None else nodes)
    combos = tuple(itertools.product(kinds, kinds))
    if REFERENCE not in combos:
        raise ConfigError("the law matrix must include the exponential reference")
    space = enumerate_states(graph, cap=config.state_cap)
    results = tuple(
        simulate(graph, nodes, replace(config, backoff_dist=b, txtime_dist=t), space=space)
        for b, t in combos
    )
    means = np.array([r.airtime for r in results])
    hw = np.array([r.airtime_hw for r in results])
    ref = combos.index(REFERENCE)
    # intervals on a line overlap pairwise iff the largest lower end is below the smallest upper end
    ci_overlap = (means - hw).max(axis=0) <= (means + hw).min(axis=0)
    ref_overlap = np.abs(means - means[ref]) <= hw + hw[ref]
    analytic = node_throughput(space, product_form(space, compute_theta(nodes)), nodes).airtime
    return InsensitivityReport(
        ids=tuple(n.id for n in nodes),
        combos=combos,
        results=results,
        analytic_airtime=analytic,
        discrepancy=(means.max(axis=0) - means.min(axis=0)) / means[ref],
        ci_overlap=ci_overlap,
        ref_discrepancy=np.abs(means - means[ref]) / means[ref],
        ref_overlap=ref_overlap,
        tolerance=tolerance,
    )
