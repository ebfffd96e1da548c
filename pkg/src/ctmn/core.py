"""Stationary distribution of the CSMA/CA Markov network.

Two independent routes are provided: the closed product form (weights
``prod_{i in s} theta_i`` normalized over the feasible states) and a direct
global-balance solve of the generator matrix, used as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, NumericalError, ParameterRangeError
from .statespace import StateSpace, transition_rate
from .topology import Node

ORACLE_CAP = 4096
ORACLE_TOL = 1e-10
BALANCE_TOL = 1e-12

_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    phi: float

    @property
    def empty_prob(self) -> float:
        return float(self.pi[0])


def compute_theta(nodes: Sequence[Node]) -> np.ndarray:
    """Per-node ratio of attempt rate to effective completion rate.

    ``theta_i = E[T_i] / (c_i * E[B_i])`` where ``c_i`` is the bonded width.
    """
    theta = np.array([n.attempt_rate / n.service_rate for n in nodes], dtype=float)
    if not np.all(np.isfinite(theta) & (theta > 0)):
        raise ParameterRangeError("theta must be finite and positive for every node")
    return theta


def _check_theta(space: StateSpace, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (space.n_nodes,):
        raise ConfigError(f"theta has shape {theta.shape}, expected ({space.n_nodes},)")
    if not np.all(np.isfinite(theta) & (theta > 0)):
        raise ParameterRangeError("theta must be finite and positive for every node")
    return theta


def product_form(space: StateSpace, theta) -> StationaryDistribution:
    """Normalized product-form distribution over ``space``.

    Weights are formed in the log domain and rescaled by the heaviest state
    before exponentiating, so extreme theta values do not overflow.
    """
    theta = _check_theta(space, theta)
    log_w = space.membership().astype(float) @ np.log(theta)
    top = log_w.max()
    w = np.exp(log_w - top)
    total = w.sum()
    log_phi = top + math.log(total)
    if log_phi > _LOG_MAX:
        raise ParameterRangeError(
            f"normalization constant overflows (log phi = {log_phi:.1f}); parameter range unsupported"
        )
    return StationaryDistribution(pi=w / total, phi=math.exp(log_phi))


def generator_matrix(space: StateSpace, nodes: Sequence[Node]) -> np.ndarray:
    """Dense generator Q; off-diagonal entries come from :func:`transition_rate`."""
    size = len(space)
    q = np.zeros((size, size))
    for k, neighbors in enumerate(space.adjacency):
        s = space.states[k]
        for other, _, _ in neighbors:
            q[k, other] = transition_rate(space, s, space.states[other], nodes)
    q[np.diag_indices(size)] = -q.sum(axis=1)
    return q


def balance_solve(
    space: StateSpace, nodes: Sequence[Node], cap: int = ORACLE_CAP, tol: float = ORACLE_TOL
) -> StationaryDistribution:
    """Solve ``pi Q = 0`` with ``sum(pi) = 1`` by a dense linear solve.

    The last balance equation is replaced by the normalization row.
    """
    size = len(space)
    if size > cap:
        raise ConfigError(f"{size} states exceeds the balance-solve cap of {cap}")
    q = generator_matrix(space, nodes)
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"generator system is singular: {exc}") from exc
    if not np.all(np.isfinite(pi)):
        raise NumericalError("balance solve produced non-finite probabilities")
    scale = np.abs(q).max() or 1.0
    residual = np.abs(pi @ q).max() / scale
    if residual > tol or pi.min() < -tol:
        raise NumericalError(f"balance solve residual {residual:.3e} exceeds tolerance {tol:.1e}")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    return StationaryDistribution(pi=pi, phi=1.0 / pi[0])


def check_detailed_balance(space: StateSpace, theta, dist: StationaryDistribution) -> float:
    """Largest relative violation of ``pi_s * lambda_i = pi_{s+i} * mu_i``.

    Only the ratio ``lambda_i / mu_i = theta_i`` matters, so the flows are
    compared with ``mu_i = 1``.
    """
    theta = _check_theta(space, theta)
    pi = dist.pi
    if len(space.up_from) == 0:
        return 0.0
    forward = pi[space.up_from] * theta[space.up_node]
    backward = pi[space.up_to]
    gap = np.abs(forward - backward)
    if np.any((forward == 0.0) & (gap > 0.0)):
        return math.inf
    with np.errstate(invalid="ignore"):
        ratio = np.where(forward > 0.0, gap / np.where(forward > 0.0, forward, 1.0), 0.0)
    return float(ratio.max())
