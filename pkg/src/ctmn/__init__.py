"""Product-form throughput analysis and simulation of CSMA/CA networks."""

__version__ = "0.1.0"

from .core import (
    StationaryDistribution,
    balance_solve,
    check_detailed_balance,
    compute_theta,
    product_form,
)
from .errors import ConfigError, NumericalError, ParameterRangeError, StateExplosionError
from .statespace import StateSpace, enumerate_states, transition_rate
from .throughput import ThroughputReport, node_throughput
from .topology import ConflictGraph, Node, build_from_channels, build_from_geometry, build_from_pairs

__all__ = [
    "ConfigError",
    "ConflictGraph",
    "Node",
    "NumericalError",
    "ParameterRangeError",
    "StateExplosionError",
    "StateSpace",
    "StationaryDistribution",
    "ThroughputReport",
    "balance_solve",
    "build_from_channels",
    "build_from_geometry",
    "build_from_pairs",
    "check_detailed_balance",
    "compute_theta",
    "enumerate_states",
    "node_throughput",
    "product_form",
    "transition_rate",
]
