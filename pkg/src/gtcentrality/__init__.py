"""Game-theoretic centrality for weighted networks.

Coalitional values (Shapley, Banzhaf, Owen, Banzhaf-Owen) of connectivity
games defined on node- and edge-weighted networks, computed exactly on
small networks and estimated by sampling on larger ones.
"""

from .errors import CapacityError, ValidationError
from .exact import (
    Partition,
    exact_banzhaf,
    exact_banzhaf_owen,
    exact_owen,
    exact_shapley,
    load_partition,
    parse_partition,
)
from .games import Game, GameKind, contribution_range_bound
from .network import WeightedNetwork, components, load_network, parse_network
from .reporting import compare_rankings, lorenz, rank, summarize
from .sampling import (
    AllocationEstimate,
    ErrorBudget,
    EstimatorConfig,
    Method,
    banzhaf_error_bound,
    banzhaf_sample_size,
    bzo_variance_prediction,
    estimate,
    replicate,
)

__all__ = [
    "AllocationEstimate",
    "CapacityError",
    "ErrorBudget",
    "EstimatorConfig",
    "Game",
    "GameKind",
    "Method",
    "Partition",
    "ValidationError",
    "WeightedNetwork",
    "banzhaf_error_bound",
    "banzhaf_sample_size",
    "bzo_variance_prediction",
    "compare_rankings",
    "components",
    "contribution_range_bound",
    "estimate",
    "exact_banzhaf",
    "exact_banzhaf_owen",
    "exact_owen",
    "exact_shapley",
    "load_network",
    "load_partition",
    "lorenz",
    "parse_network",
    "parse_partition",
    "rank",
    "replicate",
    "summarize",
]
