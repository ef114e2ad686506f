"""Centralized coded caching for two files with non-uniform popularity.

Placement splits each file over nested user-set chains, delivery aligns
interference with two layers of Cauchy codes, and the rate modules give
the exact achievable rate, the uncoded-placement converse and the optimal
memory split.
"""

from .combinatorics import binom, chain_count, enumerate_chains
from .converse import converse_at, converse_bound, range_probability
from .delivery import DeliveryMessage, decode, delivery_rate, encode_delivery
from .optimizer import baseline_grouping, baseline_uniform, optimal_allocation
from .placement import CacheMap, PlacementConfig, place
from .rates import expected_rate, pair_rates
from .scheme import share_plan

__version__ = "0.1.0"

__all__ = [
    "CacheMap",
    "DeliveryMessage",
    "PlacementConfig",
    "baseline_grouping",
    "baseline_uniform",
    "binom",
    "chain_count",
    "converse_at",
    "converse_bound",
    "decode",
    "delivery_rate",
    "encode_delivery",
    "enumerate_chains",
    "expected_rate",
    "optimal_allocation",
    "pair_rates",
    "place",
    "range_probability",
    "share_plan",
]
