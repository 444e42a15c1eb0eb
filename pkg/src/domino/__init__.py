"""Minimum PMU placement as a dominating-set QUBO, with classical and simulated quantum solvers."""

__version__ = "0.1.0"

from .graph import Graph, exact_domination_number, is_dominating, load_case, parse_edge_list, read_edge_list
from .reform import PenaltyConfig, SlackMode, build_bqm, reform_stats, to_ising
from .sa import SaParams, brute_force_ground, simulated_anneal
from .chimera import build_chimera, clique_bound, find_embedding, verify_embedding

__all__ = [
    "__version__",
    "Graph",
    "exact_domination_number",
    "is_dominating",
    "load_case",
    "parse_edge_list",
    "read_edge_list",
    "PenaltyConfig",
    "SlackMode",
    "build_bqm",
    "reform_stats",
    "to_ising",
    "SaParams",
    "brute_force_ground",
    "simulated_anneal",
    "build_chimera",
    "clique_bound",
    "find_embedding",
    "verify_embedding",
]
