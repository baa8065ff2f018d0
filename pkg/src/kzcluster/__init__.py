"""Graph (k,z)-clustering via scored 1-swap local search, with the dynamic
nearest-center data structure it needs and LSH spanners for point sets."""

from .cover import IsolationCover, build_cover
from .graph import (DistArray, Graph, load_graph, multi_source_dijkstra,
                    read_edge_list, write_edge_list)
from .oracle import (brute_force_opt, check_state_consistency, exact_cost,
                     is_super_effective_noncenter, potential, swap_distoid_cost)
from .preprocess import coarse_solution, normalize_weights
from .search import (RunStats, Solution, SwapCandidate, alpha_z, compute_s,
                     run_local_search, test_effectiveness)
from .spanner import (JaccardDataset, LpDataset, MinHashJaccardFamily,
                      PStableLshFamily, SpannerParams, build_lsh_spanner,
                      spanner_params)
from .state import ClusterState, StateParams, initialize, make_state

__all__ = [
    "IsolationCover", "build_cover",
    "DistArray", "Graph", "load_graph", "multi_source_dijkstra",
    "read_edge_list", "write_edge_list",
    "brute_force_opt", "check_state_consistency", "exact_cost",
    "is_super_effective_noncenter", "potential", "swap_distoid_cost",
    "coarse_solution", "normalize_weights",
    "RunStats", "Solution", "SwapCandidate", "alpha_z", "compute_s",
    "run_local_search", "test_effectiveness",
    "JaccardDataset", "LpDataset", "MinHashJaccardFamily", "PStableLshFamily",
    "SpannerParams", "build_lsh_spanner", "spanner_params",
    "ClusterState", "StateParams", "initialize", "make_state",
]
