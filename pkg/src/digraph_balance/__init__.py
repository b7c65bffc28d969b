"""Weight-balanced and doubly stochastic weightings of digraphs, in exact arithmetic."""

from __future__ import annotations

from .balance import benchmark_rounds, lyapunov, run_wbda, run_wbmda, wbda_step, wbmda_step
from .characterize import (
    c_regular_assignment_from_cycles,
    is_c_regular,
    is_doubly_stochastic,
    is_doubly_stochasticable,
    is_weight_balanceable,
    is_weight_balanced,
    normalize_rows,
)
from .cycles import birkhoff_decompose, ds_cycle_set, enumerate_cycles, principal_cycle_set
from .flow import flow_feasibility_oracle
from .graph import WeightedDigraph, classify_connectivity, degree_profile, mirror, weighted_union
from .io import parse_graph, serialize_graph, serialize_trace
from .stochastic import cregular_init, cregular_step, dsify_with_self_loops, run_cregular

__version__ = "0.1.0"

__all__ = [
    "WeightedDigraph",
    "benchmark_rounds",
    "birkhoff_decompose",
    "c_regular_assignment_from_cycles",
    "classify_connectivity",
    "cregular_init",
    "cregular_step",
    "degree_profile",
    "ds_cycle_set",
    "dsify_with_self_loops",
    "enumerate_cycles",
    "flow_feasibility_oracle",
    "is_c_regular",
    "is_doubly_stochastic",
    "is_doubly_stochasticable",
    "is_weight_balanceable",
    "is_weight_balanced",
    "lyapunov",
    "mirror",
    "normalize_rows",
    "parse_graph",
    "principal_cycle_set",
    "run_cregular",
    "run_wbda",
    "run_wbmda",
    "serialize_graph",
    "serialize_trace",
    "wbda_step",
    "wbmda_step",
    "weighted_union",
]
