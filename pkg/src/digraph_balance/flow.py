"""Centralized C-regularity feasibility via max flow with unit lower bounds.

Each vertex ``v_i`` is split into a row copy ``u_i`` and a column copy
``w_i``. An edge ``(v_i, v_j)`` becomes an arc ``u_i -> w_j`` whose flow is
the edge weight, bounded in ``[1, C]``. Shifting the lower bound away
(``flow' = weight - 1``) leaves an ordinary max-flow problem:

    s -> u_i   capacity C - d_out(v_i)
    u_i -> w_j capacity C - 1
    w_j -> t   capacity C - d_in(v_j)

The digraph admits a C-regular weighting iff every source arc saturates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from .errors import CTooSmallForDegrees
from .graph import WeightedDigraph, degree_profile

SOURCE = "s"
TARGET = "t"


def row_node(i: int) -> tuple[str, int]:
    return ("u", i)


def col_node(j: int) -> tuple[str, int]:
    return ("w", j)


@dataclass
class FlowNetwork:
    C: int
    capacity: dict[tuple, int]
    flow: dict[tuple, int] = field(default_factory=dict)

    @property
    def required_value(self) -> int:
        return sum(c for (a, _), c in self.capacity.items() if a == SOURCE)

    def conserves(self) -> bool:
        """Flow conservation at every internal node and capacity feasibility."""
        balance: dict[object, int] = {}
        for (a, b), f in self.flow.items():
            if f < 0 or f > self.capacity[(a, b)]:
                return False
            balance[a] = balance.get(a, 0) - f
            balance[b] = balance.get(b, 0) + f
        return all(v == 0 for k, v in balance.items() if k not in (SOURCE, TARGET))


def check_degree_bound(g: WeightedDigraph, C: int) -> None:
    prof = degree_profile(g)
    need = max(max(prof.out_degree), max(prof.in_degree))
    if C < 1 or C < need:
        raise CTooSmallForDegrees(f"C={C} is below the maximum degree {need}")


def build_flow_network(g: WeightedDigraph, C: int) -> FlowNetwork:
    check_degree_bound(g, C)
    prof = degree_profile(g)
    cap: dict[tuple, int] = {}
    for i in range(g.n):
        cap[(SOURCE, row_node(i))] = C - prof.out_degree[i]
        cap[(col_node(i), TARGET)] = C - prof.in_degree[i]
    for i, j in g.edges:
        cap[(row_node(i), col_node(j))] = C - 1
    return FlowNetwork(C, cap)


def solve(network: FlowNetwork) -> int:
    h = nx.DiGraph()
    for (a, b), c in network.capacity.items():
        h.add_edge(a, b, capacity=c)
    value, flow = nx.maximum_flow(h, SOURCE, TARGET, flow_func=edmonds_karp)
    network.flow = {(a, b): flow[a][b] for (a, b) in network.capacity}
    return value


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    C: int
    flow_value: int
    required_value: int
    assignment: WeightedDigraph | None = None


def flow_feasibility_oracle(g: WeightedDigraph, C: int) -> FeasibilityResult:
    """Decide whether ``g`` admits a C-regular weighting; return one if so."""
    network = build_flow_network(g, C)
    value = solve(network)
    required = network.required_value
    if value != required:
        return FeasibilityResult(False, C, value, required)
    weights = {
        (i, j): Fraction(network.flow[(row_node(i), col_node(j))] + 1) for i, j in g.edges
    }
    return FeasibilityResult(True, C, value, required, WeightedDigraph(g.n, weights, g.allows_self_loops))
