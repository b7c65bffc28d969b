"""Decision procedures: weight-balanced, balanceable, C-regular, doubly stochastic(able)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cycles import MAX_COVER_N, ds_cycle_set, union_of_members
from .errors import CTooSmall, MethodSizeExceeded, NotDoublyStochasticable, ZeroRow
from .flow import flow_feasibility_oracle
from .graph import (
    Connectivity,
    WeightedDigraph,
    as_weight,
    classify_connectivity,
    degree_profile,
)

Matrix = list[list[Fraction]]


@dataclass(frozen=True)
class BalanceVerdict:
    is_weight_balanced: bool
    witness_imbalances: tuple[Fraction, ...] | None = None

    def __bool__(self) -> bool:
        return self.is_weight_balanced


def is_weight_balanced(g: WeightedDigraph) -> BalanceVerdict:
    omega = degree_profile(g).imbalance
    if all(w == 0 for w in omega):
        return BalanceVerdict(True)
    return BalanceVerdict(False, omega)


@dataclass(frozen=True)
class Balanceability:
    weight_balanceable: bool
    reason: str  # "strongly_semiconnected" or "edge_outside_cycle"
    witness_edge: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.weight_balanceable


def is_weight_balanceable(g: WeightedDigraph) -> Balanceability:
    """Balanceable iff every edge stays inside one strongly connected component."""
    report = classify_connectivity(g)
    owner = {v: k for k, comp in enumerate(report.components) for v in comp}
    for i, j in g.edges:
        if owner[i] != owner[j]:
            return Balanceability(False, "edge_outside_cycle", (i, j))
    return Balanceability(True, "strongly_semiconnected")


def _as_matrix(a: Sequence[Sequence]) -> Matrix:
    return [[as_weight(x) for x in row] for row in a]


def normalize_rows(a: Sequence[Sequence]) -> Matrix:
    """Divide every row by its sum."""
    m = _as_matrix(a)
    out = []
    for i, row in enumerate(m):
        s = sum(row)
        if s == 0:
            raise ZeroRow(f"row {i} sums to zero")
        out.append([x / s for x in row])
    return out


def is_doubly_stochastic(a: Sequence[Sequence]) -> bool:
    m = _as_matrix(a)
    n = len(m)
    if any(len(row) != n for row in m) or any(x < 0 for row in m for x in row):
        return False
    return all(sum(row) == 1 for row in m) and all(sum(m[i][j] for i in range(n)) == 1 for j in range(n))


@dataclass(frozen=True)
class CRegularityVerdict:
    is_c_regular: bool
    C: Fraction | None
    violating_vertices: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.is_c_regular


def is_c_regular(g: WeightedDigraph) -> CRegularityVerdict:
    """Weight-balanced with every weighted out-degree equal to one positive ``C``."""
    prof = degree_profile(g)
    counts = Counter(prof.out_weight)
    top = max(counts.values())
    modal = min(c for c, k in counts.items() if k == top)
    bad = tuple(
        v for v in range(g.n) if prof.imbalance[v] != 0 or prof.out_weight[v] != modal
    )
    if not bad and modal > 0:
        return CRegularityVerdict(True, modal)
    return CRegularityVerdict(False, None, bad or tuple(range(g.n)))


@dataclass(frozen=True)
class DSVerdict:
    doubly_stochasticable: bool
    reason: str
    certificate: WeightedDigraph | None = None
    component_constants: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.doubly_stochasticable


def _embed(blocks: list[tuple[tuple[int, ...], WeightedDigraph]], n: int, loops: bool) -> WeightedDigraph:
    weights = {}
    for comp, sub in blocks:
        for (i, j), w in sub.weights.items():
            weights[(comp[i], comp[j])] = w
    return WeightedDigraph(n, weights, loops)


def is_doubly_stochasticable(
    g: WeightedDigraph, method: str = "cycle_cover", max_n: int = MAX_COVER_N
) -> DSVerdict:
    """Decide doubly stochasticability component by component.

    ``cycle_cover`` searches spanning cycle unions exhaustively (per-component
    size capped at ``max_n``); ``flow`` runs the max-flow oracle with
    ``C = |E| - |V| + 1`` on every component.
    """
    if method not in ("cycle_cover", "flow"):
        raise ValueError(f"unknown method {method!r}")
    prof = degree_profile(g)
    if any(prof.out_degree[v] == 0 and prof.in_degree[v] == 0 for v in range(g.n)):
        return DSVerdict(False, "isolated_vertex")
    report = classify_connectivity(g)
    if report.kind is Connectivity.NEITHER:
        return DSVerdict(False, "not_strongly_semiconnected")
    if method == "cycle_cover" and max(len(c) for c in report.components) > max_n:
        raise MethodSizeExceeded(f"a component exceeds the cycle-cover cap {max_n}; use method='flow'")

    blocks = []
    constants = []
    for comp in report.components:
        sub = g.subgraph(comp).unit_weights()
        if method == "cycle_cover":
            try:
                cert = ds_cycle_set(sub, max_n)
            except NotDoublyStochasticable:
                return DSVerdict(False, "no_spanning_cycle_cover")
            k = cert.cardinality
            block = union_of_members(cert.members, [Fraction(1, k)] * k, sub.n, sub.allows_self_loops)
        else:
            k = sub.num_edges - sub.n + 1
            res = flow_feasibility_oracle(sub, k)
            if not res.feasible:
                return DSVerdict(False, "flow_infeasible")
            block = res.assignment.scaled(Fraction(1, k))
        blocks.append((comp, block))
        constants.append(k)
    cert_graph = _embed(blocks, g.n, g.allows_self_loops)
    return DSVerdict(True, "ok", cert_graph, tuple(constants))


def c_regular_assignment_from_cycles(g: WeightedDigraph, C: int, max_n: int = MAX_COVER_N) -> WeightedDigraph:
    """Integer C-regular weighting as a positive combination of a DS-cycle set.

    The ``C`` units are split as evenly as possible across members, with the
    remainder going to the lower-indexed members.
    """
    cert = ds_cycle_set(g, max_n)
    k = cert.cardinality
    if C < k:
        raise CTooSmall(f"C={C} is below the DS-character {k}")
    base, extra = divmod(C, k)
    lambdas = [base + (1 if t < extra else 0) for t in range(k)]
    return union_of_members(cert.members, lambdas, g.n, g.allows_self_loops)
