"""Exact-weight digraphs: degrees, imbalances, mirrors, unions, connectivity."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import networkx as nx

Edge = tuple[int, int]


def as_weight(value) -> Fraction:
    """Convert ``value`` to an exact rational weight; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"weights must be exact (int, Fraction or 'p/q' string), got {value!r}")
    return Fraction(value)


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """A digraph on vertices ``0..n-1`` with one exact weight per edge.

    Immutable: every update returns a new instance. An edge may carry weight
    zero only as a transient protocol state.
    """

    n: int
    weights: Mapping[Edge, Fraction] = field(default_factory=dict)
    allows_self_loops: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("a digraph needs at least one vertex")
        clean: dict[Edge, Fraction] = {}
        for (i, j), w in self.weights.items():
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j and not self.allows_self_loops:
                raise ValueError(f"self-loop ({i}, {i}) requires allows_self_loops=True")
            w = as_weight(w)
            if w < 0:
                raise ValueError(f"negative weight {w} on edge ({i}, {j})")
            clean[(int(i), int(j))] = w
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Sequence],
        *,
        allows_self_loops: bool = False,
    ) -> WeightedDigraph:
        """Build from ``(i, j)`` pairs (unit weight) or ``(i, j, w)`` triples."""
        weights: dict[Edge, Fraction] = {}
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if (i, j) in weights:
                raise ValueError(f"duplicate edge ({i}, {j})")
            weights[(i, j)] = as_weight(e[2]) if len(e) > 2 else Fraction(1)
        return cls(n, weights, allows_self_loops)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence], *, allows_self_loops: bool | None = None) -> WeightedDigraph:
        """Support of ``matrix`` becomes the edge set; entries become weights."""
        n = len(matrix)
        weights = {}
        for i, row in enumerate(matrix):
            if len(row) != n:
                raise ValueError("matrix must be square")
            for j, x in enumerate(row):
                x = as_weight(x)
                if x != 0:
                    weights[(i, j)] = x
        if allows_self_loops is None:
            allows_self_loops = any(i == j for i, j in weights)
        return cls(n, weights, allows_self_loops)

    # -- structure -------------------------------------------------------

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(self.weights)

    @property
    def num_edges(self) -> int:
        return len(self.weights)

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.weights

    def weight(self, i: int, j: int) -> Fraction:
        return self.weights.get((i, j), Fraction(0))

    @cached_property
    def _out(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.weights:
            out[i].append(j)
        return tuple(tuple(sorted(x)) for x in out)

    @cached_property
    def _in(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.weights:
            inn[j].append(i)
        return tuple(tuple(sorted(x)) for x in inn)

    def out_neighbors(self, i: int) -> tuple[int, ...]:
        return self._out[i]

    def in_neighbors(self, i: int) -> tuple[int, ...]:
        return self._in[i]

    def matrix(self) -> list[list[Fraction]]:
        a = [[Fraction(0)] * self.n for _ in range(self.n)]
        for (i, j), w in self.weights.items():
            a[i][j] = w
        return a

    # -- derived graphs --------------------------------------------------

    def with_weights(self, updates: Mapping[Edge, object]) -> WeightedDigraph:
        """Return a copy with the weights of existing edges replaced."""
        new = dict(self.weights)
        for e, w in updates.items():
            if e not in new:
                raise KeyError(f"edge {e} is not in the digraph")
            new[e] = as_weight(w)
        return WeightedDigraph(self.n, new, self.allows_self_loops)

    def unit_weights(self) -> WeightedDigraph:
        return WeightedDigraph(self.n, {e: Fraction(1) for e in self.weights}, self.allows_self_loops)

    def scaled(self, factor) -> WeightedDigraph:
        f = as_weight(factor)
        return WeightedDigraph(self.n, {e: w * f for e, w in self.weights.items()}, self.allows_self_loops)

    def positive_part(self) -> WeightedDigraph:
        """Drop zero-weight edges."""
        return WeightedDigraph(
            self.n, {e: w for e, w in self.weights.items() if w != 0}, self.allows_self_loops
        )

    def subgraph(self, vertices: Sequence[int]) -> WeightedDigraph:
        """Induced subdigraph, relabelled ``0..len(vertices)-1`` in the given order."""
        index = {v: k for k, v in enumerate(vertices)}
        sub = {
            (index[i], index[j]): w
            for (i, j), w in self.weights.items()
            if i in index and j in index
        }
        return WeightedDigraph(len(vertices), sub, self.allows_self_loops)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.weights)
        return g

    # -- value semantics -------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.allows_self_loops == other.allows_self_loops
            and dict(self.weights) == dict(other.weights)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.allows_self_loops, frozenset(self.weights.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}->{j}:{w}" for (i, j), w in self.weights.items())
        return f"WeightedDigraph(n={self.n}, {{{body}}})"


@dataclass(frozen=True)
class DegreeProfile:
    out_weight: tuple[Fraction, ...]
    in_weight: tuple[Fraction, ...]
    imbalance: tuple[Fraction, ...]
    out_degree: tuple[int, ...]
    in_degree: tuple[int, ...]


def degree_profile(g: WeightedDigraph) -> DegreeProfile:
    """Weighted and unweighted degrees plus imbalance ``in - out`` per vertex."""
    out_w = [Fraction(0)] * g.n
    in_w = [Fraction(0)] * g.n
    out_d = [0] * g.n
    in_d = [0] * g.n
    for (i, j), w in g.weights.items():
        out_w[i] += w
        in_w[j] += w
        out_d[i] += 1
        in_d[j] += 1
    omega = tuple(in_w[v] - out_w[v] for v in range(g.n))
    return DegreeProfile(tuple(out_w), tuple(in_w), omega, tuple(out_d), tuple(in_d))


def imbalances(g: WeightedDigraph) -> tuple[Fraction, ...]:
    return degree_profile(g).imbalance


def mirror(g: WeightedDigraph) -> WeightedDigraph:
    """Add the reversal of every edge; new reversed edges get weight 1.

    The mirror is only a communication topology, so its weights carry no
    balance meaning.
    """
    weights = dict(g.weights)
    for i, j in g.weights:
        weights.setdefault((j, i), Fraction(1))
    return WeightedDigraph(g.n, weights, g.allows_self_loops)


def weighted_union(g1: WeightedDigraph, g2: WeightedDigraph) -> WeightedDigraph:
    """Union with weights added on shared edges.

    Vertex index spaces are shared; the result has ``max(n1, n2)`` vertices.
    """
    weights = dict(g1.weights)
    for e, w in g2.weights.items():
        weights[e] = weights.get(e, Fraction(0)) + w
    return WeightedDigraph(max(g1.n, g2.n), weights, g1.allows_self_loops or g2.allows_self_loops)


class Connectivity(str, Enum):
    STRONGLY_CONNECTED = "strongly_connected"
    STRONGLY_SEMICONNECTED = "strongly_semiconnected"
    NEITHER = "neither"


@dataclass(frozen=True)
class ConnectivityReport:
    kind: Connectivity
    components: tuple[tuple[int, ...], ...]

    @property
    def weight_balanceable(self) -> bool:
        return self.kind is not Connectivity.NEITHER


def strongly_connected_components(g: WeightedDigraph) -> tuple[tuple[int, ...], ...]:
    """SCCs as sorted vertex tuples, ordered by smallest member."""
    comps = (tuple(sorted(c)) for c in nx.strongly_connected_components(g.to_networkx()))
    return tuple(sorted(comps))


def classify_connectivity(g: WeightedDigraph) -> ConnectivityReport:
    comps = strongly_connected_components(g)
    if len(comps) == 1:
        return ConnectivityReport(Connectivity.STRONGLY_CONNECTED, comps)
    owner = {v: k for k, c in enumerate(comps) for v in c}
    if all(owner[i] == owner[j] for i, j in g.weights):
        return ConnectivityReport(Connectivity.STRONGLY_SEMICONNECTED, comps)
    return ConnectivityReport(Connectivity.NEITHER, comps)


def is_strongly_connected(g: WeightedDigraph) -> bool:
    return classify_connectivity(g).kind is Connectivity.STRONGLY_CONNECTED
