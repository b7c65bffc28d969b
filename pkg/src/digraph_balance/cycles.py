"""Cycles, vertex-disjoint cycle unions, minimum cycle covers and Birkhoff decomposition.

Everything here is exhaustive and meant for small graphs; hard size caps
keep the searches bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import networkx as nx
from scipy.optimize import linprog

from .errors import (
    GraphTooLarge,
    NotDoublyStochastic,
    NotDoublyStochasticable,
    NotSemiconnected,
    NotStronglyConnected,
)
from .graph import Connectivity, WeightedDigraph, as_weight, classify_connectivity

Cycle = tuple[int, ...]

MAX_ENUMERATION_N = 12
MAX_COVER_N = 10


def canonical_cycle(cycle: Sequence[int]) -> Cycle:
    """Rotate so the smallest vertex comes first."""
    k = min(range(len(cycle)), key=lambda t: cycle[t])
    return tuple(cycle[k:]) + tuple(cycle[:k])


def cycle_edges(cycle: Cycle) -> tuple[tuple[int, int], ...]:
    return tuple((cycle[k], cycle[(k + 1) % len(cycle)]) for k in range(len(cycle)))


@dataclass(frozen=True, order=True)
class DisjointCycleUnion:
    """An element of the set of cycle unions of a digraph.

    ``cycles`` are canonical and pairwise vertex-disjoint. ``isolated`` lists
    vertices that belong to the element without any edge (used for isolated
    vertices of the host graph).
    """

    cycles: tuple[Cycle, ...]
    n: int
    isolated: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        seen: set[int] = set(self.isolated)
        for c in self.cycles:
            if seen.intersection(c):
                raise ValueError("cycles in a union must be vertex-disjoint")
            seen.update(c)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for c in self.cycles for v in c) | frozenset(self.isolated)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(e for c in self.cycles for e in cycle_edges(c))

    @property
    def spanning(self) -> bool:
        return len(self.vertices) == self.n

    def successor(self) -> dict[int, int]:
        return dict(self.edges)


@dataclass(frozen=True)
class CycleSetCertificate:
    kind: str  # "principal" or "ds"
    members: tuple[DisjointCycleUnion, ...]

    @property
    def cardinality(self) -> int:
        return len(self.members)

    def edge_multiplicity(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for m in self.members:
            for e in m.edges:
                counts[e] = counts.get(e, 0) + 1
        return counts


def _check_size(g: WeightedDigraph, cap: int) -> None:
    if g.n > cap:
        raise GraphTooLarge(f"n={g.n} exceeds the exhaustive-search cap {cap}")


def enumerate_cycles(g: WeightedDigraph, max_n: int = MAX_ENUMERATION_N) -> list[Cycle]:
    """All elementary cycles, each once, rotated to start at its smallest vertex."""
    _check_size(g, max_n)
    cycles = {canonical_cycle(c) for c in nx.simple_cycles(g.to_networkx())}
    return sorted(cycles)


def _spanning_permutations(g: WeightedDigraph) -> list[tuple[int, ...]]:
    """Permutations ``sigma`` with ``(i, sigma[i])`` an edge for every ``i``."""
    n = g.n
    out = [g.out_neighbors(i) for i in range(n)]
    found: list[tuple[int, ...]] = []
    sigma = [0] * n
    used = [False] * n

    def extend(i: int) -> None:
        if i == n:
            found.append(tuple(sigma))
            return
        for j in out[i]:
            if not used[j]:
                used[j] = True
                sigma[i] = j
                extend(i + 1)
                used[j] = False

    extend(0)
    return found


def permutation_to_union(sigma: Sequence[int]) -> DisjointCycleUnion:
    """Cycle decomposition of a permutation; fixed points become self-loops."""
    n = len(sigma)
    seen = [False] * n
    cycles = []
    for start in range(n):
        if seen[start]:
            continue
        c = []
        v = start
        while not seen[v]:
            seen[v] = True
            c.append(v)
            v = sigma[v]
        cycles.append(canonical_cycle(c))
    return DisjointCycleUnion(tuple(sorted(cycles)), n)


def enumerate_disjoint_cycle_unions(
    g: WeightedDigraph, spanning_only: bool = False, max_n: int = MAX_ENUMERATION_N
) -> list[DisjointCycleUnion]:
    """Every nonempty union of vertex-disjoint cycles of ``g``, sorted canonically."""
    _check_size(g, max_n)
    if spanning_only:
        return sorted(permutation_to_union(s) for s in _spanning_permutations(g))

    cycles = enumerate_cycles(g, max_n)
    masks = [sum(1 << v for v in c) for c in cycles]
    unions: list[DisjointCycleUnion] = []

    def extend(start: int, used: int, chosen: list[Cycle]) -> None:
        for k in range(start, len(cycles)):
            if masks[k] & used:
                continue
            chosen.append(cycles[k])
            unions.append(DisjointCycleUnion(tuple(sorted(chosen)), g.n))
            extend(k + 1, used | masks[k], chosen)
            chosen.pop()

    extend(0, 0, [])
    return sorted(unions)


def _maximal_unions(g: WeightedDigraph) -> list[DisjointCycleUnion]:
    cycles = enumerate_cycles(g)
    cmasks = [sum(1 << v for v in c) for c in cycles]
    result = []
    for u in enumerate_disjoint_cycle_unions(g):
        free = ~sum(1 << v for v in u.vertices)
        if not any(m & free == m for m in cmasks):
            result.append(u)
    return result


class _CoverSearch:
    """Exact minimum cover of the edge set by candidate edge sets.

    Feasibility of "at most r members" is decided by an exhaustive search that
    assigns every uncovered edge to one of r slots; a slot stays open while
    some candidate contains all of its edges.  The most constrained edge is
    branched on first and new slots are only ever appended, so slot
    permutations are never revisited.  Two lower bounds prune the search:
    a greedy clique of edges no candidate covers together, and the value of
    the covering linear program, certified exactly from its dual.
    """

    def __init__(self, g: WeightedDigraph, candidates: Sequence[DisjointCycleUnion]):
        self.edge_index = {e: k for k, e in enumerate(g.edges)}
        self.universe = (1 << len(self.edge_index)) - 1
        self.masks = [sum(1 << self.edge_index[e] for e in c.edges) for c in candidates]
        self.everyone = (1 << len(self.masks)) - 1
        self.groups: list[int] = []
        for v in range(g.n):
            self.groups.append(sum(1 << self.edge_index[(v, j)] for j in g.out_neighbors(v)))
            self.groups.append(sum(1 << self.edge_index[(i, v)] for i in g.in_neighbors(v)))
        # per edge: bitset of candidates containing it, and edges it can share a member with
        self.holders = [0] * len(self.edge_index)
        self.compatible = [1 << b for b in range(len(self.edge_index))]
        for k, m in enumerate(self.masks):
            for b in _bits(m):
                self.holders[b] |= 1 << k
                self.compatible[b] |= m

    def clique_bound(self, uncovered: int) -> int:
        best = 0
        for gm in self.groups:
            clique = uncovered & gm
            if not clique:
                continue
            size = clique.bit_count()
            open_ = uncovered & ~clique
            for b in _bits(clique):
                open_ &= ~self.compatible[b]
            while open_:
                open_ &= ~self.compatible[(open_ & -open_).bit_length() - 1]
                size += 1
            best = max(best, size)
        return best

    def lp_bound(self, uncovered: int, allowed: int) -> int:
        rows = list(_bits(uncovered))
        cols = [k for k in _bits(allowed) if self.masks[k] & uncovered]
        if not rows or not cols:
            return 0
        pos = {b: r for r, b in enumerate(rows)}
        a_ub = [[0.0] * len(cols) for _ in rows]
        for c, k in enumerate(cols):
            for b in _bits(self.masks[k] & uncovered):
                a_ub[pos[b]][c] = -1.0
        res = linprog([1.0] * len(cols), A_ub=a_ub, b_ub=[-1.0] * len(rows), bounds=(0, None), method="highs")
        if res.status != 0:
            return 0
        # any nonnegative edge pricing whose members all cost at most 1 bounds the cover size
        y = [max(Fraction(-d).limit_denominator(10**6), Fraction(0)) for d in res.ineqlin.marginals]
        worst = max(sum(y[pos[b]] for b in _bits(self.masks[k] & uncovered)) for k in cols)
        if worst <= 0:
            return 0
        return math.ceil(sum(y) / worst)

    def feasible(self, uncovered: int, r: int, allowed: int) -> bool:
        """Can at most ``r`` allowed candidates cover ``uncovered``?"""
        if uncovered == 0:
            return True
        if r <= 0:
            return False
        options = {b: self.holders[b] & allowed for b in _bits(uncovered)}
        if not all(options.values()):
            return False
        if self.clique_bound(uncovered) > r or self.lp_bound(uncovered, allowed) > r:
            return False
        slots: list[int] = []
        pending = set(options)

        def assign() -> bool:
            if not pending:
                return True
            pick, fits, room, rank = -1, [], False, None
            for b in pending:
                fit = [s for s, live in enumerate(slots) if live & options[b]]
                spare = len(slots) < r
                key = (len(fit) + spare, options[b].bit_count(), b)
                if key[0] == 0:
                    return False
                if rank is None or key < rank:
                    pick, fits, room, rank = b, fit, spare, key
            pending.discard(pick)
            for s in fits:
                live = slots[s]
                slots[s] = live & options[pick]
                ok = assign()
                slots[s] = live
                if ok:
                    pending.add(pick)
                    return True
            if room:
                slots.append(options[pick])
                ok = assign()
                slots.pop()
                if ok:
                    pending.add(pick)
                    return True
            pending.add(pick)
            return False

        return assign()

    def solve(self) -> list[int] | None:
        """Lexicographically smallest minimum cover, as candidate indices."""
        if self.universe == 0:
            return []
        if any(h == 0 for h in self.holders):
            return None
        k = max(1, self.clique_bound(self.universe), self.lp_bound(self.universe, self.everyone))
        while not self.feasible(self.universe, k, self.everyone):
            k += 1
        chosen: list[int] = []
        uncovered = self.universe
        for slot in range(k):
            left = k - slot - 1
            start = chosen[-1] + 1 if chosen else 0
            for c in range(start, len(self.masks)):
                if self.masks[c] & uncovered == 0:
                    continue
                rest = uncovered & ~self.masks[c]
                if self.feasible(rest, left, self.everyone & ~((1 << (c + 1)) - 1)):
                    chosen.append(c)
                    uncovered = rest
                    break
            if uncovered == 0:
                break
        return chosen


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _isolated_vertices(g: WeightedDigraph) -> list[int]:
    return [v for v in range(g.n) if not g.out_neighbors(v) and not g.in_neighbors(v)]


def principal_cycle_set(g: WeightedDigraph, max_n: int = MAX_COVER_N) -> CycleSetCertificate:
    """A minimum-cardinality family of cycle unions whose union is ``g``.

    Candidate members are the inclusion-maximal cycle unions; every isolated
    vertex of ``g`` contributes one isolated-vertex member.
    """
    _check_size(g, max_n)
    if classify_connectivity(g).kind is Connectivity.NEITHER:
        raise NotSemiconnected("principal cycle sets exist only for strongly semiconnected digraphs")
    cands = _maximal_unions(g)
    picked = _CoverSearch(g, cands).solve()
    assert picked is not None  # every edge of a semiconnected digraph lies on a cycle
    members = [cands[k] for k in picked]
    members += [DisjointCycleUnion((), g.n, (v,)) for v in _isolated_vertices(g)]
    return CycleSetCertificate("principal", tuple(members))


def ds_cycle_set(g: WeightedDigraph, max_n: int = MAX_COVER_N) -> CycleSetCertificate:
    """A DS-cycle set: minimum family of spanning cycle unions generating ``g``.

    Raises NotDoublyStochasticable when the spanning unions miss some edge.
    """
    _check_size(g, max_n)
    if classify_connectivity(g).kind is not Connectivity.STRONGLY_CONNECTED:
        raise NotStronglyConnected("ds_cycle_set requires a strongly connected digraph")
    cands = enumerate_disjoint_cycle_unions(g, spanning_only=True)
    if not cands:
        raise NotDoublyStochasticable("no spanning union of disjoint cycles exists")
    picked = _CoverSearch(g, cands).solve()
    if picked is None:
        raise NotDoublyStochasticable("some edge lies on no spanning union of disjoint cycles")
    return CycleSetCertificate("ds", tuple(cands[k] for k in picked))


def extended_adjacency(u: DisjointCycleUnion, n: int) -> list[list[Fraction]]:
    a = [[Fraction(0)] * n for _ in range(n)]
    for i, j in u.edges:
        a[i][j] = Fraction(1)
    return a


def is_permutation_matrix(a: Sequence[Sequence]) -> bool:
    n = len(a)
    if any(x not in (0, 1) for row in a for x in row):
        return False
    return all(sum(row) == 1 for row in a) and all(sum(a[i][j] for i in range(n)) == 1 for j in range(n))


@dataclass(frozen=True)
class BirkhoffTerm:
    coefficient: Fraction
    permutation: tuple[int, ...]  # row i has its 1 in column permutation[i]

    def matrix(self) -> list[list[Fraction]]:
        n = len(self.permutation)
        return [[Fraction(int(self.permutation[i] == j)) for j in range(n)] for i in range(n)]

    def as_union(self) -> DisjointCycleUnion:
        return permutation_to_union(self.permutation)


def _exact_matrix(a: Sequence[Sequence]) -> list[list[Fraction]]:
    return [[as_weight(x) for x in row] for row in a]


def birkhoff_decompose(a: Sequence[Sequence]) -> list[BirkhoffTerm]:
    """Greedy Birkhoff-von Neumann decomposition in exact arithmetic.

    Each round finds a perfect matching on the positive support, takes the
    smallest matched entry as coefficient and subtracts. The remainder always
    lies in a proper face of the previous one, which bounds the number of
    terms by ``(n-1)**2 + 1``.
    """
    m = _exact_matrix(a)
    n = len(m)
    if any(len(row) != n for row in m):
        raise NotDoublyStochastic("matrix must be square")
    if any(x < 0 for row in m for x in row):
        raise NotDoublyStochastic("negative entry")
    if any(sum(row) != 1 for row in m) or any(sum(m[i][j] for i in range(n)) != 1 for j in range(n)):
        raise NotDoublyStochastic("row or column sum differs from 1")

    terms: list[BirkhoffTerm] = []
    remaining = Fraction(1)
    while remaining > 0:
        # integer nodes (row i, column n + j) keep the matching independent of hash seeding
        b = nx.Graph()
        rows = list(range(n))
        b.add_nodes_from(range(2 * n))
        b.add_edges_from((i, n + j) for i in range(n) for j in range(n) if m[i][j] > 0)
        matching = nx.bipartite.hopcroft_karp_matching(b, top_nodes=rows)
        sigma = tuple(matching[i] - n for i in range(n))
        coef = min(m[i][sigma[i]] for i in range(n))
        for i in range(n):
            m[i][sigma[i]] -= coef
        remaining -= coef
        terms.append(BirkhoffTerm(coef, sigma))
    return terms


def has_spanning_cycle(g: WeightedDigraph, max_n: int = MAX_ENUMERATION_N) -> bool:
    """Whether a single elementary cycle visits every vertex (bitmask DP)."""
    _check_size(g, max_n)
    n = g.n
    if n == 1:
        return g.has_edge(0, 0)
    full = (1 << n) - 1
    # reach[mask] = set of end vertices of simple paths from 0 covering exactly mask
    reach = [0] * (1 << n)
    reach[1] = 1
    for mask in range(1, full + 1):
        ends = reach[mask]
        if not ends or not mask & 1:
            continue
        v = 0
        e = ends
        while e:
            if e & 1:
                for w in g.out_neighbors(v):
                    if not mask >> w & 1:
                        reach[mask | 1 << w] |= 1 << w
            e >>= 1
            v += 1
    ends = reach[full]
    return any(ends >> v & 1 and g.has_edge(v, 0) for v in range(1, n))


def balance_via_cycle_union(g: WeightedDigraph, max_n: int = MAX_COVER_N) -> WeightedDigraph:
    """Weight each edge by how many principal-cycle-set members contain it."""
    cert = principal_cycle_set(g, max_n)
    counts = cert.edge_multiplicity()
    return WeightedDigraph(g.n, {e: Fraction(counts[e]) for e in g.edges}, g.allows_self_loops)


def union_of_members(members: Sequence[DisjointCycleUnion], coefficients: Sequence, n: int,
                     allows_self_loops: bool = False) -> WeightedDigraph:
    """Weighted sum of extended adjacency matrices."""
    weights: dict[tuple[int, int], Fraction] = {}
    for m, lam in zip(members, coefficients):
        lam = as_weight(lam)
        for e in m.edges:
            weights[e] = weights.get(e, Fraction(0)) + lam
    return WeightedDigraph(n, weights, allows_self_loops)
