from __future__ import annotations

from fractions import Fraction
from itertools import combinations
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings

from digraph_balance.characterize import is_weight_balanced
from digraph_balance.cycles import (
    DisjointCycleUnion,
    balance_via_cycle_union,
    birkhoff_decompose,
    canonical_cycle,
    ds_cycle_set,
    enumerate_cycles,
    enumerate_disjoint_cycle_unions,
    extended_adjacency,
    has_spanning_cycle,
    is_permutation_matrix,
    permutation_to_union,
    principal_cycle_set,
)
from digraph_balance.errors import (
    GraphTooLarge,
    NotDoublyStochastic,
    NotDoublyStochasticable,
    NotSemiconnected,
    NotStronglyConnected,
)
from digraph_balance.fixtures import load_graph
from digraph_balance.graph import WeightedDigraph, classify_connectivity, Connectivity
from oracles import (
    cycles_oracle,
    disjoint_unions_oracle,
    ds_character_oracle,
    hamiltonian_oracle,
    permutation_matrix,
    principal_size_oracle,
    spanning_unions_oracle,
)
from strategies import convex_permutation_mixes, digraphs, strongly_connected


def test_canonical_rotation():
    assert canonical_cycle((3, 1, 2)) == (1, 2, 3)
    assert canonical_cycle((0,)) == (0,)


def test_union_rejects_shared_vertices():
    with pytest.raises(ValueError):
        DisjointCycleUnion(((0, 1), (1, 2)), 3)


def test_permutation_to_union_keeps_fixed_points_as_loops():
    u = permutation_to_union((1, 0, 2))
    assert u.cycles == ((0, 1), (2,))
    assert u.edges == {(0, 1), (1, 0), (2, 2)}
    assert u.spanning


@given(digraphs(max_n=5, self_loops=True))
def test_cycles_match_brute_force(g):
    assert set(enumerate_cycles(g)) == cycles_oracle(g)
    assert len(enumerate_cycles(g)) == len(cycles_oracle(g))


@given(digraphs(max_n=5))
def test_disjoint_unions_match_brute_force(g):
    got = [u.edges for u in enumerate_disjoint_cycle_unions(g)]
    assert sorted(got, key=sorted) == sorted(disjoint_unions_oracle(g), key=sorted)


@given(digraphs(max_n=5))
def test_spanning_unions_are_permutations(g):
    got = {u.edges for u in enumerate_disjoint_cycle_unions(g, spanning_only=True)}
    # a permutation that is all fixed points has no edges; it only counts with self-loops
    assert got == {e for e in spanning_unions_oracle(g) if e}


def test_fig2b_has_five_cycles_and_two_spanning():
    g = load_graph("fig2b")
    assert len(enumerate_cycles(g)) == 5
    spanning = [c for c in enumerate_cycles(g) if len(c) == g.n]
    assert len(spanning) == 2


def test_fig2b_principal_and_ds_sets():
    g = load_graph("fig2b")
    p = principal_cycle_set(g)
    ds = ds_cycle_set(g)
    assert p.cardinality == 2 and ds.cardinality == 2
    assert {len(m.cycles) for m in ds.members} == {1}
    assert set().union(*(m.edges for m in ds.members)) == set(g.edges)


def test_fig9_ds_character():
    g = load_graph("fig9")
    ds = ds_cycle_set(g)
    assert ds.cardinality == 2
    assert [m.cycles for m in ds.members] == [((0, 1, 2, 3),), ((0, 1, 3, 2),)]
    assert principal_cycle_set(g).cardinality == 2


def test_fig1_and_fig2a_have_no_ds_set():
    for name in ("fig1", "fig2a"):
        with pytest.raises(NotDoublyStochasticable):
            ds_cycle_set(load_graph(name))


def test_cover_errors():
    path = WeightedDigraph.from_edges(2, [(0, 1)])
    with pytest.raises(NotSemiconnected):
        principal_cycle_set(path)
    two = WeightedDigraph.from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
    with pytest.raises(NotStronglyConnected):
        ds_cycle_set(two)
    with pytest.raises(GraphTooLarge):
        ds_cycle_set(WeightedDigraph.from_edges(11, [(i, (i + 1) % 11) for i in range(11)]))


def test_isolated_vertices_get_their_own_member():
    g = WeightedDigraph.from_edges(3, [(0, 1), (1, 0)])
    p = principal_cycle_set(g)
    assert p.cardinality == 2
    assert p.members[-1].isolated == (2,)


@settings(max_examples=60, deadline=None)
@given(digraphs(max_n=4))
def test_principal_size_matches_exhaustive_cover(g):
    if classify_connectivity(g).kind is Connectivity.NEITHER:
        with pytest.raises(NotSemiconnected):
            principal_cycle_set(g)
        return
    cert = principal_cycle_set(g)
    assert cert.cardinality == principal_size_oracle(g)
    assert set().union(*(m.edges for m in cert.members)) == set(g.edges)


@settings(max_examples=60, deadline=None)
@given(strongly_connected(max_n=5))
def test_ds_character_matches_exhaustive_cover(g):
    expected = ds_character_oracle(g)
    if expected is None:
        with pytest.raises(NotDoublyStochasticable):
            ds_cycle_set(g)
        return
    cert = ds_cycle_set(g)
    assert cert.cardinality == expected
    assert all(m.spanning for m in cert.members)
    assert set().union(*(m.edges for m in cert.members)) == set(g.edges)


@settings(max_examples=40, deadline=None)
@given(strongly_connected(max_n=5))
def test_ds_certificate_is_the_first_minimum_combination(g):
    spanning = enumerate_disjoint_cycle_unions(g, spanning_only=True)
    universe = set(g.edges)
    first = None
    for size in range(1, len(spanning) + 1):
        first = next((c for c in combinations(spanning, size) if set().union(*(m.edges for m in c)) == universe), None)
        if first is not None:
            break
    if first is None:
        with pytest.raises(NotDoublyStochasticable):
            ds_cycle_set(g)
    else:
        assert ds_cycle_set(g).members == first


@settings(max_examples=60, deadline=None)
@given(strongly_connected(max_n=6))
def test_ds_character_bounds(g):
    try:
        ds = ds_cycle_set(g).cardinality
    except NotDoublyStochasticable:
        return
    degrees = [len(g.out_neighbors(v)) for v in range(g.n)] + [len(g.in_neighbors(v)) for v in range(g.n)]
    assert max(degrees) <= ds <= g.num_edges - g.n + 1
    assert ds >= principal_cycle_set(g).cardinality


@given(digraphs(max_n=6, self_loops=True))
def test_spanning_cycle_matches_brute_force(g):
    assert has_spanning_cycle(g) == hamiltonian_oracle(g)


def test_spanning_cycle_examples():
    assert has_spanning_cycle(load_graph("fig9"))
    assert has_spanning_cycle(load_graph("fig1"))  # 0 -> 1 -> 2 -> 3 -> 0
    bowtie = WeightedDigraph.from_edges(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)])
    assert not has_spanning_cycle(bowtie)


@settings(max_examples=60, deadline=None)
@given(digraphs(max_n=5))
def test_cycle_union_weights_balance(g):
    if classify_connectivity(g).kind is Connectivity.NEITHER:
        return
    balanced = balance_via_cycle_union(g)
    assert is_weight_balanced(balanced)
    assert set(balanced.edges) == set(g.edges)
    assert all(w >= 1 for w in balanced.weights.values())


def test_extended_adjacency_is_permutation_for_spanning_unions():
    u = DisjointCycleUnion(((0, 2), (1, 3)), 4)
    a = extended_adjacency(u, 4)
    assert is_permutation_matrix(a)
    assert not is_permutation_matrix(extended_adjacency(DisjointCycleUnion(((0, 1),), 3), 3))


@given(convex_permutation_mixes(max_n=6))
def test_birkhoff_recombines_exactly(m):
    terms = birkhoff_decompose(m)
    n = len(m)
    assert sum(t.coefficient for t in terms) == 1
    assert all(t.coefficient > 0 for t in terms)
    total = [[Fraction(0)] * n for _ in range(n)]
    for t in terms:
        assert t.matrix() == permutation_matrix(t.permutation)
        for i in range(n):
            total[i][t.permutation[i]] += t.coefficient
    assert total == m
    assert len(terms) <= (n - 1) ** 2 + 1


def test_birkhoff_rejects_non_ds():
    with pytest.raises(NotDoublyStochastic):
        birkhoff_decompose([[1, 0], [1, 0]])
    with pytest.raises(NotDoublyStochastic):
        birkhoff_decompose([["3/2", "-1/2"], ["-1/2", "3/2"]])


def test_birkhoff_of_uniform_matrix():
    third = Fraction(1, 3)
    terms = birkhoff_decompose([[third] * 3] * 3)
    assert len(terms) == 3 and {t.coefficient for t in terms} == {third}


def test_birkhoff_is_independent_of_hash_seed():
    script = (
        "from fractions import Fraction as F\n"
        "from digraph_balance.cycles import birkhoff_decompose\n"
        "m = [[F(1, 5)] * 5 for _ in range(5)]\n"
        "print([(str(t.coefficient), t.permutation) for t in birkhoff_decompose(m)])\n"
    )
    outputs = {
        subprocess.run(
            [sys.executable, "-c", script],
            env={**os.environ, "PYTHONHASHSEED": str(seed)},
            capture_output=True, text=True, check=True,
        ).stdout
        for seed in range(4)
    }
    assert len(outputs) == 1
