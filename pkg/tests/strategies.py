"""Hypothesis strategies for digraphs and matrices."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from digraph_balance.graph import WeightedDigraph


@st.composite
def digraphs(draw, min_n: int = 1, max_n: int = 5, max_weight: int = 4, self_loops: bool = False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(n) if self_loops or i != j]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    weights = {e: Fraction(draw(st.integers(1, max_weight))) for e in chosen}
    return WeightedDigraph(n, weights, self_loops)


@st.composite
def strongly_connected(draw, min_n: int = 2, max_n: int = 6, max_weight: int = 1):
    """A shuffled Hamiltonian ring plus arbitrary extra edges."""
    n = draw(st.integers(min_n, max_n))
    order = draw(st.permutations(range(n)))
    edges = {(order[k], order[(k + 1) % n]) for k in range(n)}
    extra = [(i, j) for i in range(n) for j in range(n) if i != j and (i, j) not in edges]
    if extra:
        edges |= set(draw(st.lists(st.sampled_from(extra), unique=True, max_size=len(extra))))
    weights = {e: Fraction(draw(st.integers(1, max_weight))) for e in sorted(edges)}
    return WeightedDigraph(n, weights)


@st.composite
def convex_permutation_mixes(draw, max_n: int = 6, max_terms: int = 6):
    """A doubly stochastic matrix built as a convex combination of permutation matrices."""
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, max_terms))
    perms = [draw(st.permutations(range(n))) for _ in range(k)]
    raw = [draw(st.integers(1, 9)) for _ in range(k)]
    total = sum(raw)
    m = [[Fraction(0)] * n for _ in range(n)]
    for sigma, c in zip(perms, raw):
        for i in range(n):
            m[i][sigma[i]] += Fraction(c, total)
    return m
