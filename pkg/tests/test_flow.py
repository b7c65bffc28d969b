from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digraph_balance.errors import CTooSmallForDegrees
from digraph_balance.fixtures import load_graph
from digraph_balance.flow import (
    SOURCE,
    TARGET,
    build_flow_network,
    col_node,
    flow_feasibility_oracle,
    row_node,
    solve,
)
from oracles import c_regular_search, col_sums, row_sums
from strategies import strongly_connected


def test_capacities_after_lower_bound_shift():
    g = load_graph("fig9")
    net = build_flow_network(g, 3)
    assert net.capacity[(SOURCE, row_node(1))] == 1  # out-degree 2
    assert net.capacity[(col_node(3), TARGET)] == 1  # in-degree 2
    assert net.capacity[(col_node(0), TARGET)] == 1
    assert net.capacity[(row_node(0), col_node(1))] == 2
    assert net.required_value == sum(3 - len(g.out_neighbors(v)) for v in range(g.n))


def test_degree_bound():
    with pytest.raises(CTooSmallForDegrees):
        build_flow_network(load_graph("fig9"), 1)
    with pytest.raises(CTooSmallForDegrees):
        flow_feasibility_oracle(load_graph("fig1"), 0)


def test_fig9_three_regular():
    res = flow_feasibility_oracle(load_graph("fig9"), 3)
    assert res.feasible and res.flow_value == res.required_value
    m = res.assignment.matrix()
    assert row_sums(m) == [3] * 4 and col_sums(m) == [3] * 4


def test_fig1_infeasible():
    g = load_graph("fig1")
    assert g.num_edges - g.n + 1 == 2
    res = flow_feasibility_oracle(g, 2)
    assert not res.feasible and res.assignment is None and res.flow_value < res.required_value


def test_fig2b_two_regular():
    res = flow_feasibility_oracle(load_graph("fig2b"), 2)
    m = res.assignment.matrix()
    assert row_sums(m) == [2] * 5 and col_sums(m) == [2] * 5


@settings(max_examples=80, deadline=None)
@given(strongly_connected(max_n=4), st.integers(0, 2))
def test_matches_exhaustive_integer_search(g, extra):
    degrees = [len(g.out_neighbors(v)) for v in range(g.n)] + [len(g.in_neighbors(v)) for v in range(g.n)]
    C = max(degrees) + extra
    res = flow_feasibility_oracle(g, C)
    assert res.feasible == c_regular_search(g, C)
    if res.feasible:
        m = res.assignment.matrix()
        assert row_sums(m) == [C] * g.n and col_sums(m) == [C] * g.n
        assert all(1 <= w <= C for w in res.assignment.weights.values())


@settings(max_examples=40, deadline=None)
@given(strongly_connected(max_n=6))
def test_flow_conserves(g):
    C = g.num_edges - g.n + 1
    if C < 1:
        return
    try:
        net = build_flow_network(g, C)
    except CTooSmallForDegrees:
        return
    solve(net)
    assert net.conserves()
