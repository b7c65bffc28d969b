from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings

from digraph_balance.characterize import is_doubly_stochastic
from digraph_balance.errors import CTooSmallForDegrees, InvalidChoice, MaxStepsExceeded, NotStronglyConnected
from digraph_balance.fixtures import load_graph, load_replay
from digraph_balance.flow import flow_feasibility_oracle
from digraph_balance.graph import WeightedDigraph
from digraph_balance.stochastic import (
    Action,
    backward_sources,
    cregular_init,
    cregular_step,
    dsify_with_self_loops,
    run_cregular,
)
from oracles import col_sums, is_ds_matrix, row_sums
from strategies import strongly_connected

F = Fraction
BALANCED_2A = [[0, 6, 0, 0, 0], [0, 0, 3, 3, 0], [5, 0, 0, 0, 0], [1, 0, 1, 0, 1], [0, 0, 1, 0, 0]]
DS_2A = [
    [0, 1, 0, 0, 0],
    [0, 0, F(1, 2), F(1, 2), 0],
    [F(5, 6), 0, F(1, 6), 0, 0],
    [F(1, 6), 0, F(1, 6), F(1, 2), F(1, 6)],
    [0, 0, F(1, 6), 0, F(5, 6)],
]
TRIANGLE = WeightedDigraph.from_edges(3, [(0, 1), (1, 2), (2, 0)])


# -- self-loop procedure ------------------------------------------------------------


def test_self_loops_on_the_balanced_intermediate():
    g = load_graph("fig2a")
    out = dsify_with_self_loops(g, balanced=WeightedDigraph.from_matrix(BALANCED_2A))
    assert out.matrix() == DS_2A
    assert [out.matrix()[v][v] * 6 for v in range(5)] == [0, 0, 1, 3, 5]


def test_self_loops_after_running_the_balancer():
    assert dsify_with_self_loops(load_graph("fig2a")).matrix() == DS_2A


def test_self_loops_on_regular_and_triangle_inputs():
    out = dsify_with_self_loops(TRIANGLE)
    assert out.matrix() == TRIANGLE.matrix()
    assert not any(i == j for i, j in out.edges)
    two = WeightedDigraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (2, 0, 2)])
    out = dsify_with_self_loops(two)
    assert all(w == 1 for w in out.weights.values()) and out.edges == TRIANGLE.edges


def test_self_loops_reject_bad_inputs():
    with pytest.raises(NotStronglyConnected):
        dsify_with_self_loops(WeightedDigraph.from_edges(2, [(0, 1)]))
    with pytest.raises(ValueError):
        dsify_with_self_loops(load_graph("fig2a"), balanced=load_graph("fig2a"))


@settings(max_examples=60, deadline=None)
@given(strongly_connected(max_n=7, max_weight=5))
def test_self_loop_output_is_doubly_stochastic(g):
    out = dsify_with_self_loops(g)
    assert is_ds_matrix(out.matrix())
    assert {e for e in out.edges if e[0] != e[1]} == set(g.edges)


# -- C-regular protocol: initialization and single steps ----------------------------------


def test_init_fig9():
    s = cregular_init(load_graph("fig9"), 3)
    assert s.source_load == (2, 1, 1, 1)
    assert s.target_load == (-1, -2, -1, -1)
    assert s.source_height == (2,) * 4 and s.target_height == (1,) * 4
    assert s.max_in_source_height == (2,) * 4


def test_init_fig2a():
    s = cregular_init(load_graph("fig2a"), 4)
    assert s.source_load == (3, 2, 3, 1, 3)
    assert s.target_load == (-2, -3, -1, -3, -3)


def test_init_requires_degree_bound():
    with pytest.raises(CTooSmallForDegrees):
        cregular_init(load_graph("fig9"), 1)


def test_regular_input_starts_with_zero_loads():
    s = cregular_init(TRIANGLE, 1)
    assert set(s.source_load) == {0} and set(s.target_load) == {0}
    nxt, actions, changes = cregular_step(s)
    assert nxt == s and not actions and not changes


def test_first_step_of_fig9_push_forward():
    s = cregular_init(load_graph("fig9"), 3)
    nxt, actions, changes = cregular_step(s)
    forwards = [(c.i, c.j, c.new) for c in changes if c.new > c.old]
    assert forwards == [(0, 1, 3), (1, 2, 2), (2, 0, 2), (3, 0, 2)]
    assert sorted(c.new for c in changes[:4]) == [2, 2, 2, 3]
    assert set(nxt.source_load) == {0}


def test_recorded_schedule_step_two_raises_a_target_height():
    steps = load_replay("fig10").rounds
    res = run_cregular(load_graph("fig9"), 3, replay=steps[:2], strict_backward_guard=False)
    assert res.trace.records[2].state["target_height"] == [1, 1, 1, 3]
    assert res.trace.records[1].modified and [(c.new) for c in res.trace.records[1].modified] == [3, 2, 2, 2]


def test_recorded_step_three_needs_the_relaxed_guard():
    res = run_cregular(load_graph("fig9"), 3, replay=load_replay("fig10").rounds[:2], strict_backward_guard=False)
    assert res.trace.records[-1].state["target_load"][3] == "1"
    # edge (2, 3) carries weight 2 = L_t + 1
    assert res.trace.final.weight(2, 3) == 2
    assert res.trace.records[-1].state["target_height"][3] == 3


# -- full runs ---------------------------------------------------------------------------


def test_fig10_recorded_schedule():
    rep = load_replay("fig10")
    assert rep.C == 3 and rep.strict_backward_guard is False
    res = run_cregular(load_graph("fig9"), rep.C, replay=rep.rounds, strict_backward_guard=rep.strict_backward_guard)
    assert res.verdict == "c_regular" and res.iterations == 5
    m = res.assignment.matrix()
    assert row_sums(m) == [3] * 4 and col_sums(m) == [3] * 4
    assert {e: int(w) for e, w in res.assignment.weights.items()} == {
        (0, 1): 3, (1, 2): 1, (1, 3): 2, (2, 0): 2, (2, 3): 1, (3, 0): 1, (3, 2): 2
    }
    assert is_doubly_stochastic(res.doubly_stochastic.matrix())


def test_fig10_schedule_is_illegal_under_the_strict_guard():
    with pytest.raises(InvalidChoice):
        run_cregular(load_graph("fig9"), 3, replay=load_replay("fig10").rounds)


def test_replay_validation():
    g = load_graph("fig9")
    with pytest.raises(InvalidChoice):
        run_cregular(g, 3, replay=[[("push_forward", 0, 2)]])  # 0 -> 2 is not an edge
    with pytest.raises(InvalidChoice):
        run_cregular(g, 3, replay=[[("push_backward", 0, 2)]])  # vertex 0 has no target load
    with pytest.raises(InvalidChoice):
        run_cregular(g, 3, replay=[[("teleport", 0)]])
    res = run_cregular(g, 3, replay=[[Action("push_forward", 0, 1)]])
    assert res.verdict == "replay_exhausted"


def test_fig2a_is_declared_not_c_regular():
    g = load_graph("fig2a")
    C = g.num_edges - g.n + 1
    res = run_cregular(g, C)
    assert C == 4 and res.verdict == "not_c_regular" and res.announcer is not None
    assert res.assignment is None
    assert not flow_feasibility_oracle(g, C).feasible


def test_triangle_is_immediately_regular():
    res = run_cregular(TRIANGLE, 1)
    assert res.verdict == "c_regular" and res.iterations == 1 and res.assignment == TRIANGLE


def test_fig9_default_schedule_stalls_under_the_strict_guard():
    res = run_cregular(load_graph("fig9"), 3)
    assert res.verdict == "stalled" and res.assignment is None


def test_fig9_default_schedule_succeeds_with_the_relaxed_guard():
    res = run_cregular(load_graph("fig9"), 3, strict_backward_guard=False)
    assert res.verdict == "c_regular"
    m = res.assignment.matrix()
    assert row_sums(m) == [3] * 4 and col_sums(m) == [3] * 4


def test_step_budget():
    with pytest.raises(MaxStepsExceeded):
        run_cregular(load_graph("fig9"), 3, max_steps=1, strict_backward_guard=False)


@settings(max_examples=80, deadline=None)
@given(strongly_connected(max_n=6))
def test_protocol_invariants_and_soundness(g):
    C = g.num_edges - g.n + 1
    feasible = flow_feasibility_oracle(g, C).feasible
    for strict in (True, False):
        for schedule in ("sequential", "synchronous"):
            res = run_cregular(g, C, strict_backward_guard=strict, schedule=schedule)
            states = [r.state for r in res.trace.records]
            for prev, cur in zip(states, states[1:]):
                assert cur["source_height"] == [2] * g.n
                assert all(b >= a for a, b in zip(prev["target_height"], cur["target_height"]))
            for r in res.trace.records:
                assert all(1 <= w <= C for w in r.weights.weights.values())
                out = row_sums([[r.weights.weight(i, j) for j in range(g.n)] for i in range(g.n)])
                assert [F(x) for x in r.state["source_load"]] == [C - x for x in out]
            if res.verdict == "c_regular":
                assert feasible
                m = res.assignment.matrix()
                assert row_sums(m) == [C] * g.n and col_sums(m) == [C] * g.n


def test_backward_sources_respects_heights():
    s = cregular_init(load_graph("fig9"), 3)
    # target heights start below every source height, so nobody can push backward yet
    assert all(backward_sources(s, v, strict=False) == [] for v in range(4))
