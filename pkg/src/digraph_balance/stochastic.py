"""Doubly stochastic weightings: the self-loop procedure and the C-regular load/height protocol."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .balance import Policy, lyapunov, run_wbda
from .errors import InvalidChoice, MaxStepsExceeded, NotStronglyConnected
from .flow import check_degree_bound
from .graph import WeightedDigraph, degree_profile, is_strongly_connected
from .trace import EdgeChange, ProtocolInvariantError, RoundRecord, RoundTrace

MAX_STEPS_FACTOR = 16


# -- self-loop procedure -------------------------------------------------------


def dsify_with_self_loops(
    g: WeightedDigraph, policy: Policy = "lowest_index", balanced: WeightedDigraph | None = None
) -> WeightedDigraph:
    """Balance with the min-weight protocol, pad every vertex with a self-loop
    up to the largest weighted out-degree, then divide by that degree.

    ``balanced`` skips the balancing run and uses the given weight-balanced
    assignment instead.
    """
    if not is_strongly_connected(g):
        raise NotStronglyConnected("the self-loop procedure requires a strongly connected digraph")
    if balanced is None:
        trace = run_wbda(g, policy)
        if not trace.converged:
            raise RuntimeError(f"balancing stage ended with status {trace.status}")
        balanced = trace.final
    elif lyapunov(balanced) != 0:
        raise ValueError("the supplied intermediate assignment is not weight-balanced")
    out_w = degree_profile(balanced).out_weight
    top = max(out_w)
    weights = dict(balanced.weights)
    for v in range(g.n):
        pad = top - out_w[v]
        if pad > 0:
            weights[(v, v)] = weights.get((v, v), Fraction(0)) + pad
    padded = WeightedDigraph(g.n, weights, allows_self_loops=True)
    return padded.scaled(Fraction(1) / top)


# -- C-regular protocol ----------------------------------------------------------


@dataclass(frozen=True)
class CRegularAgentState:
    """Weights plus per-vertex heights; loads are derived from the weights."""

    C: int
    weights: WeightedDigraph
    source_height: tuple[int, ...]
    target_height: tuple[int, ...]
    max_in_source_height: tuple[int, ...]

    @property
    def source_load(self) -> tuple[Fraction, ...]:
        return tuple(self.C - w for w in degree_profile(self.weights).out_weight)

    @property
    def target_load(self) -> tuple[Fraction, ...]:
        return tuple(w - self.C for w in degree_profile(self.weights).in_weight)

    def a(self, i: int, j: int) -> Fraction:
        return self.weights.weight(i, j)

    def summary(self) -> dict:
        return {
            "source_load": [str(x) for x in self.source_load],
            "target_load": [str(x) for x in self.target_load],
            "source_height": list(self.source_height),
            "target_height": list(self.target_height),
        }


def cregular_init(g: WeightedDigraph, C: int) -> CRegularAgentState:
    """Unit weights, source heights 2, target heights 1, and the cached in-neighbor maxima."""
    check_degree_bound(g, C)
    unit = g.unit_weights()
    hs = (2,) * g.n
    ht = (1,) * g.n
    max_in = tuple(max((hs[k] for k in g.in_neighbors(i)), default=0) for i in range(g.n))
    return CRegularAgentState(C, unit, hs, ht, max_in)


@dataclass(frozen=True)
class Action:
    kind: str  # push_forward | push_backward | raise_height | declare_not_c_regular
    vertex: int
    other: int | None = None

    def __str__(self) -> str:
        if self.other is None:
            return f"{self.kind}({self.vertex})"
        return f"{self.kind}({self.vertex}->{self.other})"


def _backward_ok(a_ki: Fraction, load: Fraction, strict: bool) -> bool:
    return a_ki > load + 1 if strict else a_ki >= load + 1


def forward_targets(state: CRegularAgentState, i: int) -> list[int]:
    return [
        j
        for j in state.weights.out_neighbors(i)
        if state.a(i, j) < state.C and state.source_height[i] > state.target_height[j]
    ]


def backward_sources(state: CRegularAgentState, i: int, strict: bool = True) -> list[int]:
    load = state.target_load[i]
    return [
        k
        for k in state.weights.in_neighbors(i)
        if _backward_ok(state.a(k, i), load, strict) and state.target_height[i] > state.source_height[k]
    ]


def _apply(state: CRegularAgentState, act: Action, changes: list[EdgeChange]) -> CRegularAgentState:
    i = act.vertex
    if act.kind == "push_forward":
        j = act.other
        old = state.a(i, j)
        new = old + state.source_load[i]
        changes.append(EdgeChange(i, j, old, new))
        return replace(state, weights=state.weights.with_weights({(i, j): new}))
    if act.kind == "push_backward":
        k = act.other
        old = state.a(k, i)
        new = old - state.target_load[i]
        changes.append(EdgeChange(k, i, old, new))
        return replace(state, weights=state.weights.with_weights({(k, i): new}))
    if act.kind == "raise_height":
        ht = list(state.target_height)
        ht[i] = state.max_in_source_height[i] + 1
        return replace(state, target_height=tuple(ht))
    raise ValueError(f"unknown action {act.kind!r}")


def _validate(state: CRegularAgentState, act: Action, strict: bool) -> None:
    i = act.vertex
    if act.kind == "push_forward":
        if state.source_load[i] <= 0 or act.other not in forward_targets(state, i):
            raise InvalidChoice(f"illegal {act}")
    elif act.kind == "push_backward":
        if state.target_load[i] <= 0 or act.other not in backward_sources(state, i, strict):
            raise InvalidChoice(f"illegal {act}")
    elif act.kind == "raise_height":
        if state.target_load[i] <= 0 or backward_sources(state, i, strict):
            raise InvalidChoice(f"illegal {act}: a backward push is available or no target load")
    else:
        raise InvalidChoice(f"unknown action {act.kind!r}")


def cregular_step(
    state: CRegularAgentState, strict_backward_guard: bool = True, schedule: str = "sequential"
) -> tuple[CRegularAgentState, list[Action], list[EdgeChange]]:
    """One protocol step.

    ``sequential``: vertices act in ascending order, forward phase before
    backward phase, each action seeing the loads left by the previous one.
    ``synchronous``: every vertex decides from the pre-step snapshot and all
    actions commit together.

    A ``declare_not_c_regular`` action in the returned list ends the run.
    """
    actions: list[Action] = []
    changes: list[EdgeChange] = []
    snap = state
    n = state.weights.n
    for i in range(n):
        view = snap if schedule == "synchronous" else state
        if view.source_load[i] > 0:
            targets = forward_targets(view, i)
            if not targets:
                actions.append(Action("declare_not_c_regular", i))
                return state, actions, changes
            act = Action("push_forward", i, targets[0])
            actions.append(act)
            state = _apply_from(state, view, act, changes)
    for i in range(n):
        view = snap if schedule == "synchronous" else state
        if view.target_load[i] > 0:
            sources = backward_sources(view, i, strict_backward_guard)
            act = Action("push_backward", i, sources[0]) if sources else Action("raise_height", i)
            actions.append(act)
            state = _apply_from(state, view, act, changes)
    return state, actions, changes


def _apply_from(state: CRegularAgentState, view: CRegularAgentState, act: Action, changes: list[EdgeChange]) -> CRegularAgentState:
    """Apply ``act`` to ``state`` with the amount read from ``view``."""
    if view is state or act.kind == "raise_height":
        return _apply(state, act, changes)
    i = act.vertex
    if act.kind == "push_forward":
        old = state.a(i, act.other)
        new = old + view.source_load[i]
        changes.append(EdgeChange(i, act.other, old, new))
        return replace(state, weights=state.weights.with_weights({(i, act.other): new}))
    old = state.a(act.other, i)
    new = old - view.target_load[i]
    changes.append(EdgeChange(act.other, i, old, new))
    return replace(state, weights=state.weights.with_weights({(act.other, i): new}))


@dataclass(frozen=True)
class CRegularResult:
    verdict: str  # c_regular | not_c_regular | stalled | replay_exhausted
    assignment: WeightedDigraph | None
    trace: RoundTrace
    announcer: int | None = None

    @property
    def iterations(self) -> int:
        """Snapshots including the initialization round."""
        return len(self.trace.records)

    @property
    def doubly_stochastic(self) -> WeightedDigraph | None:
        if self.assignment is None:
            return None
        return self.assignment.scaled(Fraction(1, self.trace.detail["C"]))


def _record(k: int, state: CRegularAgentState, actions=(), changes=()) -> RoundRecord:
    omega = degree_profile(state.weights).imbalance
    return RoundRecord(
        k, state.weights, lyapunov(state.weights), omega, tuple(changes),
        tuple(str(a) for a in actions), state.summary(),
    )


def _parse_action(raw) -> Action:
    if isinstance(raw, Action):
        return raw
    if isinstance(raw, dict):
        return Action(raw["action"], int(raw["vertex"]), None if raw.get("target") is None else int(raw["target"]))
    kind, vertex, *rest = raw
    return Action(kind, int(vertex), int(rest[0]) if rest and rest[0] is not None else None)


def _check_step(k: int, prev: CRegularAgentState, cur: CRegularAgentState) -> None:
    if any(w < 1 or w > cur.C for w in cur.weights.weights.values()):
        raise ProtocolInvariantError(f"step {k}: a weight left [1, {cur.C}]")
    # a push moves excess from one load to another, so the signed total stays zero
    if sum(cur.source_load) + sum(cur.target_load) != 0:
        raise ProtocolInvariantError(f"step {k}: total load is not conserved")
    if cur.source_height != prev.source_height:
        raise ProtocolInvariantError(f"step {k}: a source height changed")
    if any(b < a for a, b in zip(prev.target_height, cur.target_height)):
        raise ProtocolInvariantError(f"step {k}: a target height decreased")


def _done(state: CRegularAgentState) -> bool:
    return all(x == 0 for x in state.source_load) and all(x == 0 for x in state.target_load)


def run_cregular(
    g: WeightedDigraph,
    C: int,
    max_steps: int | None = None,
    *,
    replay: Sequence[Sequence] | None = None,
    strict_backward_guard: bool = True,
    schedule: str = "sequential",
) -> CRegularResult:
    """Run the C-regular protocol to a verdict.

    ``replay`` gives an explicit action list per step; each action is checked
    against the protocol rules before it is applied. A run whose step leaves
    the state unchanged with loads outstanding ends as ``stalled``: no rule
    can fire, so the protocol never reaches either verdict on its own.

    Raises ``MaxStepsExceeded`` after ``max_steps`` steps (default
    ``16 * n**2 * |E|``).
    """
    state = cregular_init(g, C)
    limit = MAX_STEPS_FACTOR * g.n**2 * max(g.num_edges, 1) if max_steps is None else max_steps
    policy = "replay" if replay is not None else schedule
    trace = RoundTrace(
        "cregular", policy, [_record(0, state)],
        detail={"C": C, "strict_backward_guard": strict_backward_guard},
    )

    def finish(verdict: str, announcer: int | None = None) -> CRegularResult:
        trace.status = verdict
        if announcer is not None:
            trace.detail["announcer"] = announcer
        return CRegularResult(verdict, state.weights if verdict == "c_regular" else None, trace, announcer)

    for k in range(1, limit + 1):
        if _done(state):
            return finish("c_regular")
        before = state
        if replay is not None:
            if k > len(replay):
                return finish("replay_exhausted")
            actions, changes = [], []
            for raw in replay[k - 1]:
                act = _parse_action(raw)
                _validate(state, act, strict_backward_guard)
                state = _apply(state, act, changes)
                actions.append(act)
        else:
            state, actions, changes = cregular_step(state, strict_backward_guard, schedule)
        _check_step(k, before, state)
        trace.records.append(_record(k, state, actions, changes))
        if actions and actions[-1].kind == "declare_not_c_regular":
            return finish("not_c_regular", actions[-1].vertex)
        if replay is None and state == before:
            return finish("stalled")
    if _done(state):
        return finish("c_regular")
    raise MaxStepsExceeded(f"no verdict after {limit} steps")
