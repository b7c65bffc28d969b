"""Synchronous weight-balancing protocols.

Two round maps are provided. In the min-weight protocol (``wbda``) every
vertex with positive imbalance adds that imbalance to one of its lightest
out-edges. In the mirror protocol (``wbmda``) it adds it to the edge toward
an out-neighbor of smallest imbalance, rotating among tied neighbors. Both
read a frozen pre-round snapshot and commit all updates together.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

from .errors import InvalidChoice, NotStronglyConnected
from .graph import WeightedDigraph, degree_profile, is_strongly_connected
from .trace import EdgeChange, ProtocolInvariantError, RoundRecord, RoundTrace

Choices = Mapping[int, int]
Policy = Union[str, Sequence[Choices]]

LOWEST_INDEX = "lowest_index"


def lyapunov(g: WeightedDigraph) -> Fraction:
    """Total absolute imbalance; zero exactly when ``g`` is weight-balanced."""
    return sum((abs(w) for w in degree_profile(g).imbalance), Fraction(0))


def _record(round_no: int, g: WeightedDigraph, changes=()) -> RoundRecord:
    omega = degree_profile(g).imbalance
    return RoundRecord(round_no, g, sum((abs(w) for w in omega), Fraction(0)), omega, tuple(changes))


def _apply(g: WeightedDigraph, pushes: Mapping[int, int], omega) -> tuple[WeightedDigraph, list[EdgeChange]]:
    updates = {}
    changes = []
    for i in sorted(pushes):
        j = pushes[i]
        old = g.weight(i, j)
        updates[(i, j)] = old + omega[i]
        changes.append(EdgeChange(i, j, old, old + omega[i]))
    return g.with_weights(updates), changes


def _validate_choice_keys(choices: Choices, positive: list[int]) -> None:
    extra = set(choices) - set(positive)
    missing = set(positive) - set(choices)
    if extra:
        raise InvalidChoice(f"choices given for vertices without positive imbalance: {sorted(extra)}")
    if missing:
        raise InvalidChoice(f"no choice given for positively imbalanced vertices: {sorted(missing)}")


# -- min-weight protocol ------------------------------------------------------


def lightest_out_edges(g: WeightedDigraph, i: int) -> tuple[int, ...]:
    """Targets of the minimum-weight positive out-edges of ``i`` (self-loops excluded)."""
    opts = [(g.weight(i, j), j) for j in g.out_neighbors(i) if j != i and g.weight(i, j) > 0]
    if not opts:
        return ()
    low = min(w for w, _ in opts)
    return tuple(j for w, j in opts if w == low)


def _wbda_round(g: WeightedDigraph, choices: Choices | None):
    omega = degree_profile(g).imbalance
    positive = [i for i in range(g.n) if omega[i] > 0]
    if choices is not None:
        _validate_choice_keys(choices, positive)
    pushes = {}
    for i in positive:
        legal = lightest_out_edges(g, i)
        if not legal:
            raise ProtocolInvariantError(f"vertex {i} has positive imbalance but no positive out-edge")
        j = legal[0] if choices is None else int(choices[i])
        if j not in legal:
            raise InvalidChoice(f"round choice {i}->{j} is not a lightest out-edge of {i} (legal: {legal})")
        pushes[i] = j
    return _apply(g, pushes, omega)


def wbda_step(g: WeightedDigraph, choices: Choices | None = None) -> WeightedDigraph:
    """One synchronous round of the min-weight protocol.

    Without ``choices`` every vertex breaks ties toward the lowest index.
    """
    return _wbda_round(g, choices)[0]


# -- mirror protocol with fair decisions ----------------------------------------


@dataclass(frozen=True)
class FairDecisionMemory:
    """Per-vertex round-robin pointer into the sorted out-neighbor list.

    The pointer only moves when a vertex has to break a tie, so the next tie
    starts looking just after the neighbor picked last time.
    """

    pointer: tuple[int, ...]
    last_tie_choice: tuple[int | None, ...]

    @classmethod
    def initial(cls, n: int) -> FairDecisionMemory:
        return cls((0,) * n, (None,) * n)

    def after_tie(self, i: int, position: int, size: int, choice: int) -> FairDecisionMemory:
        pointer = list(self.pointer)
        pointer[i] = (position + 1) % size
        last = list(self.last_tie_choice)
        last[i] = choice
        return replace(self, pointer=tuple(pointer), last_tie_choice=tuple(last))


def min_imbalance_neighbors(g: WeightedDigraph, i: int, omega: Sequence[Fraction]) -> tuple[int, ...]:
    outs = [j for j in g.out_neighbors(i) if j != i]
    if not outs:
        return ()
    low = min(omega[j] for j in outs)
    return tuple(j for j in outs if omega[j] == low)


def _wbmda_round(g: WeightedDigraph, memory: FairDecisionMemory, choices: Choices | None):
    omega = degree_profile(g).imbalance
    positive = [i for i in range(g.n) if omega[i] > 0]
    if choices is not None:
        _validate_choice_keys(choices, positive)
    pushes = {}
    for i in positive:
        tied = min_imbalance_neighbors(g, i, omega)
        if not tied:
            raise ProtocolInvariantError(f"vertex {i} has positive imbalance but no out-neighbor")
        if len(tied) == 1:
            j = tied[0]
            if choices is not None and int(choices[i]) != j:
                raise InvalidChoice(f"vertex {i} must push to {j}, its unique min-imbalance out-neighbor")
            pushes[i] = j
            continue
        outs = [v for v in g.out_neighbors(i) if v != i]
        if choices is None:
            p = memory.pointer[i] % len(outs)
            j = next(outs[(p + t) % len(outs)] for t in range(len(outs)) if outs[(p + t) % len(outs)] in tied)
        else:
            j = int(choices[i])
            if j not in tied:
                raise InvalidChoice(f"round choice {i}->{j} is not a min-imbalance out-neighbor (legal: {tied})")
            if memory.last_tie_choice[i] in tied and memory.last_tie_choice[i] == j:
                raise InvalidChoice(f"fair-decision rule: vertex {i} picked {j} at its previous tie")
        memory = memory.after_tie(i, outs.index(j), len(outs), j)
        pushes[i] = j
    new_g, changes = _apply(g, pushes, omega)
    return new_g, memory, changes


def wbmda_step(
    g: WeightedDigraph, memory: FairDecisionMemory | None = None, choices: Choices | None = None
) -> tuple[WeightedDigraph, FairDecisionMemory]:
    """One synchronous round of the mirror protocol; returns the new memory too."""
    memory = memory or FairDecisionMemory.initial(g.n)
    new_g, memory, _ = _wbmda_round(g, memory, choices)
    return new_g, memory


# -- engine ---------------------------------------------------------------------


def _policy_name(policy: Policy) -> str:
    if isinstance(policy, str):
        if policy not in (LOWEST_INDEX, "lowest-index"):
            raise ValueError(f"unknown policy {policy!r}")
        return LOWEST_INDEX
    return "replay"


def _check_round(prev: RoundRecord, cur: RoundRecord) -> None:
    if sum(cur.imbalances) != 0:
        raise ProtocolInvariantError(f"round {cur.round}: imbalances do not sum to zero")
    if cur.lyapunov > prev.lyapunov:
        raise ProtocolInvariantError(f"round {cur.round}: Lyapunov value rose {prev.lyapunov} -> {cur.lyapunov}")
    if any(w <= 0 for w in cur.weights.weights.values()):
        raise ProtocolInvariantError(f"round {cur.round}: non-positive weight")


def _run(algorithm: str, g: WeightedDigraph, policy: Policy, max_rounds: int | None,
         round_fn: Callable) -> RoundTrace:
    if not is_strongly_connected(g):
        raise NotStronglyConnected(f"{algorithm} requires a strongly connected digraph")
    if any(w <= 0 for w in g.weights.values()):
        raise ValueError("initial weights must all be positive")
    name = _policy_name(policy)
    limit = g.n ** 5 if max_rounds is None else max_rounds
    trace = RoundTrace(algorithm, name, [_record(0, g)])
    replay = None if isinstance(policy, str) else list(policy)
    for r in range(1, limit + 1):
        if trace.records[-1].lyapunov == 0:
            break
        if replay is not None and r > len(replay):
            trace.status = "replay_exhausted"
            return trace
        choices = None if replay is None else {int(k): int(v) for k, v in replay[r - 1].items()}
        g, changes = round_fn(g, choices)
        rec = _record(r, g, changes)
        _check_round(trace.records[-1], rec)
        trace.records.append(rec)
    trace.status = "converged" if trace.records[-1].lyapunov == 0 else "max_rounds"
    return trace


def run_wbda(g: WeightedDigraph, policy: Policy = LOWEST_INDEX, max_rounds: int | None = None) -> RoundTrace:
    """Iterate the min-weight protocol until balanced or ``max_rounds`` (default ``n**5``)."""
    return _run("wbda", g, policy, max_rounds, _wbda_round)


def run_wbmda(g: WeightedDigraph, policy: Policy = LOWEST_INDEX, max_rounds: int | None = None) -> RoundTrace:
    """Iterate the mirror protocol until balanced or ``max_rounds`` (default ``n**5``)."""
    memory = [FairDecisionMemory.initial(g.n)]

    def round_fn(h, choices):
        new_h, memory[0], changes = _wbmda_round(h, memory[0], choices)
        return new_h, changes

    return _run("wbmda", g, policy, max_rounds, round_fn)


# -- benchmark ------------------------------------------------------------------


def random_strongly_connected(n: int, rng: random.Random, extra_edge_prob: float = 0.3,
                              max_weight: int = 1) -> WeightedDigraph:
    """A random Hamiltonian ring plus independent extra edges.

    Weights are uniform integers in ``[1, max_weight]``.
    """
    order = list(range(n))
    rng.shuffle(order)
    edges = {(order[k], order[(k + 1) % n]) for k in range(n)} if n > 1 else set()
    for i in range(n):
        for j in range(n):
            if i != j and (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    weights = {e: Fraction(rng.randint(1, max_weight)) for e in sorted(edges)}
    return WeightedDigraph(n, weights)


@dataclass(frozen=True)
class BenchmarkRow:
    n: int
    trials: int
    mean_rounds: float
    max_rounds: int
    bound: int  # n**4


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]
    fitted_exponent: float | None


def benchmark_rounds(
    sizes: Sequence[int],
    trials: int,
    seed: int = 0,
    generator: Callable[[int, random.Random], WeightedDigraph] = random_strongly_connected,
    algorithm: str = "wbmda",
) -> BenchmarkReport:
    """Round counts under the lowest-index policy; slope of log(max) vs log(n)."""
    run = run_wbmda if algorithm == "wbmda" else run_wbda
    rows = []
    for n in sizes:
        counts = []
        for t in range(trials):
            rng = random.Random(f"{seed}:{n}:{t}")
            trace = run(generator(n, rng))
            if not trace.converged:
                raise ProtocolInvariantError(f"{algorithm} did not converge on a size-{n} trial")
            counts.append(trace.rounds)
        rows.append(BenchmarkRow(n, trials, statistics.fmean(counts), max(counts), n**4))
    pts = [(math.log(r.n), math.log(r.max_rounds)) for r in rows if r.max_rounds > 0]
    exponent = None
    if len(pts) >= 2 and len({x for x, _ in pts}) >= 2:
        exponent = statistics.linear_regression([x for x, _ in pts], [y for _, y in pts]).slope
    return BenchmarkReport(tuple(rows), exponent)
