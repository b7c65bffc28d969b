"""Command-line front end: ``digraph-balance <command> [options]``.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 usage or
input error. Output depends only on the input and ``--seed``.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path
from typing import Sequence

from . import fixtures
from .balance import benchmark_rounds, random_strongly_connected, run_wbda, run_wbmda
from .characterize import is_doubly_stochastic, is_doubly_stochasticable, is_weight_balanceable, is_weight_balanced
from .cycles import ds_cycle_set, principal_cycle_set
from .errors import (
    CTooSmallForDegrees,
    DigraphBalanceError,
    InvalidChoice,
    MethodSizeExceeded,
    NotDoublyStochasticable,
    NotSemiconnected,
    NotStronglyConnected,
    ParseError,
)
from .flow import flow_feasibility_oracle
from .graph import WeightedDigraph, classify_connectivity, is_strongly_connected
from .io import Replay, format_weight, guess_format, parse_graph, parse_replay, serialize_graph, serialize_trace
from .stochastic import dsify_with_self_loops, run_cregular

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2
FIXTURE_PREFIX = "fixture:"


class UsageError(Exception):
    pass


# -- helpers ---------------------------------------------------------------------


def _read_text(arg: str) -> tuple[str, str | None]:
    """Text plus a format guess for a path, ``-`` (stdin), or ``fixture:NAME``."""
    if arg == "-":
        return sys.stdin.read(), None
    if arg.startswith(FIXTURE_PREFIX):
        name = arg[len(FIXTURE_PREFIX):]
        if name in fixtures.REPLAYS:
            return fixtures.fixture_text(fixtures.REPLAYS[name]), "json"
        if name in fixtures.GRAPHS:
            return fixtures.fixture_text(f"{name}.json"), "json"
        raise UsageError(f"unknown fixture {name!r}")
    path = Path(arg)
    if not path.is_file():
        raise UsageError(f"no such file: {arg}")
    return path.read_text(), guess_format(path)


def _load_graph(args) -> WeightedDigraph:
    if not args.input:
        raise UsageError("--input is required")
    text, guessed = _read_text(args.input)
    return parse_graph(text, args.format or guessed or "json")


def _load_replay(arg: str) -> Replay:
    text, _ = _read_text(arg)
    return parse_replay(text)


def _matrix_lines(g: WeightedDigraph) -> list[str]:
    m = g.matrix()
    width = max(len(format_weight(x)) for row in m for x in row)
    return ["  " + " ".join(format_weight(x).rjust(width) for x in row) for row in m]


def _graph_lines(label: str, g: WeightedDigraph) -> list[str]:
    return [f"{label}:"] + _matrix_lines(g)


def _emit(args, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _write_trace(args, trace) -> None:
    if args.trace:
        fmt = "csv" if args.trace.endswith(".csv") else "json"
        Path(args.trace).write_text(serialize_trace(trace, fmt))


def _write_graph(args, g: WeightedDigraph) -> None:
    if getattr(args, "graph_out", None):
        Path(args.graph_out).write_text(serialize_graph(g, guess_format(args.graph_out)))


def _flag(value: bool) -> str:
    return "true" if value else "false"


# -- commands ---------------------------------------------------------------------


def cmd_check(args) -> int:
    g = _load_graph(args)
    report = classify_connectivity(g)
    balanceable = is_weight_balanceable(g)
    ds = is_doubly_stochasticable(g, method=args.method)
    lines = [
        f"n={g.n}",
        f"edges={g.num_edges}",
        f"connectivity={report.kind.value}",
        f"strongly_connected={_flag(report.kind.value == 'strongly_connected')}",
        f"weight_balanced={_flag(bool(is_weight_balanced(g)))}",
        f"weight_balanceable={_flag(bool(balanceable))}",
        f"doubly_stochastic={_flag(is_doubly_stochastic(g.matrix()))}",
        f"doubly_stochasticable={_flag(bool(ds))}",
        f"method={args.method}",
    ]
    if balanceable.witness_edge is not None:
        lines.append(f"edge_outside_cycle={balanceable.witness_edge[0]}->{balanceable.witness_edge[1]}")
    if ds:
        lines += _graph_lines("certificate", ds.certificate)
        _write_graph(args, ds.certificate)
    else:
        lines.append(f"reason={ds.reason}")
    _emit(args, lines)
    return EXIT_OK if balanceable and ds else EXIT_NEGATIVE


def _policy(arg: str):
    if arg in ("lowest-index", "lowest_index"):
        return "lowest_index"
    if arg.startswith("replay="):
        return _load_replay(arg[len("replay="):])
    raise UsageError(f"unknown policy {arg!r}; use lowest-index or replay=FILE")


def cmd_balance(args) -> int:
    g = _load_graph(args)
    policy = _policy(args.policy)
    if isinstance(policy, Replay):
        if policy.algorithm != args.algo:
            raise UsageError(f"replay file is for {policy.algorithm}, not {args.algo}")
        policy = policy.rounds
    run = run_wbda if args.algo == "wbda" else run_wbmda
    trace = run(g, policy, args.max_rounds)
    _write_trace(args, trace)
    _write_graph(args, trace.final)
    lines = [
        f"algorithm={trace.algorithm}",
        f"policy={trace.policy}",
        f"status={trace.status}",
        f"rounds={trace.rounds}",
        "lyapunov=" + ",".join(format_weight(v) for v in trace.lyapunov_values),
    ] + _graph_lines("weights", trace.final)
    _emit(args, lines)
    return EXIT_OK if trace.converged else EXIT_NEGATIVE


def cmd_dsify(args) -> int:
    g = _load_graph(args)
    if args.cregular:
        return _dsify_cregular(args, g)
    if not is_strongly_connected(g):
        raise NotStronglyConnected("the self-loop procedure requires a strongly connected digraph")
    trace = run_wbda(g)
    _write_trace(args, trace)
    result = dsify_with_self_loops(g, balanced=trace.final)
    _write_graph(args, result)
    _emit(args, ["method=self_loops", f"doubly_stochastic={_flag(is_doubly_stochastic(result.matrix()))}"]
          + _graph_lines("matrix", result))
    return EXIT_OK


def _dsify_cregular(args, g: WeightedDigraph) -> int:
    replay = None
    strict = not args.relaxed_guard
    if args.schedule.startswith("replay="):
        rep = _load_replay(args.schedule[len("replay="):])
        if rep.algorithm != "cregular":
            raise UsageError("the schedule file is not a C-regular replay")
        replay = rep.rounds
        strict = rep.strict_backward_guard and not args.relaxed_guard
        C = rep.C if args.c is None else _constant(args.c, g)
    elif args.schedule in ("sequential", "synchronous"):
        C = _constant(args.c or "auto", g)
    else:
        raise UsageError(f"unknown schedule {args.schedule!r}")
    result = run_cregular(g, C, args.max_steps, replay=replay, strict_backward_guard=strict,
                          schedule="sequential" if replay is not None else args.schedule)
    _write_trace(args, result.trace)
    lines = [
        "method=cregular",
        f"C={C}",
        f"backward_guard={'strict' if strict else 'relaxed'}",
        f"verdict={result.verdict}",
        f"iterations={result.iterations}",
    ]
    if result.announcer is not None:
        lines.append(f"announced_by={result.announcer}")
    if result.assignment is not None:
        lines += _graph_lines("weights", result.assignment)
        _write_graph(args, result.assignment)
    _emit(args, lines)
    return EXIT_OK if result.verdict == "c_regular" else EXIT_NEGATIVE


def _constant(arg: str, g: WeightedDigraph) -> int:
    if arg == "auto":
        return g.num_edges - g.n + 1
    try:
        return int(arg)
    except ValueError:
        raise UsageError(f"--c expects an integer or 'auto', got {arg!r}") from None


def cmd_cycles(args) -> int:
    g = _load_graph(args)
    kind = "ds_set" if args.ds_set else "principal"
    try:
        cert = ds_cycle_set(g) if args.ds_set else principal_cycle_set(g)
    except (NotDoublyStochasticable, NotSemiconnected, NotStronglyConnected) as exc:
        _emit(args, [f"kind={kind}", "exists=false", f"reason={type(exc).__name__}"])
        return EXIT_NEGATIVE
    lines = [f"kind={kind}", "exists=true", f"cardinality={cert.cardinality}"]
    for m in cert.members:
        parts = [" ".join(map(str, c)) for c in m.cycles] + [f"[{v}]" for v in m.isolated]
        lines.append("member: " + " | ".join(f"({p})" for p in parts))
    _emit(args, lines)
    return EXIT_OK


def _cross_check(g: WeightedDigraph, C: int | None, strict: bool) -> tuple[dict[str, str], bool]:
    C = g.num_edges - g.n + 1 if C is None else C
    cover = bool(is_doubly_stochasticable(g, method="cycle_cover"))
    flow = flow_feasibility_oracle(g, C).feasible
    protocol = run_cregular(g, C, strict_backward_guard=strict).verdict
    agree = {cover, flow} == {protocol == "c_regular"} and protocol in ("c_regular", "not_c_regular")
    row = {"C": str(C), "cycle_cover": _flag(cover), "flow": _flag(flow), "protocol": protocol}
    return row, agree


def cmd_oracle(args) -> int:
    if not args.cross_check:
        raise UsageError("oracle needs --cross-check")
    strict = not args.relaxed_guard
    C = None if args.c in (None, "auto") else int(args.c)
    if args.input:
        g = _load_graph(args)
        row, agree = _cross_check(g, C, strict)
        _emit(args, [f"{k}={v}" for k, v in row.items()] + [f"agree={_flag(agree)}"])
        return EXIT_OK if agree else EXIT_NEGATIVE
    rng = random.Random(args.seed)
    lines, disagreements = [], 0
    for t in range(args.samples):
        n = rng.randint(args.min_n, args.max_n)
        g = random_strongly_connected(n, rng, extra_edge_prob=rng.random() * 0.6)
        row, agree = _cross_check(g, C, strict)
        disagreements += not agree
        lines.append(f"sample={t} n={n} edges={g.num_edges} " + " ".join(f"{k}={v}" for k, v in row.items())
                     + f" agree={_flag(agree)}")
    lines.append(f"samples={args.samples} disagreements={disagreements}")
    _emit(args, lines)
    return EXIT_OK if disagreements == 0 else EXIT_NEGATIVE


def _sizes(arg: str) -> list[int]:
    out: list[int] = []
    for part in arg.split(","):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 2:
        raise UsageError("--sizes needs sizes >= 2, e.g. 4-14 or 4,6,8")
    return out


def cmd_bench(args) -> int:
    report = benchmark_rounds(_sizes(args.sizes), args.trials, seed=args.seed, algorithm=args.algo)
    lines = ["n,trials,mean_rounds,max_rounds,bound_n4,within_bound"]
    ok = True
    for r in report.rows:
        within = r.max_rounds <= r.bound
        ok &= within
        lines.append(f"{r.n},{r.trials},{r.mean_rounds:.3f},{r.max_rounds},{r.bound},{_flag(within)}")
    exp = "n/a" if report.fitted_exponent is None else f"{report.fitted_exponent:.3f}"
    lines.append(f"fitted_exponent={exp}")
    _emit(args, lines)
    return EXIT_OK if ok else EXIT_NEGATIVE


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="graph file, '-' for stdin, or fixture:NAME")
    common.add_argument("--format", choices=["json", "dot", "dot_subset", "edge_list"], help="input format")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--trace", help="write the round trace (.csv or .json)")
    common.add_argument("--graph-out", help="write the resulting graph (.json, .dot, or edge list)")
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")

    parser = argparse.ArgumentParser(
        prog="digraph-balance",
        description="Weight-balanced and doubly stochastic weightings of digraphs, in exact arithmetic.",
        epilog="exit status: 0 success or positive verdict, 1 negative verdict, 2 usage or input error",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="connectivity and balanceability verdicts")
    p.add_argument("--method", choices=["cycle_cover", "flow"], default="cycle_cover")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("balance", parents=[common], help="run a weight-balancing protocol")
    p.add_argument("--algo", choices=["wbda", "wbmda"], default="wbda")
    p.add_argument("--policy", default="lowest-index", help="lowest-index or replay=FILE")
    p.add_argument("--max-rounds", type=int)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("dsify", parents=[common], help="build a doubly stochastic weighting")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--self-loops", action="store_true", help="balance, then pad with self-loops (default)")
    mode.add_argument("--cregular", action="store_true", help="run the C-regular load/height protocol")
    p.add_argument("--c", help="regularity constant or 'auto' (|E|-|V|+1)")
    p.add_argument("--schedule", default="sequential", help="sequential, synchronous, or replay=FILE")
    p.add_argument("--relaxed-guard", action="store_true", help="admit backward pushes that leave weight exactly 1")
    p.add_argument("--max-steps", type=int)
    p.set_defaults(func=cmd_dsify)

    p = sub.add_parser("cycles", parents=[common], help="minimum cycle covers")
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--principal", action="store_true", help="principal cycle set (default)")
    kind.add_argument("--ds-set", action="store_true", help="cover by spanning cycle unions")
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("oracle", parents=[common], help="compare the three doubly-stochasticable deciders")
    p.add_argument("--cross-check", action="store_true")
    p.add_argument("--c", help="regularity constant or 'auto'")
    p.add_argument("--relaxed-guard", action="store_true")
    p.add_argument("--samples", type=int, default=20, help="random graphs when no --input is given")
    p.add_argument("--min-n", type=int, default=2)
    p.add_argument("--max-n", type=int, default=6)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", parents=[common], help="round counts of the mirror protocol")
    p.add_argument("--sizes", default="4-14")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--algo", choices=["wbda", "wbmda"], default="wbmda")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, CTooSmallForDegrees, InvalidChoice, MethodSizeExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotStronglyConnected as exc:
        print(f"not strongly connected: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except DigraphBalanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
