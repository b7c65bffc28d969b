"""Graph and trace serialization: JSON documents, a DOT subset, plain edge lists."""

from __future__ import annotations

import csv
import io as _io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import BadWeight, DuplicateEdge, ParseError
from .graph import WeightedDigraph
from .trace import RoundTrace

FORMAT_VERSION = 1
FORMATS = ("json", "dot", "edge_list")


def format_weight(w: Fraction) -> str:
    """Exact rational text: ``"3"`` or ``"3/2"``."""
    return str(Fraction(w))


def parse_weight(text: Any, line: int | None = None, column: int | None = None) -> Fraction:
    """Parse a positive exact weight from ``"p/q"``, an integer, or a decimal string."""
    if isinstance(text, bool) or isinstance(text, float):
        raise BadWeight(f"weight {text!r} must be an exact string or integer", line, column)
    try:
        w = Fraction(text.strip() if isinstance(text, str) else text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise BadWeight(f"cannot read weight {text!r}", line, column) from None
    if w <= 0:
        raise BadWeight(f"weight {text!r} is not positive", line, column)
    return w


@dataclass
class GraphDocument:
    graph: WeightedDigraph
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"version": FORMAT_VERSION, "n": self.graph.n}
        if self.graph.allows_self_loops:
            doc["self_loops"] = True
        doc["edges"] = [
            {"i": i, "j": j, "weight": format_weight(w)} for (i, j), w in self.graph.weights.items()
        ]
        if self.metadata:
            doc["metadata"] = self.metadata
        return doc


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _build(n: int, edges: list[tuple[int, int, Fraction, int | None, int | None]], loops: bool) -> WeightedDigraph:
    weights: dict[tuple[int, int], Fraction] = {}
    for i, j, w, line, col in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"edge ({i}, {j}) out of range for n={n}", line, col)
        if (i, j) in weights:
            raise DuplicateEdge(f"duplicate edge ({i}, {j})", line, col)
        if i == j and not loops:
            raise ParseError(f"self-loop ({i}, {i}) not allowed here", line, col)
        weights[(i, j)] = w
    return WeightedDigraph(n, weights, loops)


# -- JSON ------------------------------------------------------------------------


def parse_json_document(text: str) -> GraphDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1, 1)
    version = doc.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported version {version!r}")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("'n' must be a positive integer")
    edges = []
    for k, e in enumerate(doc.get("edges", [])):
        try:
            if isinstance(e, dict):
                i, j, w = e["i"], e["j"], e.get("weight", "1")
            else:
                i, j, *rest = e
                w = rest[0] if rest else "1"
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"edge record {k} is malformed") from None
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (i, j)):
            raise ParseError(f"edge record {k} needs integer endpoints")
        edges.append((i, j, parse_weight(w), None, None))
    graph = _build(n, edges, bool(doc.get("self_loops", False)))
    return GraphDocument(graph, dict(doc.get("metadata", {})))


# -- edge list --------------------------------------------------------------------


def parse_edge_list(text: str) -> WeightedDigraph:
    """Lines ``i j [weight]``; ``#`` starts a comment; an optional ``n N`` line fixes the size."""
    n = None
    loops = False
    edges = []
    for ln, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        fields = body.split()
        if not fields:
            continue
        col = raw.index(fields[0]) + 1
        if fields[0] == "n":
            if len(fields) != 2 or not fields[1].isdigit() or n is not None:
                raise ParseError("expected a single 'n <count>' header", ln, col)
            n = int(fields[1])
            continue
        if fields[0] == "self_loops":
            loops = True
            continue
        if len(fields) not in (2, 3) or not (fields[0].isdigit() and fields[1].isdigit()):
            raise ParseError("expected 'i j [weight]'", ln, col)
        w = parse_weight(fields[2], ln, raw.index(fields[2], col) + 1) if len(fields) == 3 else Fraction(1)
        edges.append((int(fields[0]), int(fields[1]), w, ln, col))
    if n is None:
        n = max((max(i, j) for i, j, *_ in edges), default=0) + 1
    if n < 1:
        raise ParseError("empty graph needs an 'n' header")
    return _build(n, edges, loops)


def serialize_edge_list(g: WeightedDigraph) -> str:
    lines = [f"n {g.n}"]
    if g.allows_self_loops:
        lines.append("self_loops")
    lines += [f"{i} {j} {format_weight(w)}" for (i, j), w in g.weights.items()]
    return "\n".join(lines) + "\n"


# -- DOT subset --------------------------------------------------------------------

_DOT_TOKEN = re.compile(
    r"""(?P<ws>\s+|//[^\n]*|\#[^\n]*)
      | (?P<arrow>->)
      | (?P<punct>[{}\[\];,=])
      | (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<id>[A-Za-z0-9_./]+)""",
    re.VERBOSE,
)


def _dot_tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _DOT_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", *_line_col(text, pos))
        if m.lastgroup != "ws":
            value = m.group()
            if m.lastgroup == "string":
                value = value[1:-1].replace('\\"', '"')
            yield m.lastgroup, value, pos
        pos = m.end()


def parse_dot(text: str) -> WeightedDigraph:
    """``digraph [name] { a; a -> b [weight="3/2"]; }``; vertices indexed by first appearance."""
    toks = list(_dot_tokens(text))
    k = 0

    def where(idx: int) -> tuple[int, int]:
        return _line_col(text, toks[idx][2] if idx < len(toks) else len(text))

    def expect(kind: str, value: str | None = None) -> str:
        nonlocal k
        if k >= len(toks) or toks[k][0] != kind or (value is not None and toks[k][1] != value):
            got = toks[k][1] if k < len(toks) else "end of input"
            raise ParseError(f"expected {value or kind}, got {got!r}", *where(k))
        k += 1
        return toks[k - 1][1]

    def peek(value: str) -> bool:
        return k < len(toks) and toks[k][1] == value and toks[k][0] in ("punct", "arrow")

    if k < len(toks) and toks[k][1] == "strict":
        raise ParseError("strict digraphs are not supported", *where(k))
    expect("id", "digraph")
    if k < len(toks) and toks[k][0] in ("id", "string"):
        k += 1
    expect("punct", "{")
    index: dict[str, int] = {}
    edges = []

    def node() -> int:
        nonlocal k
        if k >= len(toks) or toks[k][0] not in ("id", "string"):
            raise ParseError("expected a vertex name", *where(k))
        name = toks[k][1]
        k += 1
        return index.setdefault(name, len(index))

    while not peek("}"):
        start = k
        a = node()
        if peek("->"):
            k += 1
            b = node()
            weight = Fraction(1)
            if peek("["):
                k += 1
                while not peek("]"):
                    key = expect("id")
                    expect("punct", "=")
                    vk = k
                    if k >= len(toks) or toks[k][0] not in ("id", "string"):
                        raise ParseError("expected an attribute value", *where(k))
                    val = toks[k][1]
                    k += 1
                    if key == "weight":
                        weight = parse_weight(val, *where(vk))
                    if peek(","):
                        k += 1
                expect("punct", "]")
            edges.append((a, b, weight, *where(start)))
        if peek(";"):
            k += 1
    expect("punct", "}")
    if k != len(toks):
        raise ParseError("trailing input after closing brace", *where(k))
    if not index:
        raise ParseError("a digraph needs at least one vertex", *where(start if toks else 0))
    loops = any(a == b for a, b, *_ in edges)
    return _build(len(index), edges, loops)


def serialize_dot(g: WeightedDigraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    lines += [f"  v{i};" for i in range(g.n)]
    lines += [f'  v{i} -> v{j} [weight="{format_weight(w)}"];' for (i, j), w in g.weights.items()]
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- dispatch -------------------------------------------------------------------------


def _normalize_format(fmt: str) -> str:
    fmt = {"dot_subset": "dot", "edges": "edge_list", "edge-list": "edge_list"}.get(fmt, fmt)
    if fmt not in FORMATS:
        raise ValueError(f"unknown graph format {fmt!r}; choose from {', '.join(FORMATS)}")
    return fmt


def guess_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    return {".json": "json", ".dot": "dot", ".gv": "dot"}.get(suffix, "edge_list")


def parse_graph(text: str, format: str = "json") -> WeightedDigraph:
    fmt = _normalize_format(format)
    if fmt == "json":
        return parse_json_document(text).graph
    if fmt == "dot":
        return parse_dot(text)
    return parse_edge_list(text)


def serialize_graph(g: WeightedDigraph, format: str = "json", metadata: dict | None = None) -> str:
    fmt = _normalize_format(format)
    if fmt == "json":
        return json.dumps(GraphDocument(g, metadata or {}).to_json(), indent=2) + "\n"
    if fmt == "dot":
        return serialize_dot(g)
    return serialize_edge_list(g)


def read_graph(path: str | Path, format: str | None = None) -> WeightedDigraph:
    return parse_graph(Path(path).read_text(), format or guess_format(path))


# -- traces ----------------------------------------------------------------------------


def _changes_text(record) -> str:
    return ";".join(f"{c.i}->{c.j}:{format_weight(c.old)}->{format_weight(c.new)}" for c in record.modified)


def trace_document(trace: RoundTrace) -> dict[str, Any]:
    records = []
    for r in trace.records:
        rec: dict[str, Any] = {
            "round": r.round,
            "V_wb": format_weight(r.lyapunov),
            "imbalances": [format_weight(x) for x in r.imbalances],
            "modified": [
                {"i": c.i, "j": c.j, "old": format_weight(c.old), "new": format_weight(c.new)} for c in r.modified
            ],
            "weights": [{"i": i, "j": j, "weight": format_weight(w)} for (i, j), w in r.weights.weights.items()],
        }
        if r.actions:
            rec["actions"] = list(r.actions)
        if r.state is not None:
            rec["state"] = r.state
        records.append(rec)
    detail = {k: v for k, v in trace.detail.items()}
    return {
        "version": FORMAT_VERSION,
        "algorithm": trace.algorithm,
        "policy": trace.policy,
        "verdict": trace.status,
        "total_rounds": trace.rounds,
        "detail": detail,
        "records": records,
    }


def serialize_trace(trace: RoundTrace, format: str = "json") -> str:
    """JSON: the full trace document. CSV: ``round,V_wb,modified_edges`` per round."""
    if format == "json":
        return json.dumps(trace_document(trace), indent=2) + "\n"
    if format != "csv":
        raise ValueError(f"unknown trace format {format!r}")
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["round", "V_wb", "modified_edges"])
    for r in trace.records:
        writer.writerow([r.round, format_weight(r.lyapunov), _changes_text(r)])
    return buf.getvalue()


# -- replay files --------------------------------------------------------------------------


@dataclass(frozen=True)
class Replay:
    """A recorded choice schedule for one protocol run."""

    algorithm: str
    rounds: list
    graph: str | None = None
    C: int | None = None
    strict_backward_guard: bool = True
    metadata: dict[str, Any] = field(default_factory=dict)


def parse_replay(text: str) -> Replay:
    """Balancing replays hold ``rounds``: per round a ``{vertex: target}`` map.

    C-regular replays hold ``steps``: per step a list of
    ``{"action", "vertex", "target"}`` records, plus ``C`` and ``backward_guard``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    algorithm = doc.get("algorithm")
    if algorithm in ("wbda", "wbmda"):
        try:
            rounds = [{int(k): int(v) for k, v in r.items()} for r in doc["rounds"]]
        except (KeyError, AttributeError, ValueError, TypeError):
            raise ParseError("'rounds' must be a list of vertex->target maps") from None
        return Replay(algorithm, rounds, doc.get("graph"), metadata=doc.get("metadata", {}))
    if algorithm == "cregular":
        guard = doc.get("backward_guard", "strict")
        if guard not in ("strict", "relaxed"):
            raise ParseError(f"backward_guard must be 'strict' or 'relaxed', got {guard!r}")
        steps = doc.get("steps")
        if not isinstance(steps, list) or not isinstance(doc.get("C"), int):
            raise ParseError("a C-regular replay needs integer 'C' and a 'steps' list")
        return Replay(algorithm, steps, doc.get("graph"), doc["C"], guard == "strict", doc.get("metadata", {}))
    raise ParseError(f"unknown replay algorithm {algorithm!r}")


def read_replay(path: str | Path) -> Replay:
    return parse_replay(Path(path).read_text())
