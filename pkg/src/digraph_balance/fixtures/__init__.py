"""Bundled example graphs and recorded replay schedules."""

from __future__ import annotations

from importlib import resources

from ..graph import WeightedDigraph
from ..io import Replay, parse_json_document, parse_replay

GRAPHS = ("fig1", "fig2a", "fig2b", "fig6", "fig9")
REPLAYS = {
    "fig4": "fig4.choices.json",
    "fig7": "fig7.choices.json",
    "fig8": "fig8.choices.json",
    "fig10": "fig10.schedule.json",
}


def fixture_text(filename: str) -> str:
    return resources.files(__name__).joinpath(filename).read_text()


def load_graph(name: str) -> WeightedDigraph:
    if name not in GRAPHS:
        raise KeyError(f"no bundled graph {name!r}; available: {', '.join(GRAPHS)}")
    return parse_json_document(fixture_text(f"{name}.json")).graph


def load_replay(name: str) -> Replay:
    if name not in REPLAYS:
        raise KeyError(f"no bundled replay {name!r}; available: {', '.join(REPLAYS)}")
    return parse_replay(fixture_text(REPLAYS[name]))
