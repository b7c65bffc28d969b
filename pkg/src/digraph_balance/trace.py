"""Round-by-round audit records produced by the protocol engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .graph import WeightedDigraph


class ProtocolInvariantError(RuntimeError):
    """A run violated an invariant that every legal evolution must keep."""


@dataclass(frozen=True)
class EdgeChange:
    i: int
    j: int
    old: Fraction
    new: Fraction

    @property
    def delta(self) -> Fraction:
        return self.new - self.old


@dataclass(frozen=True)
class RoundRecord:
    round: int
    weights: WeightedDigraph
    lyapunov: Fraction
    imbalances: tuple[Fraction, ...]
    modified: tuple[EdgeChange, ...] = ()
    actions: tuple[str, ...] = ()
    state: dict[str, Any] | None = None


@dataclass
class RoundTrace:
    algorithm: str
    policy: str
    records: list[RoundRecord] = field(default_factory=list)
    status: str = "running"
    detail: dict[str, Any] = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        """Number of update rounds after the initial snapshot."""
        return len(self.records) - 1

    @property
    def final(self) -> WeightedDigraph:
        return self.records[-1].weights

    @property
    def lyapunov_values(self) -> list[Fraction]:
        return [r.lyapunov for r in self.records]

    @property
    def converged(self) -> bool:
        return self.status in ("converged", "c_regular")
