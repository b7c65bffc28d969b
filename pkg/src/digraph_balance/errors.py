"""Exception types raised across the package."""

from __future__ import annotations


class DigraphBalanceError(Exception):
    """Base class for every error raised by this package."""


class GraphTooLarge(DigraphBalanceError):
    pass


class NotSemiconnected(DigraphBalanceError):
    pass


class NotStronglyConnected(DigraphBalanceError):
    pass


class NotDoublyStochasticable(DigraphBalanceError):
    pass


class NotDoublyStochastic(DigraphBalanceError):
    pass


class InvalidChoice(DigraphBalanceError):
    """A replayed protocol choice lies outside the legal choice set of its round."""


class ZeroRow(DigraphBalanceError):
    pass


class CTooSmall(DigraphBalanceError):
    """Requested regularity constant is below the DS-character of the graph."""


class CTooSmallForDegrees(DigraphBalanceError):
    """Requested regularity constant is below the maximum unweighted degree."""


class MethodSizeExceeded(DigraphBalanceError):
    pass


class MaxStepsExceeded(DigraphBalanceError):
    """A protocol run hit its step budget without reaching a verdict."""


class ParseError(DigraphBalanceError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class DuplicateEdge(ParseError):
    pass


class BadWeight(ParseError):
    pass
