"""Exception types shared across the package."""
from __future__ import annotations


class NegCycle(Exception):
    """A negative cycle was found.

    ``cycle`` lists the vertices in traversal order (the closing edge returns
    to ``cycle[0]``); ``weight`` is the total weight.  ``space`` tells which
    graph the vertex ids refer to: ``"input"`` for the caller's graph,
    ``"working"`` for the internal well-behaved graph.
    """

    def __init__(self, cycle: list[int] | None = None, weight: int | None = None,
                 space: str = "working", note: str = ""):
        self.cycle = list(cycle) if cycle else []
        self.weight = weight
        self.space = space
        self.note = note
        super().__init__(f"negative cycle ({space}) weight={weight} vertices={self.cycle} {note}".strip())


class PotentialInvalid(Exception):
    """Applying a potential made a non-designated edge negative."""


class PreconditionViolated(Exception):
    """A procedure was called outside its contract (an implementation bug)."""


class InvariantViolation(Exception):
    """An internal invariant check failed."""


class HopResidueError(Exception):
    """Final two-hop distances differ from three-hop distances."""


class EmptySampleRetry(Exception):
    """Random sampling kept producing an empty set."""


class ParseError(Exception):
    """Malformed graph file."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")
