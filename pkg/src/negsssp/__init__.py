"""Single-source shortest paths with negative edge weights by iterated hop shortcutting."""
from __future__ import annotations

from .errors import HopResidueError, NegCycle, ParseError
from .graph_core import InputGraph
from .sssp_driver import SolveConfig, SolveResult, solve

__all__ = ["HopResidueError", "InputGraph", "NegCycle", "ParseError", "SolveConfig", "SolveResult",
           "solve"]
