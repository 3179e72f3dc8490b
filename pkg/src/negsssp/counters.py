"""Run counters for the quantities the cost analysis charges."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class IterationCounters:
    t: int
    vertices_before: int = 0
    vertices_after: int = 0
    edges_after: int = 0
    eta: int = 0
    b: float = 1.0
    lam: float = 0.0
    h: int = 0
    ball_sum: int = 0
    ball_sq_sum: int = 0
    new_heavy: int = 0
    new_in_steiner: int = 0
    new_out_steiner: int = 0
    new_n_steiner: int = 0
    new_twins: int = 0
    add_edge_calls: int = 0
    add_edge_max_depth: int = 0
    add_edge_max_work: int = 0
    deferred_in: int = 0
    deferred_out: int = 0
    search_pops: int = 0
    relaxations: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RunCounters:
    edge_insertions: int = 0
    relaxations: int = 0
    base_case: bool = False
    iterations: list[IterationCounters] = field(default_factory=list)
    final_vertices: int = 0
    final_edges: int = 0
    zeta: int = 0

    def current(self) -> IterationCounters | None:
        return self.iterations[-1] if self.iterations else None

    def as_dict(self) -> dict:
        return {
            "edge_insertions": self.edge_insertions,
            "relaxations": self.relaxations,
            "base_case": self.base_case,
            "final_vertices": self.final_vertices,
            "final_edges": self.final_edges,
            "zeta": self.zeta,
            "iterations": [it.as_dict() for it in self.iterations],
        }
