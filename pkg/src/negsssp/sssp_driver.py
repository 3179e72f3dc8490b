"""End-to-end solver: transform, iterate the shortcut step, extract 2-hop distances."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .counters import RunCounters
from .errors import HopResidueError, NegCycle
from .graph_core import InputGraph, WeightedDigraph, to_well_behaved
from .hop_distances import hop_sssp
from .preprocess import EXACT_ORACLE, SampledHook, iteration_count, label_correcting
from .shortcut_engine import DeferredEdgeSets, Hook, ShortcutConfig, shortcut_iteration

BASE_HOPS = 100


@dataclass
class SolveConfig:
    mode: str = EXACT_ORACLE
    seed: int = 0
    gamma_scale: float = 1.0
    reps_constant: float = 8.0
    base_threshold: int = 100
    lam_override: float | None = None
    entry_twins: bool = True
    sampled_hook: SampledHook | None = None
    hook: Hook | None = None

    def shortcut_config(self) -> ShortcutConfig:
        return ShortcutConfig(mode=self.mode, gamma_scale=self.gamma_scale,
                              reps_constant=self.reps_constant, lam_override=self.lam_override,
                              entry_twins=self.entry_twins, sampled_hook=self.sampled_hook)

    def as_dict(self) -> dict:
        return {"mode": self.mode, "seed": self.seed, "gamma_scale": self.gamma_scale,
                "reps_constant": self.reps_constant, "base_threshold": self.base_threshold,
                "lam_override": self.lam_override, "entry_twins": self.entry_twins}


@dataclass
class SolveResult:
    """Either distances (None for unreachable) or a negative cycle of input edges."""

    distances: list[int | None] | None = None
    cycle: list[tuple[int, int, int]] | None = None
    counters: RunCounters = field(default_factory=RunCounters)

    @property
    def has_cycle(self) -> bool:
        return self.cycle is not None

    @property
    def cycle_weight(self) -> int | None:
        return None if self.cycle is None else sum(w for _, _, w in self.cycle)


# ----------------------------------------------------------------------
# reachability pruning

def _reachable_subgraph(H: InputGraph, s: int) -> tuple[InputGraph, list[int]]:
    """Subgraph induced by vertices reachable from s, relabelled in ascending id order."""
    adj: list[list[int]] = [[] for _ in range(H.n)]
    for u, v, _ in H.edges:
        adj[u].append(v)
    seen = [False] * H.n
    seen[s] = True
    stack = [s]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    keep = [v for v in range(H.n) if seen[v]]
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[u], index[v], w) for u, v, w in H.edges if seen[u] and seen[v]]
    return InputGraph(len(keep), edges), keep


# ----------------------------------------------------------------------
# certificates

def _min_input_weights(H: InputGraph) -> dict[tuple[int, int], int]:
    best: dict[tuple[int, int], int] = {}
    for u, v, w in H.edges:
        if (u, v) not in best or w < best[(u, v)]:
            best[(u, v)] = w
    return best


def map_cycle_to_input(cycle: list[int], n: int, H: InputGraph) -> list[tuple[int, int, int]] | None:
    """Translate a cycle of the transformed graph into input edges.

    Works when the cycle only uses transform vertices (ids below 2n).  A step
    bar v -> x stands for the input edge (v, x); a step bar v -> v is a
    zero-weight detour and is dropped.
    """
    if not cycle or any(v >= 2 * n for v in cycle):
        return None
    weights = _min_input_weights(H)
    k = len(cycle)
    out: list[tuple[int, int, int]] = []
    for i, a in enumerate(cycle):
        b = cycle[(i + 1) % k]
        if a >= n and b < n and b != a - n:
            key = (a - n, b)
            if key not in weights:
                return None
            out.append((a - n, b, weights[key]))
    if not out or sum(w for _, _, w in out) >= 0:
        return None
    return out


def _certificate(exc: NegCycle, H: InputGraph, G0: WeightedDigraph) -> list[tuple[int, int, int]]:
    if exc.space == "input" and len(exc.cycle) == 1:
        u = exc.cycle[0]
        return [(u, u, exc.weight)]
    mapped = map_cycle_to_input(exc.cycle, H.n, H)
    if mapped is not None:
        return mapped
    return find_cycle_certificate(H, G0)


def find_cycle_certificate(H: InputGraph, G0: WeightedDigraph) -> list[tuple[int, int, int]]:
    """Search the untouched transformed graph for a negative cycle and map it back."""
    try:
        label_correcting(G0.copy(), {v: 0 for v in range(G0.n)})
    except NegCycle as exc:
        mapped = map_cycle_to_input(exc.cycle, H.n, H)
        if mapped is not None:
            return mapped
        raise HopResidueError(f"negative cycle could not be mapped to input edges: {exc}") from exc
    raise HopResidueError("a negative cycle was reported but none exists in the input")


# ----------------------------------------------------------------------
# phases

def base_case(G: WeightedDigraph, s: int) -> list[int | None]:
    """Distances with enough hops for every simple path; raises NegCycle on a reachable cycle."""
    hops = max(BASE_HOPS, len(G.neg))
    d = hop_sssp(G, [s], hops)
    d_more = hop_sssp(G, [s], hops + 1)
    if d != d_more:
        label_correcting(G, {s: 0})
        raise HopResidueError("hop distances kept improving but no cycle was found")
    return d


def finalize(G: WeightedDigraph, s: int) -> list[int | None]:
    """2-hop distances with the cumulative potential removed, for every vertex.

    Raises HopResidueError when 3 hops still improve on 2 hops.
    """
    d2 = hop_sssp(G, [s], 2)
    d3 = hop_sssp(G, [s], 3)
    n_in = G.n_input
    for v in range(n_in):
        if d2[v] != d3[v]:
            raise HopResidueError(f"vertex {v}: 2-hop distance {d2[v]} but 3-hop distance {d3[v]}")
    phi = G.phi
    return [None if d2[v] is None else d2[v] - phi[s] + phi[v] for v in range(G.n)]


def run_iterations(G: WeightedDigraph, config: SolveConfig, rng: random.Random) -> None:
    n0 = G.n
    F = DeferredEdgeSets()
    sc = config.shortcut_config()
    for t in range(1, iteration_count(n0) + 1):
        shortcut_iteration(G, t, n0, F, sc, rng, config.hook)


def solve_well_behaved(G: WeightedDigraph, s: int, config: SolveConfig) -> list[int | None]:
    """Distances from s in a well-behaved graph (ids of G); raises NegCycle."""
    rng = random.Random(config.seed)
    if len(G.neg) <= config.base_threshold:
        G.counters.base_case = True
        return base_case(G, s)
    run_iterations(G, config, rng)
    return finalize(G, s)


def solve(H: InputGraph, s: int, config: SolveConfig | None = None) -> SolveResult:
    """Single-source distances from s in H, or a negative cycle reachable from s."""
    config = config or SolveConfig()
    if not 0 <= s < H.n:
        raise ValueError(f"source {s} out of range")
    sub, keep = _reachable_subgraph(H, s)
    counters = RunCounters()
    result = SolveResult(counters=counters)
    try:
        G = to_well_behaved(sub, counters)
    except NegCycle as exc:
        u = keep[exc.cycle[0]]
        result.cycle = [(u, u, exc.weight)]
        return result
    G0 = G.copy()
    try:
        d = solve_well_behaved(G, keep.index(s), config)
    except NegCycle as exc:
        cyc = _certificate(exc, sub, G0)
        result.cycle = [(keep[u], keep[v], w) for u, v, w in cyc]
        return result
    except HopResidueError:
        cyc = find_cycle_certificate(sub, G0)
        result.cycle = [(keep[u], keep[v], w) for u, v, w in cyc]
        return result
    dist: list[int | None] = [None] * H.n
    for i, v in enumerate(keep):
        dist[v] = d[i]
    result.distances = dist
    counters.final_vertices = G.n
    counters.final_edges = G.edge_count()
    return result
