"""Level-bucketed searches that attach shortcut edges to a hub vertex.

``shortcut_in`` walks backwards from the ball around a negative vertex r and
connects vertices whose distance to r crosses the threshold to the hub of r.
``shortcut_out`` is the mirror image on the outgoing side.
"""
from __future__ import annotations

from typing import TYPE_CHECKING

from .errors import InvariantViolation
from .graph_core import Kind
from .preprocess import ceil_log2

if TYPE_CHECKING:
    from .shortcut_engine import IterationState


def threshold_crossing_index(sorted_weights: list[int], d_v: int, delta: int) -> tuple[int, int]:
    """Smallest 1-based j with ``w_j + d_v - delta < 0`` (k if none) and ceil(log2(k - j + 1)).

    ``sorted_weights`` must be non-increasing and nonempty.
    """
    k = len(sorted_weights)
    if k == 0:
        raise ValueError("empty weight list")
    limit = delta - d_v
    lo, hi = 0, k
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_weights[mid] < limit:
            hi = mid
        else:
            lo = mid + 1
    j = lo + 1 if lo < k else k
    return j, ceil_log2(k - j + 1)


class _Buckets:
    """Per-level vertex sets with a single-processing check."""

    def __init__(self, state: "IterationState", label: str):
        self.state = state
        self.G = state.G
        self.t = state.t
        self.d: dict[int, int] = {}
        self.levels: list[set[int]] = [set() for _ in range(self.t + 1)]
        self.current = self.t + 1
        self.done: set[int] = set()
        self.label = label

    def push(self, v: int, value: int) -> None:
        lvl = self.G.meta[v].level
        if v in self.done or lvl >= self.current:
            raise InvariantViolation(
                f"{self.label}: vertex {v} (level {lvl}) pushed while processing level {self.current}")
        old = self.d.get(v)
        if old is None or value < old:
            self.d[v] = value
        self.levels[lvl].add(v)

    def drain(self):
        for lvl in range(self.t, -1, -1):
            self.current = lvl
            for v in sorted(self.levels[lvl]):
                self.done.add(v)
                self.state.counters.search_pops += 1
                yield v, self.d[v]
        self.current = -1


def shortcut_in(state: "IterationState", r: int) -> None:
    G = state.G
    meta = G.meta
    delta = state.thresholds.delta[r]
    hub = state.hubs[r]
    A_in = state.aux.A_in
    bk = _Buckets(state, f"in-search of {r}")
    for v, dv in state.thresholds.U_in[r].items():
        bk.d[v] = dv
        bk.levels[meta[v].level].add(v)
    for v, dv in bk.drain():
        if dv >= delta:
            raise InvariantViolation(f"in-search value {dv} not below threshold {delta}")
        kv = meta[v].kind
        if kv == Kind.IN_STEINER:
            p = meta[v].parent
            bk.push(p, dv - G.weight(v, p))
            continue
        if kv == Kind.OUT_STEINER:
            p = meta[v].parent
            W = G.weight(p, v) + dv - delta
            if W >= 0:
                state.add_edge_in(p, hub, W)
        A = A_in[v]
        if not A:
            continue
        if meta[v].heavy is False:
            for u, wu in A:
                W = wu + dv - delta
                if W >= 0:
                    state.add_edge_in(u, hub, W)
            continue
        k = len(A)
        j, ell = threshold_crossing_index([w for _, w in A], dv, delta)
        if ell <= ceil_log2(k) - 1:
            vl = state.gadgets_in[v][ell]
            state.add_edge_in(vl, hub, G.weight(vl, v) + dv - delta)
        for i in range(max(k - (1 << ell) + 1, 1), k + 1):
            u, wu = A[i - 1]
            mu = meta[u]
            if mu.kind == Kind.IN_STEINER and mu.heavy is False:
                W = wu + dv - G.weight(u, mu.parent)
                if W < delta:
                    bk.push(mu.parent, W)
            else:
                W = wu + dv - delta
                if W >= 0:
                    state.add_edge_in(u, hub, W)


def shortcut_out(state: "IterationState", r: int) -> None:
    G = state.G
    meta = G.meta
    delta = state.thresholds.delta[r]
    hub = state.hubs[r]
    A_out = state.aux.A_out
    bk = _Buckets(state, f"out-search of {r}")
    for v, dv in state.thresholds.U_out[r].items():
        bk.d[v] = dv
        bk.levels[meta[v].level].add(v)
    for v, dv in bk.drain():
        if dv >= -delta:
            raise InvariantViolation(f"out-search value {dv} not below {-delta}")
        kv = meta[v].kind
        if kv == Kind.OUT_STEINER:
            p = meta[v].parent
            bk.push(p, dv - G.weight(p, v))
            continue
        if kv == Kind.IN_STEINER:
            p = meta[v].parent
            W = dv + G.weight(v, p) + delta
            if W >= 0:
                state.add_edge_out(hub, p, W)
        A = A_out[v]
        if not A:
            continue
        if meta[v].heavy is False:
            for u, wu in A:
                W = dv + wu + delta
                if W >= 0:
                    state.add_edge_out(hub, u, W)
            continue
        k = len(A)
        j, ell = threshold_crossing_index([w for _, w in A], dv, -delta)
        if ell <= ceil_log2(k) - 1:
            vl = state.gadgets_out[v][ell]
            state.add_edge_out(hub, vl, dv + G.weight(v, vl) + delta)
        for i in range(max(k - (1 << ell) + 1, 1), k + 1):
            u, wu = A[i - 1]
            mu = meta[u]
            if mu.kind == Kind.OUT_STEINER and mu.heavy is False:
                W = dv + wu - G.weight(mu.parent, u)
                if W < -delta:
                    bk.push(mu.parent, W)
            else:
                W = dv + wu + delta
                if W >= 0:
                    state.add_edge_out(hub, u, W)
