"""One shortcutting iteration over a well-behaved graph.

The iteration reweights the graph, picks a threshold per negative vertex,
adds merge edges, builds Steiner gadgets and hub vertices, runs the two
searches, and finally restores well-behavedness.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .counters import IterationCounters
from .errors import InvariantViolation, PreconditionViolated
from .graph_core import AuxLists, Kind, Role, WeightedDigraph, snapshot_aux_lists
from .preprocess import (EXACT_ORACLE, IterationParams, SampledHook, ThresholdTable,
                         ceil_log2, compute_thresholds, estimate_reps, gamma_value,
                         iteration_count, reweight, scale_count)
from .shortcut_search import shortcut_in, shortcut_out


@dataclass
class DeferredEdgeSets:
    """Candidate edges kept until a later potential makes them nonnegative.

    Weights are stored frame-free: ``base = W - phi(u) + phi(v)`` at insertion,
    so the current weight is ``base + phi(u) - phi(v)``.  Entries are kept
    forever; a repeated pair keeps the smaller base.
    """

    F_in: dict[tuple[int, int], int] = field(default_factory=dict)
    F_out: dict[tuple[int, int], int] = field(default_factory=dict)

    def add(self, table: dict[tuple[int, int], int], G: WeightedDigraph,
            u: int, v: int, W: int) -> None:
        base = W - G.phi[u] + G.phi[v]
        old = table.get((u, v))
        if old is None or base < old:
            table[(u, v)] = base

    @staticmethod
    def current(table: dict[tuple[int, int], int], G: WeightedDigraph,
                u: int, v: int) -> int:
        return table[(u, v)] + G.phi[u] - G.phi[v]


@dataclass
class GadgetRecord:
    owner: int
    steiner_ids: list[int]
    snapshot: list[tuple[int, int]]

    @property
    def tau(self) -> int:
        return ceil_log2(len(self.snapshot)) - 1


@dataclass
class ShortcutConfig:
    mode: str = EXACT_ORACLE
    gamma_scale: float = 1.0
    reps_constant: float = 8.0
    lam_override: float | None = None
    entry_twins: bool = True
    sampled_hook: SampledHook | None = None


Hook = Callable[[str, "IterationState"], None]


class IterationState:
    """Everything one iteration reads and writes."""

    def __init__(self, G: WeightedDigraph, t: int, params: IterationParams,
                 F: DeferredEdgeSets, counters: IterationCounters, config: ShortcutConfig):
        self.G = G
        self.t = t
        self.params = params
        self.F = F
        self.counters = counters
        self.config = config
        self.thresholds = ThresholdTable()
        self.aux = AuxLists([], [])
        self.gadgets_in: dict[int, list[int]] = {}
        self.gadgets_out: dict[int, list[int]] = {}
        self.hubs: dict[int, int] = {}
        self.twins: dict[int, int] = {}
        self.new_vertices: list[int] = []
        self._depth = 0
        self._calls = 0

    # ------------------------------------------------------------------
    # vertex creation
    def new_vertex(self, kind: Kind, parent: int | None, heavy: bool | None,
                   role: Role = Role.PLAIN, owner: int | None = None,
                   anc: int | None = None, psi: int = 0, phi: int = 0) -> int:
        v = self.G.add_vertex(kind, self.t, parent, heavy, role, owner, anc, psi, phi)
        self.new_vertices.append(v)
        return v

    def _insert(self, u: int, v: int, w: int) -> None:
        self.G.insert_edge(u, v, w, flagged=w < 0)

    # ------------------------------------------------------------------
    # recursive insertion
    def _enter(self) -> None:
        if self._depth == 0:
            self._calls = 0
            self.counters.add_edge_calls += 1
        self._calls += 1
        self._depth += 1
        c = self.counters
        c.add_edge_max_depth = max(c.add_edge_max_depth, self._depth - 1)
        c.add_edge_max_work = max(c.add_edge_max_work, self._calls)

    def add_edge_in(self, u: int, v: int, W: int) -> None:
        """Insert (u, v, W) and the lifted copies at u's ancestors.

        v is a negative vertex or an N-Steiner vertex.
        """
        G = self.G
        mu = G.meta[u]
        if mu.kind == Kind.IN_STEINER and mu.heavy is False:
            raise PreconditionViolated(f"add_edge_in from light in-Steiner {u}")
        v_is_neg = G.role[v] == Role.NEG
        if not v_is_neg and G.meta[v].kind != Kind.N_STEINER:
            raise PreconditionViolated(f"add_edge_in target {v} is not negative or N-Steiner")
        if W < 0 and not v_is_neg:
            raise PreconditionViolated(f"negative weight {W} into N-Steiner {v}")
        self._enter()
        try:
            self._insert(u, v, W)
            if mu.kind == Kind.IN_STEINER:
                p = mu.parent
                wp = G.weight(u, p)
                if v_is_neg:
                    self.add_edge_in(p, v, W - wp)
                else:
                    W2 = W - wp
                    self.F.add(self.F.F_in, G, p, v, W2)
                    if W2 >= 0:
                        self.add_edge_in(p, v, W2)
                    r = G.meta[v].parent
                    self.add_edge_in(p, r, W - G.rel_weight(r, v) - wp)
            elif mu.kind == Kind.OUT_STEINER:
                p = mu.parent
                self.add_edge_in(p, v, W + G.weight(p, u))
        finally:
            self._depth -= 1

    def add_edge_out(self, u: int, v: int, W: int) -> None:
        """Mirror of add_edge_in: u is a negative vertex or an N-Steiner vertex."""
        G = self.G
        mv = G.meta[v]
        if mv.kind == Kind.OUT_STEINER and mv.heavy is False:
            raise PreconditionViolated(f"add_edge_out into light out-Steiner {v}")
        u_is_neg = G.role[u] == Role.NEG
        if not u_is_neg and G.meta[u].kind != Kind.N_STEINER:
            raise PreconditionViolated(f"add_edge_out source {u} is not negative or N-Steiner")
        if W < 0 and not u_is_neg:
            raise PreconditionViolated(f"negative weight {W} out of N-Steiner {u}")
        self._enter()
        try:
            self._insert(u, v, W)
            if mv.kind == Kind.IN_STEINER:
                p = mv.parent
                self.add_edge_out(u, p, W + G.weight(v, p))
            elif mv.kind == Kind.OUT_STEINER:
                p = mv.parent
                wp = G.weight(p, v)
                if u_is_neg:
                    self.add_edge_out(u, p, W - wp)
                else:
                    W2 = W - wp
                    self.F.add(self.F.F_out, G, u, p, W2)
                    if W2 >= 0:
                        self.add_edge_out(u, p, W2)
                    r = G.meta[u].parent
                    self.add_edge_out(r, p, W - G.weight(u, r) - wp)
        finally:
            self._depth -= 1


# ----------------------------------------------------------------------
# steps

def replay_deferred(state: IterationState) -> None:
    """Insert every deferred edge whose current weight is nonnegative."""
    G, F = state.G, state.F
    for (u, v) in list(F.F_in):
        w = F.current(F.F_in, G, u, v)
        if w >= 0:
            state.add_edge_in(u, v, w)
    for (u, v) in list(F.F_out):
        w = F.current(F.F_out, G, u, v)
        if w >= 0:
            state.add_edge_out(u, v, w)


def simple_merge_in(G: WeightedDigraph, r: int, U_in: dict[int, int]) -> None:
    """Edge (u, bar r) for every bar u in the in-ball: the path u, bar u ~> r, bar r."""
    W = G.nsucc[r][G.bar[r]]
    for ub in sorted(U_in):
        if G.role[ub] != Role.NEG_BAR:
            continue
        u = G.owner[ub]
        G.insert_edge(u, G.bar[r], G.nsucc[u][ub] + U_in[ub] + W, flagged=True)


def simple_merge_out(G: WeightedDigraph, r: int, U_out: dict[int, int]) -> None:
    """Edge (r, bar v) for every negative v in the out-ball: the path r ~> v, bar v."""
    for v in sorted(U_out):
        if G.role[v] != Role.NEG:
            continue
        vb = G.bar[v]
        G.insert_edge(r, vb, U_out[v] + G.nsucc[v][vb], flagged=True)


def build_in_gadget(state: IterationState, v: int, A: list[tuple[int, int]]) -> GadgetRecord:
    """In-Steiner vertices v_0..v_tau, v_l standing for the top k - 2^l in-neighbours."""
    G = state.G
    k = len(A)
    ids: list[int] = []
    for ell in range(ceil_log2(k)):
        idx = k - (1 << ell)
        wl = A[idx - 1][1]
        vl = state.new_vertex(Kind.IN_STEINER, v, None, anc=G.anc[v], psi=wl + G.psi[v])
        ids.append(vl)
        G.insert_edge(vl, v, wl)
        for i in range(idx):
            u, wu = A[i]
            G.insert_edge(u, vl, wu - wl)
            if G.meta[u].kind == Kind.OUT_STEINER:
                p = G.meta[u].parent
                G.insert_edge(p, vl, G.weight(p, u) + wu - wl)
        if G.role[v] == Role.NEG:
            state._insert(v, vl, -wl)
        if G.meta[v].kind == Kind.N_STEINER:
            r = G.meta[v].parent
            state._insert(r, vl, G.rel_weight(r, v) - wl)
    state.counters.new_in_steiner += len(ids)
    return GadgetRecord(v, ids, A)


def build_out_gadget(state: IterationState, v: int, A: list[tuple[int, int]]) -> GadgetRecord:
    """Out-Steiner vertices v_0..v_tau, mirror of the in-gadget."""
    G = state.G
    k = len(A)
    ids: list[int] = []
    for ell in range(ceil_log2(k)):
        idx = k - (1 << ell)
        wl = A[idx - 1][1]
        vl = state.new_vertex(Kind.OUT_STEINER, v, None, anc=G.anc[v], psi=-wl + G.psi[v])
        ids.append(vl)
        G.insert_edge(v, vl, wl)
        for i in range(idx):
            u, wu = A[i]
            G.insert_edge(vl, u, wu - wl)
            if G.meta[u].kind == Kind.IN_STEINER:
                p = G.meta[u].parent
                G.insert_edge(vl, p, wu + G.weight(u, p) - wl)
        if G.role[v] == Role.NEG_BAR:
            r = G.owner[v]
            state._insert(vl, r, -G.nsucc[r][v] - wl)
        if G.meta[v].kind == Kind.N_STEINER:
            r = G.meta[v].parent
            state._insert(vl, r, G.weight(v, r) - wl)
    state.counters.new_out_steiner += len(ids)
    return GadgetRecord(v, ids, A)


def create_n_steiner(state: IterationState, r: int, delta: int) -> int:
    """Hub vertex for r joined by (hub, r) = delta and (r, hub) = -delta."""
    hub = state.new_vertex(Kind.N_STEINER, r, True, anc=r, psi=delta)
    state._insert(hub, r, delta)
    state._insert(r, hub, -delta)
    state.counters.new_n_steiner += 1
    return hub


def hub_edge_cases(state: IterationState, r: int) -> None:
    G = state.G
    delta = state.thresholds.delta[r]
    hub = state.hubs[r]
    rb = G.bar[r]
    W = G.nsucc[r][rb]
    if delta <= 0:
        for v, w in state.aux.A_in[r]:
            state.add_edge_in(v, hub, w - delta)
    if delta >= -W:
        for v, w in state.aux.A_out[rb]:
            state.add_edge_out(hub, v, W + delta + w)


def _make_twin(state: IterationState, r: int) -> None:
    """Move the in-edges of bar r that do not come from r onto a fresh copy of bar r.

    The copy gets bar r's current out-edges (except those into bar r's own
    out-Steiner children, which bar r dominates by direct edges), so every
    path through a moved edge keeps its weight.
    """
    G = state.G
    rb = G.bar[r]
    foreign = [(y, w, f) for y, w, f in G.in_edges(rb) if y != r]
    if not foreign:
        return
    twin = state.new_vertex(Kind.REGULAR, None, True, role=Role.TWIN, owner=r,
                            anc=G.anc[rb], psi=G.psi[rb], phi=G.phi[rb])
    state.twins.setdefault(r, twin)
    state.counters.new_twins += 1
    for x, w, f in list(G.out_edges(rb)):
        mx = G.meta[x]
        if mx.kind == Kind.OUT_STEINER and mx.parent == rb:
            continue
        G.insert_edge(twin, x, w, flagged=f)
    for y, w, f in foreign:
        G.remove_edge(y, rb, f)
        G.insert_edge(y, twin, w, flagged=f)


def restore_well_behaved(state: IterationState, r: int) -> None:
    """Make r's designated edge its only out-edge and the only possibly negative edge at r.

    Applies the potential w_in at r and W - w_out at bar r, then moves every
    other out-edge (r, x) to (bar r, x).
    """
    G = state.G
    rb = G.bar[r]
    if state.config.entry_twins:
        _make_twin(state, r)
    W = G.nsucc[r][rb]
    w_out = min(w for _, w, _ in G.out_edges(r))
    w_in = min([0] + [w for _, w, _ in G.in_edges(r)])
    foreign = [(y, f) for y, _, f in G.in_edges(rb) if y != r]
    G.shift_vertex(r, w_in)
    G.shift_vertex(rb, W - w_out)
    for y, f in foreign:
        # literal variant without twins: foreign in-edges keep their weight
        G.set_weight(y, rb, G.weight(y, rb) + (W - w_out), flagged=f)
    Wn = G.nsucc[r][rb]
    for x, w, f in list(G.out_edges(r)):
        if x == rb and f:
            continue
        G.remove_edge(r, x, f)
        G.insert_edge(rb, x, w - Wn)


def clear_flags(G: WeightedDigraph) -> None:
    """Turn every flagged edge other than a designated one into an ordinary edge."""
    for u in range(G.n):
        d = G.nsucc[u]
        if not d:
            continue
        for v in list(d):
            if G.is_designated(u, v):
                continue
            w = d[v]
            if w < 0:
                raise InvariantViolation(f"edge ({u},{v}) of weight {w} left negative")
            G.remove_edge(u, v, True)
            G.insert_edge(u, v, w)


def normalize(state: IterationState) -> None:
    for r in state.G.neg:
        restore_well_behaved(state, r)
    clear_flags(state.G)


def classify_steiner(G: WeightedDigraph, lam: float, new_steiners: list[int]) -> int:
    """Fix heavy/light for this iteration's in- and out-Steiner vertices.

    Returns how many became heavy.
    """
    heavy = 0
    for v in new_steiners:
        m = G.meta[v]
        if m.kind == Kind.IN_STEINER:
            m.heavy = len(G.out_neighbors(v)) - 1 >= lam
        elif m.kind == Kind.OUT_STEINER:
            m.heavy = len(G.in_neighbors(v)) - 1 >= lam
        else:
            continue
        heavy += bool(m.heavy)
    return heavy


def make_params(G: WeightedDigraph, t: int, n0: int, config: ShortcutConfig) -> IterationParams:
    eta = len(G.neg)
    L = iteration_count(n0)
    gamma = gamma_value(n0, config.gamma_scale)
    b = max(1.0, eta / gamma)
    lam = config.lam_override if config.lam_override is not None else G.n / b ** 0.5
    return IterationParams(t=t, h=L + 1, eta=eta, gamma=gamma, b=b, lam=lam,
                           reps=estimate_reps(G.n, config.reps_constant),
                           scales=scale_count(G.n))


def phase1(state: IterationState, rng: random.Random) -> ThresholdTable:
    """Reweight, replay deferred edges, restore, then choose thresholds and balls."""
    G, p = state.G, state.params
    reweight(G, p.b, p.h, state.config.mode, rng, state.config.sampled_hook)
    replay_deferred(state)
    normalize(state)
    table, _ = compute_thresholds(G, p.h, p.reps, p.scales, rng)
    s, sq = table.ball_sums()
    state.counters.ball_sum = s
    state.counters.ball_sq_sum = sq
    return table


def shortcut_iteration(G: WeightedDigraph, t: int, n0: int, F: DeferredEdgeSets,
                       config: ShortcutConfig, rng: random.Random,
                       hook: Hook | None = None) -> IterationState:
    """Run one full iteration in place.  Raises NegCycle from reweighting."""
    params = make_params(G, t, n0, config)
    counters = IterationCounters(t=t, vertices_before=G.n, eta=params.eta, b=params.b,
                                 lam=params.lam, h=params.h)
    G.counters.iterations.append(counters)
    relax0 = G.counters.relaxations
    state = IterationState(G, t, params, F, counters, config)
    state.thresholds = phase1(state, rng)
    if hook:
        hook("thresholds", state)
    n_old = G.n
    state.aux = snapshot_aux_lists(G)
    for r in G.neg:
        simple_merge_in(G, r, state.thresholds.U_in[r])
    for r in G.neg:
        simple_merge_out(G, r, state.thresholds.U_out[r])
    meta = G.meta
    for v in range(n_old):
        if meta[v].heavy and state.aux.A_in[v]:
            state.gadgets_in[v] = build_in_gadget(state, v, state.aux.A_in[v]).steiner_ids
    for v in range(n_old):
        if meta[v].heavy and state.aux.A_out[v]:
            state.gadgets_out[v] = build_out_gadget(state, v, state.aux.A_out[v]).steiner_ids
    for r in G.neg:
        state.hubs[r] = create_n_steiner(state, r, state.thresholds.delta[r])
    for r in G.neg:
        shortcut_in(state, r)
        shortcut_out(state, r)
        hub_edge_cases(state, r)
    if hook:
        hook("before_restore", state)
    normalize(state)
    steiners = [v for v in state.new_vertices
                if meta[v].kind in (Kind.IN_STEINER, Kind.OUT_STEINER)]
    heavy_steiners = classify_steiner(G, params.lam, steiners)
    counters.new_heavy = heavy_steiners + counters.new_n_steiner + counters.new_twins
    counters.vertices_after = G.n
    counters.edges_after = G.edge_count()
    counters.deferred_in = len(F.F_in)
    counters.deferred_out = len(F.F_out)
    counters.relaxations = G.counters.relaxations - relax0
    if hook:
        hook("after_iteration", state)
    return state
