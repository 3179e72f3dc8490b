"""Graph storage, vertex taxonomy, potentials and the well-behaved transform.

The working graph keeps two edge classes per ordered pair: ordinary edges and
flagged edges.  Flagged edges are the ones counted as hops.  At iteration
boundaries the only flagged edges are the designated pairs ``(r, bar r)``.
Each class holds at most one edge per ordered pair (the minimum weight seen).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Sequence

from .counters import RunCounters
from .errors import NegCycle, PotentialInvalid


class Kind(IntEnum):
    REGULAR = 0
    IN_STEINER = 1
    OUT_STEINER = 2
    N_STEINER = 3


class Role(IntEnum):
    """Where a regular vertex sits relative to the designated pairs."""

    PLAIN = 0
    NEG = 1       # r, tail of a designated edge
    NEG_BAR = 2   # bar r, head of a designated edge
    TWIN = 3      # entry copy of some bar r (see restore step)


@dataclass
class VertexMeta:
    id: int
    kind: Kind
    level: int
    parent: int | None = None
    heavy: bool | None = True  # None while a new Steiner vertex is unclassified


@dataclass
class InputGraph:
    """Plain weighted digraph with 0-based vertex ids."""

    n: int
    edges: list[tuple[int, int, int]] = field(default_factory=list)

    def adjacency(self) -> list[dict[int, int]]:
        adj: list[dict[int, int]] = [dict() for _ in range(self.n)]
        for u, v, w in self.edges:
            if v not in adj[u] or w < adj[u][v]:
                adj[u][v] = w
        return adj


class WeightedDigraph:
    """Mutable digraph with per-pair min-deduplication and a potential ledger."""

    def __init__(self, counters: RunCounters | None = None):
        self.meta: list[VertexMeta] = []
        self.succ: list[dict[int, int]] = []
        self.pred: list[dict[int, int]] = []
        self.nsucc: list[dict[int, int]] = []
        self.npred: list[dict[int, int]] = []
        self.role: list[Role] = []
        self.owner: list[int | None] = []   # r for bar r and for twins of bar r
        self.neg: list[int] = []            # frozen set N, ascending
        self.bar: dict[int, int] = {}
        self.phi: list[int] = []            # cumulative potential
        self.psi: list[int] = []            # analysis potential
        self.anc: list[int] = []            # ancestor in the initial graph
        self._anc_members: dict[int, list[int]] = {}
        self.n_input = 0
        self.counters = counters if counters is not None else RunCounters()

    # ------------------------------------------------------------------
    # vertices
    @property
    def n(self) -> int:
        return len(self.meta)

    def add_vertex(self, kind: Kind, level: int, parent: int | None = None,
                   heavy: bool | None = True, role: Role = Role.PLAIN,
                   owner: int | None = None, anc: int | None = None,
                   psi: int = 0, phi: int = 0) -> int:
        v = len(self.meta)
        self.meta.append(VertexMeta(v, kind, level, parent, heavy))
        self.succ.append({})
        self.pred.append({})
        self.nsucc.append({})
        self.npred.append({})
        self.role.append(role)
        self.owner.append(owner)
        self.phi.append(phi)
        self.psi.append(psi)
        a = v if anc is None else anc
        self.anc.append(a)
        self._anc_members.setdefault(a, []).append(v)
        return v

    def kind(self, v: int) -> Kind:
        return self.meta[v].kind

    def parent(self, v: int) -> int | None:
        return self.meta[v].parent

    def is_light(self, v: int) -> bool:
        return self.meta[v].heavy is False

    def is_designated(self, u: int, v: int) -> bool:
        return self.role[u] == Role.NEG and self.bar[u] == v

    # ------------------------------------------------------------------
    # edges
    def insert_edge(self, u: int, v: int, w: int, flagged: bool = False) -> None:
        """Insert with min-dedup per (pair, class)."""
        self.counters.edge_insertions += 1
        if u == v:
            if w < 0:
                raise NegCycle([u], w, note="negative self-loop")
            return
        if self.role[u] == Role.NEG and self.bar[u] == v:
            # a second (r, bar r) edge never replaces the designated one
            W = self.nsucc[u][v]
            if w < W:
                raise NegCycle([u, v], w - W, note="edge shorter than designated pair")
            return
        s, p = (self.nsucc, self.npred) if flagged else (self.succ, self.pred)
        old = s[u].get(v)
        if old is None or w < old:
            s[u][v] = w
            p[v][u] = w

    def set_designated(self, r: int, w: int) -> None:
        rb = self.bar[r]
        self.nsucc[r][rb] = w
        self.npred[rb][r] = w

    def remove_edge(self, u: int, v: int, flagged: bool = False) -> None:
        s, p = (self.nsucc, self.npred) if flagged else (self.succ, self.pred)
        s[u].pop(v, None)
        p[v].pop(u, None)

    def set_weight(self, u: int, v: int, w: int, flagged: bool = False) -> None:
        s, p = (self.nsucc, self.npred) if flagged else (self.succ, self.pred)
        s[u][v] = w
        p[v][u] = w

    def weight(self, u: int, v: int) -> int | None:
        """Minimum weight over both classes, or None."""
        a = self.succ[u].get(v)
        nb = self.nsucc[u]
        if not nb:
            return a
        b = nb.get(v)
        if a is None:
            return b
        if b is None:
            return a
        return a if a < b else b

    def rel_weight(self, r: int, x: int) -> int | None:
        """Weight of the best r->x connection, direct or through bar r."""
        best = self.weight(r, x)
        if self.role[r] == Role.NEG:
            rb = self.bar[r]
            tail = self.weight(rb, x)
            if tail is not None:
                via = self.nsucc[r][rb] + tail
                if best is None or via < best:
                    best = via
        return best

    def out_edges(self, u: int) -> Iterator[tuple[int, int, bool]]:
        for v, w in self.succ[u].items():
            yield v, w, False
        for v, w in self.nsucc[u].items():
            yield v, w, True

    def in_edges(self, v: int) -> Iterator[tuple[int, int, bool]]:
        for u, w in self.pred[v].items():
            yield u, w, False
        for u, w in self.npred[v].items():
            yield u, w, True

    def out_neighbors(self, u: int) -> set[int]:
        return set(self.succ[u]) | set(self.nsucc[u])

    def in_neighbors(self, v: int) -> set[int]:
        return set(self.pred[v]) | set(self.npred[v])

    def edges(self) -> Iterator[tuple[int, int, int, bool]]:
        for u in range(self.n):
            for v, w in self.succ[u].items():
                yield u, v, w, False
            for v, w in self.nsucc[u].items():
                yield u, v, w, True

    def edge_count(self) -> int:
        return sum(len(d) for d in self.succ) + sum(len(d) for d in self.nsucc)

    def total_abs_weight(self) -> int:
        return sum(abs(w) for _, _, w, _ in self.edges())

    # ------------------------------------------------------------------
    # potentials
    def shift_vertex(self, v: int, x: int) -> None:
        """Apply the potential that is ``x`` at ``v`` and zero elsewhere."""
        if x == 0:
            return
        for d, back in ((self.succ[v], self.pred), (self.nsucc[v], self.npred)):
            for y in d:
                d[y] += x
                back[y][v] = d[y]
        for d, fwd in ((self.pred[v], self.succ), (self.npred[v], self.nsucc)):
            for y in d:
                d[y] -= x
                fwd[y][v] = d[y]
        self.phi[v] += x
        if self.anc[v] != v:
            self.psi[v] += x
        for y in self._anc_members.get(v, ()):
            if y != v:
                self.psi[y] -= x

    def copy(self) -> "WeightedDigraph":
        g = WeightedDigraph.__new__(WeightedDigraph)
        g.meta = [VertexMeta(m.id, m.kind, m.level, m.parent, m.heavy) for m in self.meta]
        g.succ = [dict(d) for d in self.succ]
        g.pred = [dict(d) for d in self.pred]
        g.nsucc = [dict(d) for d in self.nsucc]
        g.npred = [dict(d) for d in self.npred]
        g.role = list(self.role)
        g.owner = list(self.owner)
        g.neg = list(self.neg)
        g.bar = dict(self.bar)
        g.phi = list(self.phi)
        g.psi = list(self.psi)
        g.anc = list(self.anc)
        g._anc_members = {a: list(m) for a, m in self._anc_members.items()}
        g.n_input = self.n_input
        g.counters = RunCounters()
        return g


def apply_potential(G: WeightedDigraph, phi: Sequence[int]) -> None:
    """Reweight every edge by ``w + phi[u] - phi[v]`` and record ``phi``.

    Raises PotentialInvalid when an ordinary edge would become negative.
    Flagged edges may take any sign.
    """
    n = G.n
    if len(phi) != n:
        raise ValueError("potential must cover every vertex")
    if not any(phi):
        return
    for u in range(n):
        pu = phi[u]
        for s, p, check in ((G.succ, G.pred, True), (G.nsucc, G.npred, False)):
            d = s[u]
            for v in d:
                nw = d[v] + pu - phi[v]
                if check and nw < 0:
                    raise PotentialInvalid(f"edge ({u},{v}) becomes {nw}")
                d[v] = nw
                p[v][u] = nw
    for v in range(n):
        G.phi[v] += phi[v]
    for v in range(n):
        G.psi[v] += phi[v] - phi[G.anc[v]]


def to_well_behaved(H: InputGraph, counters: RunCounters | None = None) -> WeightedDigraph:
    """Split every vertex v into v -> bar v so that only (v, bar v) may be negative.

    Vertex v keeps id v and its copy gets id n + v.  Raises NegCycle (in input
    coordinates) for a negative self-loop in H.
    """
    n = H.n
    adj = [dict() for _ in range(n)]
    for u, v, w in H.edges:
        if u == v:
            if w < 0:
                raise NegCycle([u], w, space="input", note="negative self-loop")
            continue
        if v not in adj[u] or w < adj[u][v]:
            adj[u][v] = w
    G = WeightedDigraph(counters)
    G.n_input = n
    wmin = [min(0, min(a.values())) if a else 0 for a in adj]
    for v in range(n):
        G.add_vertex(Kind.REGULAR, 0, role=Role.NEG)
    for v in range(n):
        G.add_vertex(Kind.REGULAR, 0, role=Role.NEG_BAR, owner=v, anc=v, psi=-wmin[v])
    for v in range(n):
        G.bar[v] = n + v
        G.neg.append(v)
        G.nsucc[v][n + v] = wmin[v]
        G.npred[n + v][v] = wmin[v]
        G.succ[n + v][v] = -wmin[v]
        G.pred[v][n + v] = -wmin[v]
    for u in range(n):
        for v, w in adj[u].items():
            G.insert_edge(n + u, v, w - wmin[u])
    return G


@dataclass
class AuxLists:
    """Frozen adjacency snapshot: per vertex a list of (neighbor, weight)."""

    A_in: list[list[tuple[int, int]]]
    A_out: list[list[tuple[int, int]]]


def snapshot_aux_lists(G: WeightedDigraph) -> AuxLists:
    """Nonnegative ordinary neighbours minus the excluded parent/child links.

    Heavy vertices get their lists sorted by weight non-increasing with ties
    broken by vertex id; light vertices by vertex id.
    """
    n = G.n
    meta = G.meta
    A_in: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    A_out: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for v in range(n):
        mv = meta[v]
        if mv.kind != Kind.IN_STEINER:
            lst = []
            skip = mv.parent if mv.kind == Kind.OUT_STEINER else None
            for u, w in G.pred[v].items():
                if w < 0 or u == skip:
                    continue
                mu = meta[u]
                if mu.kind == Kind.IN_STEINER and mu.parent == v:
                    continue
                lst.append((u, w))
            A_in[v] = lst
        if mv.kind != Kind.OUT_STEINER:
            lst = []
            skip = mv.parent if mv.kind == Kind.IN_STEINER else None
            for u, w in G.succ[v].items():
                if w < 0 or u == skip:
                    continue
                mu = meta[u]
                if mu.kind == Kind.OUT_STEINER and mu.parent == v:
                    continue
                lst.append((u, w))
            A_out[v] = lst
        if mv.heavy:
            A_in[v].sort(key=lambda e: (-e[1], e[0]))
            A_out[v].sort(key=lambda e: (-e[1], e[0]))
        else:
            A_in[v].sort()
            A_out[v].sort()
    return AuxLists(A_in, A_out)


def input_from_edges(n: int, edges: Iterable[tuple[int, int, int]]) -> InputGraph:
    return InputGraph(n, list(edges))
