"""Executable structural invariants of the working graph.

Every scan returns a list of human-readable violations; an empty list means
the property holds.  Twins (entry copies of a bar vertex) count as bar
vertices wherever a property names the bar side.
"""
from __future__ import annotations

from .graph_core import Kind, Role, WeightedDigraph


def _is_bar_like(G: WeightedDigraph, v: int) -> bool:
    return G.role[v] in (Role.NEG_BAR, Role.TWIN)


def well_behaved_scan(G: WeightedDigraph, allow_foreign_bar_entries: bool = False) -> list[str]:
    """Only designated edges are flagged or negative, r has out-degree 1, bar r in-degree 1."""
    out: list[str] = []
    negs = set(G.neg)
    for u in range(G.n):
        for v, w in G.nsucc[u].items():
            if not (u in negs and G.bar[u] == v):
                out.append(f"flagged non-designated edge ({u},{v}) w={w}")
        for v, w in G.succ[u].items():
            if w < 0:
                out.append(f"negative ordinary edge ({u},{v}) w={w}")
    for r in G.neg:
        rb = G.bar[r]
        if rb not in G.nsucc[r]:
            out.append(f"designated edge of {r} missing")
            continue
        if G.succ[r] or len(G.nsucc[r]) != 1:
            out.append(f"negative vertex {r} has out-degree {len(G.succ[r]) + len(G.nsucc[r])}")
        indeg = len(G.pred[rb]) + len(G.npred[rb])
        if indeg != 1 and not allow_foreign_bar_entries:
            out.append(f"bar vertex {rb} has in-degree {indeg}")
        back = G.succ[rb].get(r)
        if back is None or back != -G.nsucc[r][rb]:
            out.append(f"reverse edge ({rb},{r}) is {back}, designated is {G.nsucc[r][rb]}")
    return out


def negative_incident_scan(G: WeightedDigraph) -> list[str]:
    """Every negative edge touches a negative vertex."""
    out: list[str] = []
    for u, v, w, _ in G.edges():
        if w < 0 and G.role[u] != Role.NEG and G.role[v] != Role.NEG:
            out.append(f"negative edge ({u},{v}) w={w} away from negative vertices")
    return out


def parent_scan(G: WeightedDigraph) -> list[str]:
    """Parents exist at strictly lower level; Steiner vertices never parent their own kind."""
    out: list[str] = []
    meta = G.meta
    for m in meta:
        if m.kind in (Kind.IN_STEINER, Kind.OUT_STEINER):
            p = m.parent
            if p is None:
                out.append(f"Steiner vertex {m.id} without parent")
                continue
            if meta[p].level >= m.level:
                out.append(f"parent {p} of {m.id} at level {meta[p].level} >= {m.level}")
            if meta[p].kind == m.kind:
                out.append(f"{m.kind.name} {m.id} has parent {p} of the same kind")
        elif m.kind == Kind.N_STEINER:
            if m.parent is None or G.role[m.parent] != Role.NEG:
                out.append(f"N-Steiner {m.id} has parent {m.parent} outside N")
            if m.heavy is not True:
                out.append(f"N-Steiner {m.id} not heavy")
        elif m.heavy is not True:
            out.append(f"regular vertex {m.id} not heavy")
    return out


def _le(a: int | None, b: int | None) -> bool:
    return a is not None and b is not None and a <= b


def _edge_le(G: WeightedDigraph, u: int, v: int, bound: int) -> bool:
    """An edge (u, v) of weight at most bound; a self-loop stands for the empty path."""
    if u == v:
        return bound >= 0
    return _le(G.weight(u, v), bound)


def in_steiner_scan(G: WeightedDigraph, deferred_in: dict[tuple[int, int], int] | None,
                    current_t: int | None = None,
                    light_sets: dict[int, set[int]] | None = None) -> list[str]:
    """Neighbourhood properties of in-Steiner vertices.

    ``deferred_in`` maps (u, v) to the frame-free base of the deferred set (see
    DeferredEdgeSets).  When ``current_t`` is given, level-``current_t``
    vertices must have only their parent and level-t N-Steiner out-neighbours.
    ``light_sets`` holds the N-Steiner out-neighbours recorded when each light
    vertex was classified.
    """
    out: list[str] = []
    meta = G.meta
    for v in range(G.n):
        mv = meta[v]
        if mv.kind != Kind.IN_STEINER:
            continue
        p = mv.parent
        wvp = G.weight(v, p)
        if wvp is None:
            out.append(f"in-Steiner {v} lost its parent edge")
            continue
        # (a) in-edges lift to the parent
        for u in G.in_neighbors(v):
            if u == p:
                continue
            bound = G.weight(u, v) + wvp
            if not _le(G.weight(u, p), bound):
                out.append(f"in-Steiner {v}: no edge ({u},{p}) of weight <= {bound}"
                           f" (have {G.weight(u, p)})")
        outs = G.out_neighbors(v)
        for u in outs:
            mu = meta[u]
            wvu = G.weight(v, u)
            # (b) categories
            ok = (u == p
                  or (mu.kind == Kind.OUT_STEINER and mu.parent == v)
                  or G.role[u] == Role.NEG
                  or mu.kind == Kind.N_STEINER
                  or (mu.kind == Kind.IN_STEINER and mu.parent in outs
                      and (G.role[mu.parent] == Role.NEG or meta[mu.parent].kind == Kind.N_STEINER)))
            if not ok:
                out.append(f"in-Steiner {v}: out-neighbour {u} ({mu.kind.name}) outside the allowed kinds")
            # (c) companion edges at the parent
            if u == p:
                continue
            if G.role[u] == Role.NEG:
                if not _le(G.weight(p, u), wvu - wvp):
                    out.append(f"in-Steiner {v}: no edge ({p},{u}) of weight <= {wvu - wvp}")
            elif mu.kind == Kind.N_STEINER:
                r = mu.parent
                if deferred_in is not None:
                    base = deferred_in.get((p, u))
                    cur = None if base is None else base + G.phi[p] - G.phi[u]
                    if not _le(cur, wvu - wvp):
                        out.append(f"in-Steiner {v}: deferred ({p},{u}) is {cur}, want <= {wvu - wvp}")
                target = wvu - G.rel_weight(r, u) - wvp
                if not _edge_le(G, p, r, target):
                    out.append(f"in-Steiner {v}: no edge ({p},{r}) of weight <= {target}"
                               f" (have {G.weight(p, r)})")
        if current_t is not None and mv.level == current_t:
            for u in outs:
                if u != p and not (meta[u].kind == Kind.N_STEINER and meta[u].level == current_t):
                    out.append(f"new in-Steiner {v} has out-neighbour {u} besides parent and new hubs")
        if light_sets is not None and mv.heavy is False and v in light_sets:
            S = light_sets[v]
            for u in outs:
                if u == p or u in S:
                    continue
                mu = meta[u]
                if not (mu.kind == Kind.IN_STEINER and mu.parent in S):
                    out.append(f"light in-Steiner {v}: out-neighbour {u} outside its hub set")
    return out


def out_steiner_scan(G: WeightedDigraph, deferred_out: dict[tuple[int, int], int] | None,
                     current_t: int | None = None,
                     light_sets: dict[int, set[int]] | None = None,
                     before_restore: bool = False) -> list[str]:
    """Mirror of in_steiner_scan for out-Steiner vertices."""
    out: list[str] = []
    meta = G.meta
    for v in range(G.n):
        mv = meta[v]
        if mv.kind != Kind.OUT_STEINER:
            continue
        p = mv.parent
        wpv = G.weight(p, v)
        if wpv is None:
            out.append(f"out-Steiner {v} lost its parent edge")
            continue
        for u in G.out_neighbors(v):
            if u == p:
                continue
            bound = wpv + G.weight(v, u)
            if not _le(G.weight(p, u), bound):
                out.append(f"out-Steiner {v}: no edge ({p},{u}) of weight <= {bound}"
                           f" (have {G.weight(p, u)})")
        ins = G.in_neighbors(v)
        for u in ins:
            mu = meta[u]
            wuv = G.weight(u, v)
            bar_like = _is_bar_like(G, u) or (before_restore and G.role[u] == Role.NEG)
            ok = (u == p
                  or (mu.kind == Kind.IN_STEINER and mu.parent == v)
                  or bar_like
                  or mu.kind == Kind.N_STEINER
                  or (mu.kind == Kind.OUT_STEINER and mu.parent in ins
                      and (_is_bar_like(G, mu.parent) or meta[mu.parent].kind == Kind.N_STEINER)))
            if not ok:
                out.append(f"out-Steiner {v}: in-neighbour {u} ({mu.kind.name}) outside the allowed kinds")
            if u == p:
                continue
            if _is_bar_like(G, u):
                if not _le(G.weight(u, p), wuv - wpv):
                    out.append(f"out-Steiner {v}: no edge ({u},{p}) of weight <= {wuv - wpv}")
            elif mu.kind == Kind.N_STEINER:
                r = mu.parent
                if deferred_out is not None:
                    base = deferred_out.get((u, p))
                    cur = None if base is None else base + G.phi[u] - G.phi[p]
                    if not _le(cur, wuv - wpv):
                        out.append(f"out-Steiner {v}: deferred ({u},{p}) is {cur}, want <= {wuv - wpv}")
                target = wuv - G.weight(u, r) - wpv
                if not _edge_le(G, r, p, target):
                    out.append(f"out-Steiner {v}: no edge ({r},{p}) of weight <= {target}"
                               f" (have {G.weight(r, p)})")
        if current_t is not None and mv.level == current_t:
            for u in ins:
                if u != p and not (meta[u].kind == Kind.N_STEINER and meta[u].level == current_t):
                    out.append(f"new out-Steiner {v} has in-neighbour {u} besides parent and new hubs")
        if light_sets is not None and mv.heavy is False and v in light_sets:
            S = light_sets[v]
            for u in ins:
                if u == p or u in S:
                    continue
                mu = meta[u]
                if not (mu.kind == Kind.OUT_STEINER and mu.parent in S):
                    out.append(f"light out-Steiner {v}: in-neighbour {u} outside its hub set")
    return out


def hub_sets(G: WeightedDigraph, vertices: list[int]) -> dict[int, set[int]]:
    """For new light Steiner vertices, the hubs they touch (recorded at classification)."""
    sets: dict[int, set[int]] = {}
    for v in vertices:
        m = G.meta[v]
        if m.heavy is not False:
            continue
        if m.kind == Kind.IN_STEINER:
            sets[v] = {u for u in G.out_neighbors(v) if G.meta[u].kind == Kind.N_STEINER}
        elif m.kind == Kind.OUT_STEINER:
            sets[v] = {u for u in G.in_neighbors(v) if G.meta[u].kind == Kind.N_STEINER}
    return sets


def invariant_one_scan(G: WeightedDigraph, base_dist: dict[int, list[int | None]],
                       deferred: list[dict[tuple[int, int], int]] | None = None) -> list[str]:
    """Every edge weighs at least the ancestor distance plus the psi offset.

    ``base_dist[x][y]`` is the input-graph distance between negative vertices x
    and y (None when unreachable); the current frame adds phi(x) - phi(y).
    """
    out: list[str] = []
    anc, psi, phi = G.anc, G.psi, G.phi

    def bound(u: int, v: int) -> float | None:
        a, b = anc[u], anc[v]
        d = base_dist[a][b]
        if d is None:
            return None
        return d + phi[a] - phi[b] + psi[u] - psi[v]

    for u, v, w, _ in G.edges():
        lb = bound(u, v)
        if lb is not None and w < lb:
            out.append(f"edge ({u},{v}) w={w} below ancestor bound {lb}")
    for table in deferred or ():
        for (u, v), base in table.items():
            w = base + phi[u] - phi[v]
            lb = bound(u, v)
            if lb is not None and w < lb:
                out.append(f"deferred ({u},{v}) w={w} below ancestor bound {lb}")
    return out


def gadget_telescoping_scan(G: WeightedDigraph, owner: int, snapshot: list[tuple[int, int]],
                            steiner_ids: list[int], inward: bool) -> list[str]:
    """Two-edge paths through each gadget vertex reproduce the snapshot weights."""
    out: list[str] = []
    k = len(snapshot)
    for ell, s in enumerate(steiner_ids):
        idx = k - (1 << ell)
        for i in range(idx):
            u, w = snapshot[i]
            if inward:
                got = G.weight(u, s) + G.weight(s, owner)
            else:
                got = G.weight(owner, s) + G.weight(s, u)
            if got != w:
                out.append(f"gadget {s} of {owner}: path via it weighs {got}, edge weighed {w}")
    return out
