"""Hop-bounded distances.

A hop is a traversal of a flagged edge.  ``d^h(S, v)`` is the least weight of
a path from the set S to v using at most h hops.  It is computed by alternating
Dijkstra rounds over ordinary (nonnegative) edges with one relaxation pass over
flagged edges.
"""
from __future__ import annotations

import heapq
from typing import Iterable, Mapping, NamedTuple

import numpy as np
from numba import njit

from .graph_core import WeightedDigraph

FORWARD = "forward"
BACKWARD = "backward"


class ExtendedDistance(NamedTuple):
    """Distance with vertex-id tie-breakers; tuples compare lexicographically."""

    d: int
    src: int
    dst: int


def _adjacency(G: WeightedDigraph, direction: str):
    if direction == FORWARD:
        return G.succ, G.nsucc
    if direction == BACKWARD:
        return G.pred, G.npred
    raise ValueError(f"unknown direction {direction!r}")


def _seed(sources) -> dict[int, int]:
    if isinstance(sources, Mapping):
        return dict(sources)
    return {s: 0 for s in sources}


def hop_sssp(G: WeightedDigraph, sources: Iterable[int] | Mapping[int, int], h: int,
             direction: str = FORWARD) -> list[int | None]:
    """Return ``d^h(S, .)`` (forward) or ``d^h(., S)`` (backward); None marks no path.

    ``sources`` may map each source to an initial offset.  Stops early once a
    flagged-edge pass improves nothing, which leaves the result unchanged.
    """
    plain, flagged = _adjacency(G, direction)
    n = G.n
    dist: list[int | None] = [None] * n
    heap: list[tuple[int, int]] = []
    for s, d0 in _seed(sources).items():
        if dist[s] is None or d0 < dist[s]:
            dist[s] = d0
    for s in range(n):
        if dist[s] is not None:
            heap.append((dist[s], s))
    heapq.heapify(heap)
    relax = 0
    changed: set[int] = set()
    for rnd in range(h + 1):
        while heap:
            d, u = heapq.heappop(heap)
            if d != dist[u]:
                continue
            changed.add(u)
            for v, w in plain[u].items():
                nd = d + w
                relax += 1
                dv = dist[v]
                if dv is None or nd < dv:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        if rnd == h:
            break
        improved: dict[int, int] = {}
        for u in changed:
            du = dist[u]
            for v, w in flagged[u].items():
                nd = du + w
                relax += 1
                dv = dist[v]
                if (dv is None or nd < dv) and (v not in improved or nd < improved[v]):
                    improved[v] = nd
        changed = set()
        if not improved:
            break
        for v, nd in improved.items():
            dist[v] = nd
            heapq.heappush(heap, (nd, v))
    G.counters.relaxations += relax
    return dist


def hop_sssp_extended(G: WeightedDigraph, S: Iterable[int], h: int,
                      direction: str = FORWARD) -> list[ExtendedDistance | None]:
    """Lexicographic minimum of ``(d^h(u, v), u, v)`` over u in S (mirrored backward).

    Labels are (distance, S-member) pairs; a label replaces another only when
    it is strictly smaller, so ties go to the smaller S-member id.
    """
    plain, flagged = _adjacency(G, direction)
    n = G.n
    lab: list[tuple[int, int] | None] = [None] * n
    srcs = sorted(set(S))
    if not srcs:
        raise ValueError("source set must be nonempty")
    heap: list[tuple[int, int, int]] = []
    for s in srcs:
        if lab[s] is None or (0, s) < lab[s]:
            lab[s] = (0, s)
    for s in srcs:
        heap.append((lab[s][0], lab[s][1], s))
    heapq.heapify(heap)
    relax = 0
    changed: set[int] = set()
    for rnd in range(h + 1):
        while heap:
            d, o, u = heapq.heappop(heap)
            if lab[u] != (d, o):
                continue
            changed.add(u)
            for v, w in plain[u].items():
                cand = (d + w, o)
                relax += 1
                lv = lab[v]
                if lv is None or cand < lv:
                    lab[v] = cand
                    heapq.heappush(heap, (cand[0], o, v))
        if rnd == h:
            break
        improved: dict[int, tuple[int, int]] = {}
        for u in changed:
            d, o = lab[u]
            for v, w in flagged[u].items():
                cand = (d + w, o)
                relax += 1
                lv = lab[v]
                if (lv is None or cand < lv) and (v not in improved or cand < improved[v]):
                    improved[v] = cand
        changed = set()
        if not improved:
            break
        for v, cand in improved.items():
            lab[v] = cand
            heapq.heappush(heap, (cand[0], cand[1], v))
    G.counters.relaxations += relax
    out: list[ExtendedDistance | None] = [None] * n
    for v in range(n):
        if lab[v] is None:
            continue
        d, o = lab[v]
        out[v] = ExtendedDistance(d, o, v) if direction == FORWARD else ExtendedDistance(d, v, o)
    return out


def _bounded_dijkstra(adj: list[dict[int, int]], seeds: dict[int, int], bound: int,
                      G: WeightedDigraph) -> dict[int, int]:
    """Settle vertices in distance order while the distance stays below ``bound``."""
    best: dict[int, int] = {}
    heap = [(d, v) for v, d in seeds.items()]
    heapq.heapify(heap)
    for v, d in seeds.items():
        best[v] = d
    settled: dict[int, int] = {}
    relax = 0
    while heap:
        d, u = heapq.heappop(heap)
        if d >= bound:
            break
        if u in settled or d != best.get(u):
            continue
        settled[u] = d
        for v, w in adj[u].items():
            nd = d + w
            relax += 1
            if v not in settled and (v not in best or nd < best[v]):
                best[v] = nd
                heapq.heappush(heap, (nd, v))
    G.counters.relaxations += relax
    return settled


def bounded_ball_in(G: WeightedDigraph, r: int, delta: int) -> dict[int, int]:
    """``{v: d^0(v, r)}`` for every v with ``d^0(v, r) < delta``."""
    return _bounded_dijkstra(G.pred, {r: 0}, delta, G)


def bounded_ball_out(G: WeightedDigraph, r: int, delta: int) -> dict[int, int]:
    """``{v: d^1(r, v)}`` for every v with ``d^1(r, v) < -delta``.

    Assumes r's only flagged out-edge is ``(r, bar r)`` and r has no ordinary
    out-edges, so every path leaving r starts with that hop.
    """
    rb = G.bar[r]
    seeds = {r: 0}
    W = G.nsucc[r][rb]
    seeds[rb] = W
    return _bounded_dijkstra(G.succ, seeds, -delta, G)


# ----------------------------------------------------------------------
# compiled path for the estimation phase

class CsrSnapshot:
    """Read-only compressed adjacency of G, split by edge class and direction."""

    def __init__(self, G: WeightedDigraph):
        self.n = G.n
        self.forward = (_csr(G.succ), _csr(G.nsucc))
        self.backward = (_csr(G.pred), _csr(G.npred))


def _csr(adj: list[dict[int, int]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(adj)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.fromiter((len(d) for d in adj), dtype=np.int64, count=n), out=ptr[1:])
    m = int(ptr[-1])
    idx = np.fromiter((v for d in adj for v in d), dtype=np.int64, count=m)
    w = np.fromiter((x for d in adj for x in d.values()), dtype=np.int64, count=m)
    return ptr, idx, w


@njit(cache=True)
def _lex_less(d1, o1, d2, o2):
    return d1 < d2 or (d1 == d2 and o1 < o2)


@njit(cache=True)
def _heap_push(hd, ho, hv, size, d, o, v):
    i = size
    while i > 0:
        p = (i - 1) >> 1
        if _lex_less(d, o, hd[p], ho[p]):
            hd[i] = hd[p]
            ho[i] = ho[p]
            hv[i] = hv[p]
            i = p
        else:
            break
    hd[i] = d
    ho[i] = o
    hv[i] = v
    return size + 1


@njit(cache=True)
def _heap_pop(hd, ho, hv, size):
    d, o, v = hd[0], ho[0], hv[0]
    size -= 1
    ld, lo, lv = hd[size], ho[size], hv[size]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and _lex_less(hd[c + 1], ho[c + 1], hd[c], ho[c]):
            c += 1
        if _lex_less(hd[c], ho[c], ld, lo):
            hd[i] = hd[c]
            ho[i] = ho[c]
            hv[i] = hv[c]
            i = c
        else:
            break
    if size > 0:
        hd[i] = ld
        ho[i] = lo
        hv[i] = lv
    return d, o, v, size


@njit(cache=True)
def _compact_heap(hd, ho, hv, size, labd, labo):
    """Drop stale entries and re-heapify; at most one live entry per vertex remains."""
    k = 0
    for i in range(size):
        v = hv[i]
        if labo[v] == ho[i] and labd[v] == hd[i]:
            hd[k] = hd[i]
            ho[k] = ho[i]
            hv[k] = hv[i]
            k += 1
    size = 0
    for i in range(k):
        size = _heap_push(hd, ho, hv, size, hd[i], ho[i], hv[i])
    return size


@njit(cache=True)
def _hop_extended_kernel(n, optr, oidx, ow, fptr, fidx, fw, sources, h):
    NONE = -1
    labd = np.zeros(n, dtype=np.int64)
    labo = np.full(n, NONE, dtype=np.int64)
    cap = 4 * n + 16
    hd = np.empty(cap, dtype=np.int64)
    ho = np.empty(cap, dtype=np.int64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for s in sources:
        if labo[s] == NONE:
            labd[s] = 0
            labo[s] = s
            size = _heap_push(hd, ho, hv, size, 0, s, s)
    changed = np.empty(n, dtype=np.int64)
    in_changed = np.zeros(n, dtype=np.bool_)
    impd = np.zeros(n, dtype=np.int64)
    impo = np.full(n, NONE, dtype=np.int64)
    improved = np.empty(n, dtype=np.int64)
    relax = 0
    for rnd in range(h + 1):
        nch = 0
        while size > 0:
            d, o, u, size = _heap_pop(hd, ho, hv, size)
            if labo[u] != o or labd[u] != d:
                continue
            if not in_changed[u]:
                in_changed[u] = True
                changed[nch] = u
                nch += 1
            for e in range(optr[u], optr[u + 1]):
                v = oidx[e]
                nd = d + ow[e]
                relax += 1
                lo = labo[v]
                if lo == NONE or nd < labd[v] or (nd == labd[v] and o < lo):
                    labd[v] = nd
                    labo[v] = o
                    if size == cap:
                        size = _compact_heap(hd, ho, hv, size, labd, labo)
                    size = _heap_push(hd, ho, hv, size, nd, o, v)
        if rnd == h:
            break
        nimp = 0
        for i in range(nch):
            u = changed[i]
            in_changed[u] = False
            d = labd[u]
            o = labo[u]
            for e in range(fptr[u], fptr[u + 1]):
                v = fidx[e]
                nd = d + fw[e]
                relax += 1
                lo = labo[v]
                if lo == NONE or nd < labd[v] or (nd == labd[v] and o < lo):
                    if impo[v] == NONE:
                        impd[v] = nd
                        impo[v] = o
                        improved[nimp] = v
                        nimp += 1
                    elif nd < impd[v] or (nd == impd[v] and o < impo[v]):
                        impd[v] = nd
                        impo[v] = o
        if nimp == 0:
            break
        for i in range(nimp):
            v = improved[i]
            labd[v] = impd[v]
            labo[v] = impo[v]
            impo[v] = NONE
            if size == cap:
                size = _compact_heap(hd, ho, hv, size, labd, labo)
            size = _heap_push(hd, ho, hv, size, labd[v], labo[v], v)
    return labd, labo, relax


def hop_extended_csr(snap: CsrSnapshot, S: Iterable[int], h: int,
                     direction: str = FORWARD) -> tuple[np.ndarray, np.ndarray, int]:
    """Compiled twin of hop_sssp_extended on a snapshot.

    Returns (distance, S-member, relaxations); S-member -1 marks no path.
    """
    if direction == FORWARD:
        (optr, oidx, ow), (fptr, fidx, fw) = snap.forward
    elif direction == BACKWARD:
        (optr, oidx, ow), (fptr, fidx, fw) = snap.backward
    else:
        raise ValueError(f"unknown direction {direction!r}")
    src = np.array(sorted(set(S)), dtype=np.int64)
    if len(src) == 0:
        raise ValueError("source set must be nonempty")
    return _hop_extended_kernel(snap.n, optr, oidx, ow, fptr, fidx, fw, src, h)
