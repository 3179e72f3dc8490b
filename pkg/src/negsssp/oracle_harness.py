"""Ground-truth oracles, instance generators and the differential driver.

None of the distance routines here share code with the solver; they only read
graph storage.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import chain, product

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra

from .graph_core import InputGraph, WeightedDigraph

FAMILIES = ("erdos", "path", "grid", "layered", "planted-cycle")


# ----------------------------------------------------------------------
# Bellman-Ford on the input graph

@dataclass
class OracleResult:
    distances: list[int | None] | None = None
    cycle: list[tuple[int, int, int]] | None = None


def bellman_ford(H: InputGraph, s: int) -> OracleResult:
    """Textbook Bellman-Ford with predecessor-walk cycle extraction."""
    n = H.n
    dist: list[int | None] = [None] * n
    pred: list[int | None] = [None] * n
    pw: list[int | None] = [None] * n
    dist[s] = 0
    last = None
    for _ in range(n):
        last = None
        for u, v, w in H.edges:
            du = dist[u]
            if du is None:
                continue
            if dist[v] is None or du + w < dist[v]:
                dist[v] = du + w
                pred[v] = u
                pw[v] = w
                last = v
        if last is None:
            return OracleResult(distances=dist)
    x = last
    for _ in range(n):
        x = pred[x]
    cycle = []
    y = x
    while True:
        p = pred[y]
        cycle.append((p, y, pw[y]))
        y = p
        if y == x:
            break
    cycle.reverse()
    return OracleResult(cycle=cycle)


def cycle_is_valid(H: InputGraph, cycle: list[tuple[int, int, int]]) -> bool:
    """Edges exist in H with the stated weights, chain head to tail, and sum negative."""
    if not cycle:
        return False
    have = set(H.edges)
    for i, (u, v, w) in enumerate(cycle):
        if (u, v, w) not in have:
            return False
        if cycle[(i + 1) % len(cycle)][0] != v:
            return False
    return sum(w for _, _, w in cycle) < 0


# ----------------------------------------------------------------------
# hop-bounded oracles on the working graph

def brute_hop_distances(G: WeightedDigraph, u: int, h: int) -> list[int | None]:
    """``d^h(u, .)`` by relaxing over (vertex, hops used) states until stable."""
    n = G.n
    best: list[list[int | None]] = [[None] * n for _ in range(h + 1)]
    best[0][u] = 0
    work = [(u, 0)]
    while work:
        nxt = []
        for x, k in work:
            dx = best[k][x]
            for y, w in G.succ[x].items():
                cand = dx + w
                if best[k][y] is None or cand < best[k][y]:
                    best[k][y] = cand
                    nxt.append((y, k))
            if k < h:
                for y, w in G.nsucc[x].items():
                    cand = dx + w
                    if best[k + 1][y] is None or cand < best[k + 1][y]:
                        best[k + 1][y] = cand
                        nxt.append((y, k + 1))
        work = nxt
    out: list[int | None] = [None] * n
    for k in range(h + 1):
        for v in range(n):
            b = best[k][v]
            if b is not None and (out[v] is None or b < out[v]):
                out[v] = b
    return out


def brute_hop_distance(G: WeightedDigraph, u: int, v: int, h: int) -> int | None:
    return brute_hop_distances(G, u, h)[v]


INF = float("inf")


def _zero_hop_matrix(G: WeightedDigraph) -> np.ndarray:
    """All-pairs 0-hop distances by Floyd-Warshall (min-plus closure of ordinary edges)."""
    n = G.n
    D = np.full((n, n), INF)
    np.fill_diagonal(D, 0.0)
    for u in range(n):
        for v, w in G.succ[u].items():
            D[u, v] = min(D[u, v], w)
    for k in range(n):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return D


def _min_plus(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.min(A[:, :, None] + B[None, :, :], axis=1)


def min_plus_hop_matrices(G: WeightedDigraph, h: int) -> list[np.ndarray]:
    """``[d^0, ..., d^h]`` as dense matrices by min-plus products (small graphs only)."""
    D0 = _zero_hop_matrix(G)
    n = G.n
    Fm = np.full((n, n), INF)
    for u in range(n):
        for v, w in G.nsucc[u].items():
            Fm[u, v] = min(Fm[u, v], w)
    step = _min_plus(Fm, D0)
    mats = [D0]
    for _ in range(h):
        mats.append(np.minimum(mats[-1], _min_plus(mats[-1], step)))
    return mats


def brute_betweenness(G: WeightedDigraph, h: int) -> dict[tuple[int, int], int]:
    """Per pair (u, v), the number of negative vertices r with d^h(u, r) + d^h(r, v) < 0."""
    n = G.n
    rows = [brute_hop_distances(G, u, h) for u in range(n)]
    out: dict[tuple[int, int], int] = {}
    for u, v in product(range(n), repeat=2):
        c = 0
        for r in G.neg:
            a, b = rows[u][r], rows[r][v]
            if a is not None and b is not None and a + b < 0:
                c += 1
        out[(u, v)] = c
    return out


def min_plus_betweenness(G: WeightedDigraph, h: int) -> dict[tuple[int, int], int]:
    """Second implementation of brute_betweenness via dense min-plus matrices."""
    M = min_plus_hop_matrices(G, h)[-1]
    n = G.n
    out: dict[tuple[int, int], int] = {}
    for u, v in product(range(n), repeat=2):
        out[(u, v)] = int(sum(1 for r in G.neg if M[u, r] + M[r, v] < 0))
    return out


@dataclass
class HopProfile:
    """Exact distances and least hop counts between the given endpoints.

    ``dist[i][j]`` is None when unreachable; ``hops[i][j]`` is the smallest h
    with ``d^h = d``.  ``cyclic`` is set when distances never settle.
    """

    endpoints: list[int]
    dist: list[list[int | None]]
    hops: list[list[int | None]]
    cyclic: bool = False
    layers: list[np.ndarray] = field(default_factory=list)


def boundary_hop_profile(G: WeightedDigraph, endpoints: list[int],
                         max_hops: int | None = None) -> HopProfile:
    """Hop profile for a graph whose only flagged edges are the designated ones.

    0-hop distances come from a C Dijkstra over ordinary edges; hops are then
    layered through the designated edges with small min-plus steps.
    """
    n = G.n
    A = ordinary_csr(G)
    if A.nnz and A.data.min() < 0:
        raise ValueError("boundary profile needs nonnegative ordinary edges")
    tails = [r for r in G.neg if G.nsucc[r]]
    heads = [G.bar[r] for r in tails]
    W = np.array([G.nsucc[r][G.bar[r]] for r in tails], dtype=float)
    srcs = sorted(set(endpoints) | set(heads))
    pos = {v: i for i, v in enumerate(srcs)}
    D0 = _dijkstra_keep_zeros(A, srcs, n)
    ends = np.array(endpoints)
    k_heads = np.array([pos[x] for x in heads], dtype=int)
    tail_idx = np.array(tails, dtype=int)
    cur = D0[[pos[e] for e in endpoints], :]            # d^0(e, .)
    via = D0[k_heads, :]                               # d^0(bar r, .)
    limit = (len(tails) + 1) if max_hops is None else max_hops
    hist = [cur[:, ends].copy()]
    cyclic = False
    for k in range(1, limit + 2):
        if len(tails) == 0:
            break
        reach = cur[:, tail_idx] + W[None, :]           # d^{k-1}(e, r) + w(r, bar r)
        step = np.min(reach[:, :, None] + via[None, :, :], axis=1)
        nxt = np.minimum(cur, step)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
        hist.append(cur[:, ends].copy())
        if k == limit + 1:
            cyclic = True
    final = hist[-1]
    m = len(endpoints)
    dist = [[None if np.isinf(final[i, j]) else int(final[i, j]) for j in range(m)] for i in range(m)]
    hops: list[list[int | None]] = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if dist[i][j] is None:
                continue
            for k, M in enumerate(hist):
                if M[i, j] == final[i, j]:
                    hops[i][j] = k
                    break
    return HopProfile(list(endpoints), dist, hops, cyclic, hist)


def _dijkstra_keep_zeros(A: csr_matrix, srcs: list[int], n: int) -> np.ndarray:
    """scipy Dijkstra that treats stored zero weights as real edges.

    csgraph ignores explicit zeros in sparse input, so every weight is
    shifted to ``w * (n + 1) + 1`` and the path length is recovered by
    integer division (a path has at most n edges, so the shift never carries).
    """
    B = A.copy()
    B.data = B.data * (n + 1) + 1
    D = sp_dijkstra(B, directed=True, indices=srcs)
    out = np.where(np.isinf(D), INF, np.floor(D / (n + 1)))
    return out


def ordinary_csr(G: WeightedDigraph) -> csr_matrix:
    """Ordinary edges of G as a sparse matrix (explicit zeros kept in ``data``)."""
    n = G.n
    lens = np.fromiter((len(d) for d in G.succ), dtype=np.int64, count=n)
    cols = np.fromiter(chain.from_iterable(G.succ), dtype=np.int64, count=int(lens.sum()))
    vals = np.fromiter(chain.from_iterable(d.values() for d in G.succ), dtype=float,
                       count=int(lens.sum()))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lens, out=indptr[1:])
    return csr_matrix((vals, cols, indptr), shape=(n, n))


def zero_hop_distances(G: WeightedDigraph, sources: list[int],
                       A: csr_matrix | None = None) -> np.ndarray:
    """Rows of d^0 from each source over ordinary edges (C Dijkstra)."""
    if A is None:
        A = ordinary_csr(G)
    return _dijkstra_keep_zeros(A, sources, G.n)


def exact_hop_matrix(G: WeightedDigraph, h: int) -> np.ndarray:
    """All-pairs d^h for a graph whose only flagged edges are designated ones."""
    A = ordinary_csr(G)
    if A.nnz and A.data.min() < 0:
        raise ValueError("exact hop matrix needs nonnegative ordinary edges")
    n = G.n
    D0 = _dijkstra_keep_zeros(A, list(range(n)), n)
    cur = D0.copy()
    tails = [r for r in G.neg if G.nsucc[r]]
    for _ in range(h):
        nxt = cur.copy()
        for r in tails:
            rb = G.bar[r]
            col = cur[:, r] + G.nsucc[r][rb]
            np.minimum(nxt, col[:, None] + D0[rb][None, :], out=nxt)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return cur


def _lex_count(dist: np.ndarray, d: float, tie: int) -> int:
    """How many v have (dist[v], v) <= (d, tie) with dist[v] finite."""
    finite = np.isfinite(dist)
    below = finite & (dist < d)
    equal = finite & (dist == d) & (np.arange(len(dist)) <= tie)
    return int(below.sum() + equal.sum())


def exact_ball_sizes(M: np.ndarray, r: int, D_in, D_out) -> tuple[int, int]:
    """|B^in_r(D_in)| and |B^out_r(D_out)| under the extended-distance order.

    ``M`` is the all-pairs d^h matrix.  A missing radius stands for infinity,
    whose ball holds every vertex at finite distance.
    """
    col, row = M[:, r], M[r, :]
    size_in = int(np.isfinite(col).sum()) if D_in is None else _lex_count(col, D_in.d, D_in.src)
    size_out = int(np.isfinite(row).sum()) if D_out is None else _lex_count(row, D_out.d, D_out.dst)
    return size_in, size_out


# ----------------------------------------------------------------------
# generators

@dataclass
class GraphSpec:
    family: str = "erdos"
    n: int = 16
    p: float = 0.2
    lo: int = -8
    hi: int = 15
    neg_fraction: float = 0.3
    solvable: bool = True
    seed: int = 0


def _weights(rng: random.Random, spec: GraphSpec, pairs: list[tuple[int, int]],
             n: int) -> list[tuple[int, int, int]]:
    """Weights in [lo, hi] on the given pairs.

    For solvable instances each weight is ``base + pi(u) - pi(v)`` with a
    nonnegative base, so every cycle is nonnegative; pairs whose weight would
    leave the range are re-drawn as nonnegative.
    """
    edges = []
    if spec.solvable:
        span = max(1, -spec.lo)
        pi = [rng.randint(0, span) for _ in range(n)]
        for u, v in pairs:
            base = rng.randint(0, 2) if rng.random() < spec.neg_fraction else rng.randint(0, max(0, spec.hi))
            w = base + pi[u] - pi[v]
            if not spec.lo <= w <= spec.hi:
                floor = max(spec.lo, pi[u] - pi[v])
                if floor > spec.hi:
                    continue
                w = rng.randint(floor, spec.hi)
            edges.append((u, v, w))
    else:
        for u, v in pairs:
            if rng.random() < spec.neg_fraction:
                w = rng.randint(spec.lo, -1) if spec.lo < 0 else 0
            else:
                w = rng.randint(max(0, spec.lo), spec.hi)
            edges.append((u, v, w))
    return edges


def _pairs(rng: random.Random, spec: GraphSpec) -> list[tuple[int, int]]:
    n = spec.n
    fam = spec.family
    if fam in ("erdos", "planted-cycle"):
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < spec.p]
        # a spanning walk from 0 keeps most vertices reachable
        order = list(range(1, n))
        rng.shuffle(order)
        prev = 0
        for v in order:
            if rng.random() < 0.7:
                pairs.append((prev, v))
            prev = v
        return sorted(set(pairs))
    if fam == "path":
        pairs = [(i, i + 1) for i in range(n - 1)]
        pairs += [(u, v) for u in range(n) for v in range(u + 2, n) if rng.random() < spec.p / 4]
        return pairs
    if fam == "grid":
        side = max(1, int(round(n ** 0.5)))
        pairs = []
        for v in range(n):
            r, c = divmod(v, side)
            if c + 1 < side and v + 1 < n:
                pairs.append((v, v + 1))
                if rng.random() < 0.3:
                    pairs.append((v + 1, v))
            if v + side < n:
                pairs.append((v, v + side))
                if rng.random() < 0.3:
                    pairs.append((v + side, v))
        return pairs
    if fam == "layered":
        layers = max(2, int(round(n ** 0.5)))
        of = [min(layers - 1, i * layers // n) for i in range(n)]
        pairs = [(u, v) for u in range(n) for v in range(n)
                 if of[v] == of[u] + 1 and rng.random() < max(spec.p, 0.3)]
        pairs += [(u, v) for u in range(n) for v in range(n)
                  if u != v and of[v] == of[u] and rng.random() < spec.p / 3]
        return pairs
    raise ValueError(f"unknown family {fam!r}")


def generate(spec: GraphSpec) -> InputGraph:
    """Pure function of the spec (its seed included)."""
    rng = random.Random(f"{spec.family}/{spec.n}/{spec.p}/{spec.lo}/{spec.hi}/"
                        f"{spec.neg_fraction}/{spec.solvable}/{spec.seed}")
    n = spec.n
    if spec.family == "planted-cycle":
        base = GraphSpec("erdos", n, spec.p, spec.lo, spec.hi, spec.neg_fraction, True, spec.seed)
        H = InputGraph(n, _weights(rng, base, _pairs(rng, base), n))
        return plant_cycle(H, rng)
    return InputGraph(n, _weights(rng, spec, _pairs(rng, spec), n))


def plant_cycle(H: InputGraph, rng: random.Random) -> InputGraph:
    """Add a negative cycle through vertices reachable from 0."""
    reach = _reachable(H, 0)
    k = min(len(reach), rng.randint(2, 4))
    if k < 2:
        cyc = [0, 1] if H.n > 1 else [0]
    else:
        cyc = rng.sample(sorted(reach), k)
    edges = list(H.edges)
    if len(cyc) == 1:
        edges.append((0, 0, -1))
        return InputGraph(H.n, edges)
    ws = [rng.randint(0, 3) for _ in range(len(cyc) - 1)]
    last = -sum(ws) - rng.randint(1, 3)
    ws.append(last)
    for i, u in enumerate(cyc):
        edges.append((u, cyc[(i + 1) % len(cyc)], ws[i]))
    return InputGraph(H.n, edges)


def _reachable(H: InputGraph, s: int) -> set[int]:
    adj: dict[int, list[int]] = {}
    for u, v, _ in H.edges:
        adj.setdefault(u, []).append(v)
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def negative_edge_count(H: InputGraph) -> int:
    return sum(1 for _, _, w in H.edges if w < 0)


def has_negative_cycle(H: InputGraph) -> bool:
    """Any negative cycle anywhere (virtual source to every vertex)."""
    n = H.n
    d = [0] * n
    for _ in range(n + 1):
        changed = False
        for u, v, w in H.edges:
            if d[u] + w < d[v]:
                d[v] = d[u] + w
                changed = True
        if not changed:
            return False
    return True


# ----------------------------------------------------------------------
# differential driver

class MismatchFound(Exception):
    def __init__(self, spec: GraphSpec, detail: str):
        self.spec = spec
        self.detail = detail
        super().__init__(f"{spec}: {detail}")


@dataclass
class DiffReport:
    runs: int = 0
    solvable: int = 0
    cyclic: int = 0
    mismatches: int = 0
    certificates_ok: int = 0
    failures: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"runs": self.runs, "solvable": self.solvable, "cyclic": self.cyclic,
                "mismatches": self.mismatches, "certificates_ok": self.certificates_ok,
                "failures": self.failures[:20]}


def compare_one(H: InputGraph, s: int, config=None) -> str | None:
    """Run solver and oracle on one instance; return a description of any disagreement."""
    from .sssp_driver import solve
    ref = bellman_ford(H, s)
    got = solve(H, s, config)
    if ref.cycle is not None:
        if got.cycle is None:
            return "oracle found a cycle, solver returned distances"
        if not cycle_is_valid(H, got.cycle):
            return f"invalid certificate {got.cycle}"
        return None
    if got.cycle is not None:
        return f"solver reported cycle {got.cycle} on a solvable instance"
    if got.distances != ref.distances:
        return f"distances {got.distances} != {ref.distances}"
    return None


def shrink(H: InputGraph, s: int, config=None) -> InputGraph:
    """Drop vertices while the disagreement persists."""
    cur = H
    changed = True
    while changed and cur.n > 1:
        changed = False
        for x in range(cur.n):
            if x == s:
                continue
            keep = [v for v in range(cur.n) if v != x]
            idx = {v: i for i, v in enumerate(keep)}
            sub = InputGraph(cur.n - 1, [(idx[u], idx[v], w) for u, v, w in cur.edges
                                         if u != x and v != x])
            s2 = idx[s]
            if compare_one(sub, s2, config) is not None:
                cur, s = sub, s2
                changed = True
                break
    return cur


def differential_run(specs: list[GraphSpec], config=None, raise_on_mismatch: bool = False) -> DiffReport:
    rep = DiffReport()
    for spec in specs:
        H = generate(spec)
        rep.runs += 1
        ref_cycle = bellman_ford(H, 0).cycle is not None
        if ref_cycle:
            rep.cyclic += 1
        else:
            rep.solvable += 1
        problem = compare_one(H, 0, config)
        if problem is None:
            if ref_cycle:
                rep.certificates_ok += 1
            continue
        rep.mismatches += 1
        small = shrink(H, 0, config)
        msg = f"{spec}: {problem} (shrunk to n={small.n}: {small.edges})"
        rep.failures.append(msg)
        if raise_on_mismatch:
            raise MismatchFound(spec, msg)
    return rep
