"""Per-iteration preprocessing: reweighting, radius estimation and threshold choice."""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import EmptySampleRetry, NegCycle
from .graph_core import WeightedDigraph, apply_potential
from .hop_distances import (BACKWARD, FORWARD, CsrSnapshot, ExtendedDistance, bounded_ball_in,
                            bounded_ball_out, hop_extended_csr, hop_sssp_extended)

EXACT_ORACLE = "exact-oracle"
SAMPLED = "sampled"

EMPTY_SAMPLE_RETRIES = 20


# ----------------------------------------------------------------------
# parameters

def ceil_log2(x: int) -> int:
    """Ceiling of log2 for x >= 1, with ceil_log2(1) == 0."""
    if x < 1:
        raise ValueError("ceil_log2 needs x >= 1")
    return (x - 1).bit_length()


def iteration_count(n0: int) -> int:
    """ceil(log_{3/2} n0) + 2, computed in integers."""
    k = 0
    while 3 ** k < n0 * 2 ** k:
        k += 1
    return k + 2


def gamma_value(n0: int, scale: float = 1.0) -> float:
    lg = math.log2(max(n0, 2))
    return max(1, math.ceil(lg * 2 ** math.sqrt(lg))) * scale


def scale_count(n: int) -> int:
    """Number of sampling scales, floor(log2 n) - 2, clamped to at least 1."""
    return max(1, n.bit_length() - 1 - 2)


def estimate_reps(n: int, c: float = 8.0) -> int:
    return max(1, math.ceil(c * math.log(max(n, 2))))


@dataclass
class IterationParams:
    t: int
    h: int
    eta: int
    gamma: float
    b: float
    lam: float
    reps: int
    scales: int


# ----------------------------------------------------------------------
# reweighting

def _find_pred_cycle(pred: Sequence[int | None]) -> list[int] | None:
    n = len(pred)
    color = [0] * n
    for s in range(n):
        if color[s]:
            continue
        path = []
        v: int | None = s
        while v is not None and color[v] == 0:
            color[v] = 1
            path.append(v)
            v = pred[v]
        if v is not None and color[v] == 1:
            cyc = path[path.index(v):]
            cyc.reverse()
            for x in path:
                color[x] = 2
            return cyc
        for x in path:
            color[x] = 2
    return None


def _cycle_weight(G: WeightedDigraph, cyc: list[int]) -> int:
    tot = 0
    for i, u in enumerate(cyc):
        v = cyc[(i + 1) % len(cyc)]
        w = G.weight(u, v)
        tot += w
    return tot


def label_correcting(G: WeightedDigraph, seeds: dict[int, int],
                     max_rounds: int | None = None) -> tuple[list[int | None], list[int | None]]:
    """Shortest distances from seeded vertices allowing any number of hops.

    Alternates Dijkstra over ordinary edges with flagged-edge passes.  Raises
    NegCycle with a cycle read off the predecessor graph when distances keep
    improving past the hop count any simple path can need.
    """
    n = G.n
    dist: list[int | None] = [None] * n
    pred: list[int | None] = [None] * n
    for v, d in seeds.items():
        dist[v] = d
    heap = [(d, v) for v, d in seeds.items()]
    heapq.heapify(heap)
    flagged_tails = sum(1 for d in G.nsucc if d)
    limit = flagged_tails + 1 if max_rounds is None else max_rounds
    rounds = 0
    changed: set[int] = set()
    relax = 0
    while True:
        while heap:
            d, u = heapq.heappop(heap)
            if d != dist[u]:
                continue
            changed.add(u)
            for v, w in G.succ[u].items():
                nd = d + w
                relax += 1
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    heapq.heappush(heap, (nd, v))
        improved: dict[int, tuple[int, int]] = {}
        for u in changed:
            du = dist[u]
            for v, w in G.nsucc[u].items():
                nd = du + w
                relax += 1
                if (dist[v] is None or nd < dist[v]) and (v not in improved or nd < improved[v][0]):
                    improved[v] = (nd, u)
        changed = set()
        if not improved:
            break
        for v, (nd, u) in improved.items():
            dist[v] = nd
            pred[v] = u
            heapq.heappush(heap, (nd, v))
        rounds += 1
        if rounds > limit:
            cyc = _find_pred_cycle(pred)
            if cyc is not None:
                wt = _cycle_weight(G, cyc)
                if wt < 0:
                    G.counters.relaxations += relax
                    raise NegCycle(cyc, wt)
            if rounds > limit + n + 1:
                G.counters.relaxations += relax
                raise NegCycle([], None, note="distances failed to converge")
    G.counters.relaxations += relax
    return dist, pred


def exact_oracle_potential(G: WeightedDigraph) -> list[int]:
    """Distances from a virtual source joined to every vertex by 0-weight edges."""
    dist, _ = label_correcting(G, {v: 0 for v in range(G.n)})
    return [d if d is not None else 0 for d in dist]


def identity_sampled_hook(G: WeightedDigraph, b: float, h: int, rng: random.Random) -> list[int]:
    """Default sampled-mode hook.

    For b <= 1 the required bound (betweenness at most eta / b = eta) holds for
    every valid potential, so the zero potential meets the contract.  Larger b
    needs an external construction to be plugged in.
    """
    if b > 1:
        raise NotImplementedError("sampled reduction for b > 1 needs a plugged-in hook")
    return [0] * G.n


SampledHook = Callable[[WeightedDigraph, float, int, random.Random], list[int]]


def betweenness_reduce(G: WeightedDigraph, b: float, h: int, mode: str = EXACT_ORACLE,
                       rng: random.Random | None = None,
                       hook: SampledHook | None = None) -> list[int]:
    """Return a valid potential meeting the betweenness contract, or raise NegCycle."""
    if b < 1 or h < 1:
        raise ValueError("need b >= 1 and h >= 1")
    if mode == EXACT_ORACLE:
        return exact_oracle_potential(G)
    if mode == SAMPLED:
        fn = hook or identity_sampled_hook
        return fn(G, b, h, rng or random.Random(0))
    raise ValueError(f"unknown mode {mode!r}")


# ----------------------------------------------------------------------
# radius estimation

def _median(values: list[ExtendedDistance | None]) -> ExtendedDistance | None:
    """Lower median under lexicographic order; None sorts last (no path)."""
    ordered = sorted(values, key=lambda e: (1,) if e is None else (0, e))
    return ordered[(len(ordered) - 1) // 2]


def sample_set(n: int, p: float, rng: random.Random) -> list[int]:
    for _ in range(EMPTY_SAMPLE_RETRIES):
        S = [v for v in range(n) if rng.random() < p]
        if S:
            return S
    raise EmptySampleRetry(f"empty sample {EMPTY_SAMPLE_RETRIES} times at p={p}")


def estimate_scale(G: WeightedDigraph, p: float, reps: int, h: int, rng: random.Random,
                   targets: Sequence[int] | None = None, snap: CsrSnapshot | None = None,
                   compiled: bool = True
                   ) -> dict[int, tuple[ExtendedDistance | None, ExtendedDistance | None]]:
    """Per target r, the medians of ``d^(S, r)`` and ``d^(r, S)`` over ``reps`` samples.

    ``compiled`` selects the array kernel over a snapshot; the pure-Python
    search gives identical results and serves as its reference.
    """
    targets = list(G.neg if targets is None else targets)
    ins: dict[int, list] = {r: [] for r in targets}
    outs: dict[int, list] = {r: [] for r in targets}
    if compiled and snap is None:
        snap = CsrSnapshot(G)
    for _ in range(reps):
        S = sample_set(G.n, p, rng)
        if compiled:
            fd, fo, rf = hop_extended_csr(snap, S, h, FORWARD)
            bd, bo, rb = hop_extended_csr(snap, S, h, BACKWARD)
            G.counters.relaxations += int(rf + rb)
            for r in targets:
                ins[r].append(None if fo[r] < 0 else ExtendedDistance(int(fd[r]), int(fo[r]), r))
                outs[r].append(None if bo[r] < 0 else ExtendedDistance(int(bd[r]), r, int(bo[r])))
        else:
            fwd = hop_sssp_extended(G, S, h, FORWARD)
            bwd = hop_sssp_extended(G, S, h, BACKWARD)
            for r in targets:
                ins[r].append(fwd[r])
                outs[r].append(bwd[r])
    return {r: (_median(ins[r]), _median(outs[r])) for r in targets}


def _lex_key(e: ExtendedDistance | None):
    return (1,) if e is None else (0, e)


def monotone_repair(seq: Sequence[ExtendedDistance | None]) -> list[ExtendedDistance | None]:
    """Prefix maximum under lexicographic order (None is the top element)."""
    out: list[ExtendedDistance | None] = []
    best = None
    have = False
    for e in seq:
        if not have or _lex_key(e) > _lex_key(best):
            best = e
            have = True
        out.append(best)
    return out


@dataclass
class ScaleTable:
    """Per r, the repaired radius sequences for scales 1..L."""

    D_in: dict[int, list[ExtendedDistance | None]] = field(default_factory=dict)
    D_out: dict[int, list[ExtendedDistance | None]] = field(default_factory=dict)


def build_scale_table(G: WeightedDigraph, h: int, reps: int, scales: int,
                      rng: random.Random, compiled: bool = True) -> ScaleTable:
    table = ScaleTable({r: [] for r in G.neg}, {r: [] for r in G.neg})
    snap = CsrSnapshot(G) if compiled else None
    for ell in range(1, scales + 1):
        est = estimate_scale(G, 2.0 ** -ell, reps, h, rng, snap=snap, compiled=compiled)
        for r, (di, do) in est.items():
            table.D_in[r].append(di)
            table.D_out[r].append(do)
    for r in G.neg:
        table.D_in[r] = monotone_repair(table.D_in[r])
        table.D_out[r] = monotone_repair(table.D_out[r])
    return table


def choose_delta(d_in: Sequence[int], d_out: Sequence[int]) -> int:
    """Pick the threshold from repaired radius distances (index 0 is scale 1)."""
    L = len(d_in)
    star = None
    for i in range(L):
        if d_in[i] + d_out[i] >= 0:
            star = i
            break
    if star is None:
        return d_in[L - 1]
    if star == 0:
        return d_in[0]
    if d_in[star - 1] < d_in[star]:
        cand = -d_out[star - 1]
        return cand if cand <= d_in[star] else d_in[star]
    if d_out[star - 1] < d_out[star]:
        cand = d_in[star - 1]
        return cand if cand >= -d_out[star] else -d_out[star]
    raise AssertionError("threshold cases not exhaustive: sequences not monotone")


def radius_values(seq: Sequence[ExtendedDistance | None], cap: int) -> list[int]:
    """Distance components, with a missing radius replaced by the finite cap."""
    return [cap if e is None else e.d for e in seq]


# ----------------------------------------------------------------------
# threshold table

@dataclass
class ThresholdTable:
    delta: dict[int, int] = field(default_factory=dict)
    U_in: dict[int, dict[int, int]] = field(default_factory=dict)
    U_out: dict[int, dict[int, int]] = field(default_factory=dict)

    def ball_sums(self) -> tuple[int, int]:
        s = 0
        sq = 0
        for r in self.delta:
            k = len(self.U_in[r]) + len(self.U_out[r])
            s += k
            sq += k * k
        return s, sq


def distance_cap(G: WeightedDigraph, h: int) -> int:
    """A finite stand-in for an infinite radius, beyond every h-hop distance."""
    return (h + 2) * (1 + G.total_abs_weight())


def compute_thresholds(G: WeightedDigraph, h: int, reps: int, scales: int,
                       rng: random.Random, compiled: bool = True) -> tuple[ThresholdTable, ScaleTable]:
    table = build_scale_table(G, h, reps, scales, rng, compiled)
    cap = distance_cap(G, h)
    out = ThresholdTable()
    for r in G.neg:
        delta = choose_delta(radius_values(table.D_in[r], cap), radius_values(table.D_out[r], cap))
        out.delta[r] = delta
        out.U_in[r] = bounded_ball_in(G, r, delta)
        out.U_out[r] = bounded_ball_out(G, r, delta)
    return out, table


def reweight(G: WeightedDigraph, b: float, h: int, mode: str, rng: random.Random,
             hook: SampledHook | None = None) -> list[int]:
    phi = betweenness_reduce(G, b, h, mode, rng, hook)
    apply_potential(G, phi)
    return phi
