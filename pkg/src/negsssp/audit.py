"""Per-iteration audit: oracle checks and structural scans driven by the iteration hook.

An ``IterationAudit`` is passed as the hook of a run.  It compares every
iteration boundary against exact oracles and collects violations by check
name, so one forced run serves every iteration-level acceptance check.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .graph_core import InputGraph, WeightedDigraph, to_well_behaved
from .invariants import (hub_sets, in_steiner_scan, invariant_one_scan, negative_incident_scan,
                         out_steiner_scan, parent_scan, well_behaved_scan)
from .oracle_harness import (HopProfile, bellman_ford, boundary_hop_profile, ordinary_csr,
                             zero_hop_distances)
from .shortcut_engine import IterationState
from .sssp_driver import SolveConfig, run_iterations

CHECKS = ("hops", "completeness", "completeness_pre", "structure", "negative_incident",
          "well_behaved", "distance", "invariant_one")


@dataclass
class Triple:
    """Consecutive negative edges (u, bar u), (r, bar r), (v, bar v) in the hard case."""

    u_bar: int
    r: int
    v: int
    d_in: int      # d(bar u, r)
    d_out: int     # d(r, v)
    delta: int


@dataclass
class AuditReport:
    violations: dict[str, list[str]] = field(default_factory=lambda: {c: [] for c in CHECKS})
    pairs_checked: int = 0
    triples_checked: int = 0
    iterations: int = 0
    max_hops: list[int] = field(default_factory=list)

    def ok(self, check: str) -> bool:
        return not self.violations[check]


def all_pairs_input(H: InputGraph) -> list[list[int | None]]:
    """Bellman-Ford distances between every ordered pair of input vertices."""
    out = []
    for s in range(H.n):
        res = bellman_ford(H, s)
        if res.cycle is not None:
            raise ValueError("audit needs an instance without negative cycles")
        out.append(res.distances)
    return out


class IterationAudit:
    """Hook that checks each iteration of a run on the transformed graph of H."""

    def __init__(self, H: InputGraph, G: WeightedDigraph, structural: bool = True):
        self.H = H
        self.endpoints = list(range(2 * H.n))   # the vertices of the transformed graph
        self.base = all_pairs_input(H)
        self.report = AuditReport()
        self.structural = structural
        self.light_sets: dict[int, set[int]] = {}
        self.prev = self._profile(G)
        self.initial = self.prev
        self.initial_phi = [G.phi[x] for x in self.endpoints]
        self.report.max_hops.append(self._max_hops(self.prev))
        self._triples: list[Triple] = []
        self._phi_at_thresholds: list[int] = []

    # ------------------------------------------------------------------
    def _profile(self, G: WeightedDigraph) -> HopProfile:
        return boundary_hop_profile(G, self.endpoints)

    @staticmethod
    def _max_hops(P: HopProfile) -> int:
        return max((h for row in P.hops for h in row if h is not None), default=0)

    def _flag(self, check: str, t: int, msg: str) -> None:
        self.report.violations[check].append(f"t={t}: {msg}")

    def __call__(self, event: str, state: IterationState) -> None:
        if event == "thresholds":
            self._collect_triples(state)
        elif event == "before_restore":
            self._check_before_restore(state)
        elif event == "after_iteration":
            self._check_after(state)

    # ------------------------------------------------------------------
    def _collect_triples(self, state: IterationState) -> None:
        """Hard-case triples in the graph the shortcut steps see."""
        G = state.G
        P = self._profile(G)
        pos = {x: i for i, x in enumerate(self.endpoints)}
        zero = P.layers[0]
        one = P.layers[1] if len(P.layers) > 1 else P.layers[0]
        triples: list[Triple] = []
        for r in G.neg:
            delta = state.thresholds.delta[r]
            ir = pos[r]
            for u in G.neg:
                if u == r:
                    continue
                iu = pos[G.bar[u]]
                d_in = P.dist[iu][ir]
                if d_in is None or zero[iu, ir] != d_in or d_in < delta:
                    continue
                for v in G.neg:
                    if v == r:
                        continue
                    iv = pos[v]
                    d_out = P.dist[ir][iv]
                    if d_out is None or one[ir, iv] != d_out or d_out < -delta:
                        continue
                    if P.dist[iu][iv] != d_in + d_out:
                        continue
                    triples.append(Triple(G.bar[u], r, v, d_in, d_out, delta))
        self._triples = triples
        self._phi_at_thresholds = list(G.phi)

    def _completeness(self, G: WeightedDigraph, state: IterationState, check: str,
                      adjust: bool) -> None:
        if not self._triples:
            return
        hubs = state.hubs
        old_phi = self._phi_at_thresholds
        # vertices created after the thresholds started from a zero potential
        shift = ((lambda x: G.phi[x] - (old_phi[x] if x < len(old_phi) else 0))
                 if adjust else (lambda x: 0))
        u_bars = sorted({tr.u_bar for tr in self._triples})
        hub_ids = sorted({hubs[tr.r] for tr in self._triples})
        A = ordinary_csr(G)
        D_u = zero_hop_distances(G, u_bars, A)
        D_h = zero_hop_distances(G, hub_ids, A)
        row_u = {x: i for i, x in enumerate(u_bars)}
        row_h = {x: i for i, x in enumerate(hub_ids)}
        for tr in self._triples:
            hub = hubs[tr.r]
            want_in = tr.d_in - tr.delta + shift(tr.u_bar) - shift(hub)
            got_in = D_u[row_u[tr.u_bar], hub]
            if not got_in <= want_in:
                self._flag(check, state.t, f"no 0-hop path {tr.u_bar}->hub {hub} of r={tr.r}"
                           f" with weight {want_in} (best {got_in})")
            want_out = tr.d_out + tr.delta + shift(hub) - shift(tr.v)
            got_out = D_h[row_h[hub], tr.v]
            if not got_out <= want_out:
                self._flag(check, state.t, f"no 0-hop path hub {hub} of r={tr.r}->{tr.v}"
                           f" with weight {want_out} (best {got_out})")
        if check == "completeness":
            self.report.triples_checked += len(self._triples)

    def _check_before_restore(self, state: IterationState) -> None:
        G = state.G
        self._completeness(G, state, "completeness_pre", adjust=False)
        if self.structural:
            for msg in negative_incident_scan(G):
                self._flag("negative_incident", state.t, msg)

    def _check_after(self, state: IterationState) -> None:
        G, t = state.G, state.t
        self.report.iterations += 1
        self._completeness(G, state, "completeness", adjust=True)
        P = self._profile(G)
        m = len(self.endpoints)
        prev = self.prev
        phi = G.phi
        for i in range(m):
            for j in range(m):
                d = P.dist[i][j]
                d_init = self.initial.dist[i][j]
                x, y = self.endpoints[i], self.endpoints[j]
                adjusted = None if d is None else d - phi[x] + phi[y] + self.initial_phi[x] - self.initial_phi[y]
                if adjusted != d_init:
                    self._flag("distance", t, f"pair ({x},{y}): adjusted distance {adjusted}, initially {d_init}")
                h_prev = prev.hops[i][j]
                if h_prev is None or d is None:
                    continue
                self.report.pairs_checked += 1
                bound = h_prev - h_prev // 3
                if P.hops[i][j] > bound:
                    self._flag("hops", t, f"pair ({x},{y}): {P.hops[i][j]} hops, bound {bound}")
        self.prev = P
        self.report.max_hops.append(self._max_hops(P))
        if P.cyclic:
            self._flag("distance", t, "hop layering did not settle")
        for msg in invariant_one_scan(G, self.base, [state.F.F_in, state.F.F_out]):
            self._flag("invariant_one", t, msg)
        if not self.structural:
            return
        for msg in well_behaved_scan(G, allow_foreign_bar_entries=not state.config.entry_twins):
            self._flag("well_behaved", t, msg)
        self.light_sets.update(hub_sets(G, state.new_vertices))
        msgs = parent_scan(G)
        msgs += in_steiner_scan(G, state.F.F_in, t, self.light_sets)
        msgs += out_steiner_scan(G, state.F.F_out, t, self.light_sets)
        for msg in msgs:
            self._flag("structure", t, msg)


def audited_run(H: InputGraph, config: SolveConfig | None = None,
                structural: bool = True) -> tuple[AuditReport, WeightedDigraph]:
    """Run every shortcut iteration on the transform of H under an IterationAudit."""
    config = config or SolveConfig(base_threshold=0)
    G = to_well_behaved(H)
    audit = IterationAudit(H, G, structural)
    cfg = replace(config, hook=audit)
    run_iterations(G, cfg, random.Random(cfg.seed))
    return audit.report, G


def counts(report: AuditReport) -> dict[str, int]:
    return {c: len(v) for c, v in report.violations.items()}


__all__ = ["AuditReport", "IterationAudit", "Triple", "all_pairs_input", "audited_run", "counts"]
