from __future__ import annotations

import random

import pytest

from graphs import neg_pair, plain, solvable_input, state_for
from negsssp.audit import audited_run
from negsssp.errors import PreconditionViolated
from negsssp.graph_core import InputGraph, Kind, WeightedDigraph, snapshot_aux_lists, to_well_behaved
from negsssp.invariants import gadget_telescoping_scan, well_behaved_scan
from negsssp.oracle_harness import boundary_hop_profile
from negsssp.shortcut_engine import (DeferredEdgeSets, ShortcutConfig, build_in_gadget,
                                     build_out_gadget, classify_steiner, create_n_steiner,
                                     hub_edge_cases, replay_deferred, restore_well_behaved,
                                     shortcut_iteration, simple_merge_in, simple_merge_out)
from negsssp.sssp_driver import SolveConfig

WEIGHTS = (8, 6, 5, 2)


def _gadget_owner(inward: bool, role_neg: bool = False):
    G = WeightedDigraph()
    if role_neg:
        v, vb = neg_pair(G, -1)
        v = v if inward else vb
    else:
        v = plain(G)
    us = [plain(G) for _ in WEIGHTS]
    for u, w in zip(us, WEIGHTS):
        if inward:
            G.insert_edge(u, v, w)
        else:
            G.insert_edge(v, u, w)
    return G, v, us


# ----------------------------------------------------------------------
# deferred replay

def test_replay_with_no_entries_is_noop():
    G = to_well_behaved(InputGraph(2, [(0, 1, -1)]))
    before = sorted(G.edges())
    replay_deferred(state_for(G))
    assert sorted(G.edges()) == before


def test_replay_waits_for_nonnegative_weight():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    u = plain(G)
    state = state_for(G)
    state.F.add(state.F.F_in, G, u, r, -2)
    replay_deferred(state)
    assert G.weight(u, r) is None
    assert state.F.current(state.F.F_in, G, u, r) == -2
    G.shift_vertex(u, 3)
    replay_deferred(state)
    assert G.weight(u, r) == 1
    assert (u, r) in state.F.F_in


# ----------------------------------------------------------------------
# simple merges

def test_merge_in_weight_is_three_segment_path():
    G = WeightedDigraph()
    u, ub = neg_pair(G, -4)
    r, rb = neg_pair(G, -3)
    x = plain(G)
    simple_merge_in(G, r, {ub: 1, r: 0, x: 0})
    assert G.nsucc[u][rb] == -6
    assert G.weight(x, rb) is None


def test_merge_in_empty_ball():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -3)
    before = G.edge_count()
    simple_merge_in(G, r, {})
    assert G.edge_count() == before


def test_merge_out_weight():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -2)
    v, vb = neg_pair(G, -1)
    x = plain(G)
    simple_merge_out(G, r, {v: -4, x: -7})
    assert G.nsucc[r][vb] == -5
    assert G.weight(r, x) is None


# ----------------------------------------------------------------------
# gadgets

def test_in_gadget_weights():
    G, v, us = _gadget_owner(inward=True)
    state = state_for(G)
    A = snapshot_aux_lists(G).A_in[v]
    rec = build_in_gadget(state, v, A)
    assert rec.tau == 1
    v0, v1 = rec.steiner_ids
    assert G.weight(v0, v) == 5
    assert [G.weight(u, v0) for u in us[:3]] == [3, 1, 0]
    assert G.weight(v1, v) == 6
    assert [G.weight(u, v1) for u in us[:2]] == [2, 0]
    assert G.weight(us[3], v0) is None and G.weight(us[2], v1) is None
    assert all(G.meta[s].kind == Kind.IN_STEINER and G.meta[s].parent == v for s in rec.steiner_ids)
    assert gadget_telescoping_scan(G, v, A, rec.steiner_ids, inward=True) == []


def test_out_gadget_weights():
    G, v, us = _gadget_owner(inward=False)
    state = state_for(G)
    A = snapshot_aux_lists(G).A_out[v]
    rec = build_out_gadget(state, v, A)
    v0, v1 = rec.steiner_ids
    assert G.weight(v, v0) == 5
    assert [G.weight(v0, u) for u in us[:3]] == [3, 1, 0]
    assert G.weight(v, v1) == 6
    assert [G.weight(v1, u) for u in us[:2]] == [2, 0]
    assert gadget_telescoping_scan(G, v, A, rec.steiner_ids, inward=False) == []


def test_single_neighbour_gives_no_gadget():
    G = WeightedDigraph()
    v, u = plain(G), plain(G)
    G.insert_edge(u, v, 4)
    rec = build_in_gadget(state_for(G), v, snapshot_aux_lists(G).A_in[v])
    assert rec.tau == -1 and rec.steiner_ids == []


def test_in_gadget_on_negative_vertex_adds_back_edge():
    G, r, _ = _gadget_owner(inward=True, role_neg=True)
    rec = build_in_gadget(state_for(G), r, snapshot_aux_lists(G).A_in[r])
    for s in rec.steiner_ids:
        assert G.weight(r, s) == -G.weight(s, r)


def test_out_gadget_on_bar_vertex_links_back_to_owner():
    G, rb, _ = _gadget_owner(inward=False, role_neg=True)
    r = G.owner[rb]
    rec = build_out_gadget(state_for(G), rb, snapshot_aux_lists(G).A_out[rb])
    for s in rec.steiner_ids:
        assert G.weight(s, r) == -G.weight(r, rb) - G.weight(rb, s)


# ----------------------------------------------------------------------
# hubs

@pytest.mark.parametrize("delta", [0, 2, -3])
def test_hub_edges_cancel(delta):
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    hub = create_n_steiner(state_for(G), r, delta)
    assert G.weight(hub, r) == delta
    assert G.weight(r, hub) == -delta
    assert G.meta[hub].kind == Kind.N_STEINER and G.meta[hub].heavy


def _hub_fixture(W: int, delta: int):
    G = WeightedDigraph()
    r, rb = neg_pair(G, W)
    a, b = plain(G), plain(G)
    G.insert_edge(a, r, 4)
    G.insert_edge(rb, b, 6)
    state = state_for(G)
    state.aux = snapshot_aux_lists(G)
    state.thresholds.delta[r] = delta
    state.hubs[r] = create_n_steiner(state, r, delta)
    return G, state, r, a, b, state.hubs[r]


def test_hub_cases_both_fire_at_zero():
    G, state, r, a, b, hub = _hub_fixture(0, 0)
    hub_edge_cases(state, r)
    assert G.weight(a, hub) == 4
    assert G.weight(hub, b) == 6


def test_hub_cases_neither_fires_between_bounds():
    G, state, r, a, b, hub = _hub_fixture(-5, 2)
    hub_edge_cases(state, r)
    assert G.weight(a, hub) is None and G.weight(hub, b) is None


def test_hub_case_in_weight():
    G, state, r, a, b, hub = _hub_fixture(-5, -1)
    hub_edge_cases(state, r)
    assert G.weight(a, hub) == 5


# ----------------------------------------------------------------------
# recursive insertion

def test_add_edge_in_plain_source_no_recursion():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    u = plain(G)
    state = state_for(G)
    state.add_edge_in(u, r, 5)
    assert G.weight(u, r) == 5
    assert state.counters.add_edge_max_depth == 0


def test_add_edge_in_lifts_out_steiner_source():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    p = plain(G)
    u = G.add_vertex(Kind.OUT_STEINER, 1, parent=p)
    G.insert_edge(p, u, 3)
    state = state_for(G)
    state.add_edge_in(u, r, 5)
    assert G.weight(u, r) == 5
    assert G.weight(p, r) == 8
    assert state.counters.add_edge_max_depth == 1


def test_add_edge_in_defers_negative_lift():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    p = plain(G)
    state = state_for(G, t=2)
    u = G.add_vertex(Kind.IN_STEINER, 1, parent=p, heavy=True)
    G.insert_edge(u, p, 3)
    hub = create_n_steiner(state, r, 0)
    state.add_edge_in(u, hub, 2)
    assert G.weight(u, hub) == 2
    assert state.F.current(state.F.F_in, G, p, hub) == -1
    assert G.weight(p, hub) is None
    assert G.weight(p, r) == -1
    G.shift_vertex(p, 1)
    replay_deferred(state)
    assert G.weight(p, hub) == 0


def test_add_edge_in_rejects_light_in_steiner():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    p = plain(G)
    u = G.add_vertex(Kind.IN_STEINER, 1, parent=p, heavy=False)
    with pytest.raises(PreconditionViolated):
        state_for(G).add_edge_in(u, r, 1)


def test_add_edge_out_lifts_in_steiner_target():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    p = plain(G)
    v = G.add_vertex(Kind.IN_STEINER, 1, parent=p, heavy=True)
    G.insert_edge(v, p, 2)
    state = state_for(G)
    state.add_edge_out(r, v, 1)
    assert G.weight(r, v) == 1
    assert G.weight(r, p) == 3


def test_add_edge_out_plain_target():
    G = WeightedDigraph()
    r, _ = neg_pair(G, -1)
    v = plain(G)
    state = state_for(G)
    state.add_edge_out(r, v, 4)
    assert G.weight(r, v) == 4
    assert state.counters.add_edge_calls == 1


# ----------------------------------------------------------------------
# restore and classification

def test_restore_fixed_point():
    G = WeightedDigraph()
    r, rb = neg_pair(G, -3)
    a = plain(G)
    G.insert_edge(a, r, 2)
    before = sorted(G.edges())
    restore_well_behaved(state_for(G), r)
    assert sorted(G.edges()) == before


def test_restore_moves_cheaper_out_edge():
    G = WeightedDigraph()
    r, rb = neg_pair(G, -3)
    x = plain(G)
    G.insert_edge(r, x, -5, flagged=True)
    restore_well_behaved(state_for(G), r)
    assert G.nsucc[r] == {rb: -5}
    assert G.weight(rb, r) == 5
    # (r, x) -> (bar r, x) with weight w(r, x) - w_out
    assert G.weight(rb, x) == 0
    assert G.weight(r, rb) + G.weight(rb, x) == -5
    assert well_behaved_scan(G) == []


def test_restore_shifts_negative_in_edges():
    G = WeightedDigraph()
    r, rb = neg_pair(G, -3)
    a = plain(G)
    G.insert_edge(a, r, -2, flagged=True)
    restore_well_behaved(state_for(G), r)
    assert G.weight(a, r) == 0
    assert G.nsucc[r][rb] == -5


def test_classify_light_and_heavy():
    G = WeightedDigraph()
    v = plain(G)
    r, _ = neg_pair(G, -1)
    state = state_for(G)
    s1 = G.add_vertex(Kind.IN_STEINER, 1, parent=v, heavy=None)
    s2 = G.add_vertex(Kind.IN_STEINER, 1, parent=v, heavy=None)
    G.insert_edge(s1, v, 1)
    G.insert_edge(s2, v, 1)
    hub = create_n_steiner(state, r, 0)
    G.insert_edge(s2, hub, 0)
    assert classify_steiner(G, 1.0, [s1, s2]) == 1
    assert G.meta[s1].heavy is False and G.meta[s2].heavy is True


# ----------------------------------------------------------------------
# whole iterations

def test_iteration_on_zero_weight_designated_edges_keeps_distances():
    H = InputGraph(4, [(0, 1, 2), (1, 2, 0), (2, 3, 5), (3, 0, 1), (0, 2, 7)])
    report, G = audited_run(H, SolveConfig(base_threshold=0, seed=3))
    assert report.ok("distance") and report.ok("well_behaved")


def test_merge_makes_two_negative_edges_one_hop():
    H = InputGraph(3, [(0, 1, -2), (1, 2, -3)])
    G = to_well_behaved(H)
    ends = list(range(2 * H.n))
    before = boundary_hop_profile(G, ends)
    assert before.hops[0][2] == 2
    shortcut_iteration(G, 1, G.n, DeferredEdgeSets(), ShortcutConfig(), random.Random(0))
    after = boundary_hop_profile(G, ends)
    adjusted = after.dist[0][2] - G.phi[0] + G.phi[2]
    assert adjusted == before.dist[0][2] == -5
    assert after.hops[0][2] <= 1


@pytest.mark.parametrize("seed", range(3))
def test_iterations_pass_audit(seed):
    H = solvable_input(seed, 4, family=("erdos", "grid", "layered")[seed])
    report, _ = audited_run(H, SolveConfig(base_threshold=0, seed=seed))
    assert all(not v for v in report.violations.values()), report.violations
    assert report.max_hops[-1] <= 2
