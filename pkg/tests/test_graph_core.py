from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphs import input_graphs, neg_pair, plain, random_input
from negsssp.errors import NegCycle, PotentialInvalid
from negsssp.graph_core import (Kind, WeightedDigraph, apply_potential, snapshot_aux_lists,
                                to_well_behaved)
from negsssp.invariants import well_behaved_scan
from negsssp.oracle_harness import bellman_ford, brute_hop_distances, has_negative_cycle


# ----------------------------------------------------------------------
# apply_potential

def test_potential_reweights_single_edge():
    G = WeightedDigraph()
    u, v = plain(G), plain(G)
    G.insert_edge(u, v, 3)
    apply_potential(G, [1, 4])
    assert G.weight(u, v) == 0
    assert G.phi == [1, 4]


def test_zero_potential_is_identity():
    G = to_well_behaved(random_graph(5, seed=1))
    before = sorted(G.edges())
    apply_potential(G, [0] * G.n)
    assert sorted(G.edges()) == before


def test_potential_rejects_negative_ordinary_edge():
    G = WeightedDigraph()
    u, v = plain(G), plain(G)
    G.insert_edge(u, v, 1)
    with pytest.raises(PotentialInvalid):
        apply_potential(G, [0, 5])


def random_graph(n, seed):
    return random_input(random.Random(seed), n)


def _cycles(G, max_len):
    for k in range(2, max_len + 1):
        for cyc in itertools.permutations(range(G.n), k):
            if cyc[0] != min(cyc):
                continue
            ws = [G.weight(cyc[i], cyc[(i + 1) % k]) for i in range(k)]
            if None not in ws:
                yield cyc, sum(ws)


@pytest.mark.parametrize("seed", range(20))
def test_potential_preserves_cycle_weights(seed):
    rng = random.Random(seed)
    G = WeightedDigraph()
    for _ in range(6):
        plain(G)
    for u in range(6):
        for v in range(6):
            if u != v and rng.random() < 0.5:
                G.insert_edge(u, v, rng.randint(-9, 9), flagged=True)
    before = dict(_cycles(G, 4))
    apply_potential(G, [rng.randint(-20, 20) for _ in range(6)])
    assert dict(_cycles(G, 4)) == before


def test_potential_keeps_designated_flags():
    G = WeightedDigraph()
    r, rb = neg_pair(G, -3)
    apply_potential(G, [2, -1])
    assert G.nsucc[r] == {rb: 0}
    assert G.succ[rb] == {r: 0}


# ----------------------------------------------------------------------
# insert_edge

def test_insert_keeps_minimum():
    G = WeightedDigraph()
    u, v = plain(G), plain(G)
    G.insert_edge(u, v, 5)
    G.insert_edge(u, v, 3)
    assert G.succ[u] == {v: 3}
    assert G.edge_count() == 1


def test_insert_drops_nonnegative_self_loop():
    G = WeightedDigraph()
    u = plain(G)
    G.insert_edge(u, u, 0)
    assert G.edge_count() == 0


def test_insert_negative_self_loop_is_cycle():
    G = WeightedDigraph()
    u = plain(G)
    with pytest.raises(NegCycle):
        G.insert_edge(u, u, -1)


def test_insert_counts_insertions():
    G = WeightedDigraph()
    u, v = plain(G), plain(G)
    G.insert_edge(u, v, 2)
    G.insert_edge(u, v, 4)
    assert G.counters.edge_insertions == 2


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(-5, 5),
                          st.booleans()), max_size=30))
def test_insert_min_dedup_per_class(ops):
    G = WeightedDigraph()
    for _ in range(4):
        plain(G)
    best: dict = {}
    for u, v, w, f in ops:
        if u == v:
            if w < 0:
                continue
        G.insert_edge(u, v, w, flagged=f)
        if u != v:
            key = (u, v, f)
            best[key] = min(best.get(key, w), w)
    stored = {(u, v, f): w for u, v, w, f in G.edges()}
    assert stored == best


# ----------------------------------------------------------------------
# aux lists

def test_aux_in_excludes_in_steiner_child():
    G = WeightedDigraph()
    v, a = plain(G), plain(G)
    s = G.add_vertex(Kind.IN_STEINER, 1, parent=v)
    G.insert_edge(a, v, 5)
    G.insert_edge(s, v, 2)
    assert snapshot_aux_lists(G).A_in[v] == [(a, 5)]


def test_aux_in_steiner_has_empty_in_list_and_drops_parent():
    G = WeightedDigraph()
    x, y = plain(G), plain(G)
    v = G.add_vertex(Kind.IN_STEINER, 1, parent=x)
    G.insert_edge(y, v, 1)
    G.insert_edge(v, x, 2)
    G.insert_edge(v, y, 3)
    aux = snapshot_aux_lists(G)
    assert aux.A_in[v] == []
    assert aux.A_out[v] == [(y, 3)]


def test_aux_skips_negative_edges():
    G = WeightedDigraph()
    r, rb = neg_pair(G, -2)
    v = plain(G)
    G.insert_edge(v, r, -1, flagged=True)
    G.insert_edge(rb, r, 2)
    assert snapshot_aux_lists(G).A_in[r] == [(rb, 2)]


def test_aux_heavy_sorted_non_increasing_ties_by_id():
    G = WeightedDigraph()
    v = plain(G)
    others = [plain(G) for _ in range(4)]
    for u, w in zip(others, (3, 7, 3, 1)):
        G.insert_edge(u, v, w)
    assert snapshot_aux_lists(G).A_in[v] == [(2, 7), (1, 3), (3, 3), (4, 1)]


# ----------------------------------------------------------------------
# well-behaved transform

@settings(max_examples=80, deadline=None)
@given(input_graphs(n_max=6))
def test_transform_is_well_behaved(H):
    if any(u == v and w < 0 for u, v, w in H.edges):
        with pytest.raises(NegCycle):
            to_well_behaved(H)
        return
    G = to_well_behaved(H)
    assert well_behaved_scan(G) == []
    assert len(G.neg) == H.n
    assert all(G.bar[v] == H.n + v for v in range(H.n))


@settings(max_examples=80, deadline=None)
@given(input_graphs(n_max=6))
def test_transform_preserves_distances(H):
    if has_negative_cycle(H):
        return
    G = to_well_behaved(H)
    for s in range(H.n):
        ref = bellman_ford(H, s).distances
        got = brute_hop_distances(G, s, H.n + 1)
        assert got[:H.n] == ref
