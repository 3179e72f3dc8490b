"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Runtime targets are printed, never asserted.
"""
from __future__ import annotations

import json
import random
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES
from negsssp import SolveConfig, solve
from negsssp.audit import audited_run
from negsssp.calibration import (FORCED_FAMILIES, forced_suite, growth_ratio, heavy_ratio,
                                 load_calibration)
from negsssp.cli_io import diff_specs
from negsssp.graph_core import to_well_behaved
from negsssp.oracle_harness import (GraphSpec, bellman_ford, cycle_is_valid, differential_run,
                                    exact_ball_sizes, exact_hop_matrix, generate,
                                    has_negative_cycle, negative_edge_count)
from negsssp.preprocess import (EXACT_ORACLE, estimate_reps, estimate_scale, iteration_count,
                                reweight)
from negsssp.sssp_driver import finalize, run_iterations

ROOT = Path(__file__).resolve().parents[1]
CALIBRATION = Path(__file__).parent / "data" / "calibration.json"

SUITE_SIZE = 100
SUITE_N = (2, 6)       # input vertices; the transformed graph has twice as many
TOP_N = 8              # one extra instance per family at n0 = 16


def verdict(name: str, ok: bool, detail: str, started: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail} [{time.perf_counter() - started:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)


# ----------------------------------------------------------------------
# shared forced suite: every shortcut iteration runs under the audit hook

def _stream(distances, counters) -> bytes:
    return json.dumps({"distances": distances, "counters": counters.as_dict()},
                      sort_keys=True).encode()


class SuiteRun:
    """One audited instance; ``stream`` holds its final distances and counters."""

    def __init__(self, spec, H, report, G, seconds):
        self.spec, self.H, self.report, self.G, self.seconds = spec, H, report, G, seconds
        self.distances = finalize(G, 0)
        self.stream = _stream(self.distances, G.counters)


def _suite_instances():
    yield from forced_suite(SUITE_SIZE, seed0=0, n_min=SUITE_N[0], n_max=SUITE_N[1])
    for i, fam in enumerate(FORCED_FAMILIES):
        seed = 500 + i
        while True:
            spec = GraphSpec(fam, TOP_N, 0.4, seed=seed)
            H = generate(spec)
            if not has_negative_cycle(H):
                break
            seed += 100
        yield spec, H


@pytest.fixture(scope="module")
def suite() -> list[SuiteRun]:
    runs = []
    for spec, H in _suite_instances():
        t0 = time.perf_counter()
        report, G = audited_run(H, SolveConfig(base_threshold=0, seed=spec.seed))
        runs.append(SuiteRun(spec, H, report, G, time.perf_counter() - t0))
    return runs


def _suite_total(suite, check: str) -> tuple[int, list[str]]:
    found = [msg for run in suite for msg in run.report.violations[check]]
    return len(found), found[:5]


# ----------------------------------------------------------------------
# 1. oracle exactness

def test_c1_oracle_exactness():
    t0 = time.perf_counter()
    specs = diff_specs({"n_min": 8, "n_max": 48}, 1000)
    with_negatives = sum(negative_edge_count(generate(s)) >= 5 for s in specs)
    rep = differential_run(specs)
    forced = differential_run(diff_specs({"n_min": 3, "n_max": 5, "seed": 7000}, 40),
                              SolveConfig(base_threshold=0))
    ok = (rep.mismatches == 0 and rep.solvable == 1000 and forced.mismatches == 0
          and with_negatives >= 300)
    verdict("c1 oracle exactness", ok,
            f"{rep.mismatches} mismatches in {rep.runs} runs ({with_negatives} with >=5 negative edges); "
            f"forced shortcut supplement {forced.mismatches} mismatches in {forced.runs}",
            t0)
    assert ok, rep.failures + forced.failures


# ----------------------------------------------------------------------
# 2. negative-cycle totality

def test_c2_negative_cycle_totality():
    t0 = time.perf_counter()
    bad = []
    for i in range(200):
        spec = GraphSpec("planted-cycle", 8 + i % 41, 0.15, seed=i)
        H = generate(spec)
        res = solve(H, 0)
        if res.distances is not None or not cycle_is_valid(H, res.cycle):
            bad.append(spec)
    forced_bad = []
    for i in range(20):
        spec = GraphSpec("planted-cycle", 3 + i % 3, 0.3, seed=9000 + i)
        H = generate(spec)
        res = solve(H, 0, SolveConfig(base_threshold=0, seed=i))
        if res.distances is not None or not cycle_is_valid(H, res.cycle):
            forced_bad.append(spec)
    ok = not bad and not forced_bad
    verdict("c2 negative-cycle totality", ok,
            f"{200 - len(bad)}/200 valid certificates; forced shortcut supplement "
            f"{20 - len(forced_bad)}/20", t0)
    assert ok, (bad + forced_bad)[:5]


# ----------------------------------------------------------------------
# 3, 4, 5, 8 on the audited suite

def test_c3_hop_reduction(suite):
    t0 = time.perf_counter()
    n, sample = _suite_total(suite, "hops")
    pairs = sum(r.report.pairs_checked for r in suite)
    ok = n == 0 and pairs > 0
    built = sum(r.seconds for r in suite)
    verdict("c3 hop reduction", ok,
            f"{n} violations over {pairs} pair checks on {len(suite)} instances "
            f"(suite built in {built:.0f}s)", t0 - built)
    assert ok, sample


def test_c4_shortcut_completeness(suite):
    t0 = time.perf_counter()
    n_post, s_post = _suite_total(suite, "completeness")
    n_pre, s_pre = _suite_total(suite, "completeness_pre")
    triples = sum(r.report.triples_checked for r in suite)
    ok = n_post == 0 and n_pre == 0 and triples > 0
    verdict("c4 shortcut completeness", ok,
            f"{n_post} post-iteration and {n_pre} pre-restore violations over {triples} triples", t0)
    assert ok, s_post + s_pre


def test_c5_structural_scans(suite):
    t0 = time.perf_counter()
    checks = ("structure", "negative_incident", "well_behaved", "invariant_one")
    found = {c: _suite_total(suite, c) for c in checks}
    ok = all(n == 0 for n, _ in found.values())
    verdict("c5 structural scans", ok,
            ", ".join(f"{c} {n}" for c, (n, _) in found.items()) + " violations", t0)
    assert ok, {c: s for c, (_, s) in found.items() if s}


def test_c8_distance_preservation(suite):
    t0 = time.perf_counter()
    n, sample = _suite_total(suite, "distance")
    wrong = []
    for run in suite:
        ref = bellman_ford(run.H, 0).distances
        if run.distances[:run.H.n] != ref:
            wrong.append(run.spec)
    ok = n == 0 and not wrong
    verdict("c8 distance preservation", ok,
            f"{n} all-pairs violations; final distances differ from Bellman-Ford on {len(wrong)}",
            t0)
    assert ok, sample + [str(s) for s in wrong[:5]]


# ----------------------------------------------------------------------
# 6. estimate quality

def test_c6_estimate_quality():
    t0 = time.perf_counter()
    bad = total = 0
    for seed in range(50):
        H = generate(GraphSpec("erdos", 256, 0.05, seed=seed))
        G = to_well_behaved(H)
        h = iteration_count(G.n) + 1
        rng = random.Random(seed)
        reweight(G, 1.0, h, EXACT_ORACLE, rng)
        M = exact_hop_matrix(G, h)
        reps = estimate_reps(G.n)
        for p in (1 / 8, 1 / 32):
            lo, hi = 1 / (8 * p), 4 / p
            for r, (d_in, d_out) in estimate_scale(G, p, reps, h, rng).items():
                total += 1
                if not all(lo <= x <= hi for x in exact_ball_sizes(M, r, d_in, d_out)):
                    bad += 1
    frac = bad / total
    ok = frac <= 0.01
    verdict("c6 estimate quality", ok,
            f"{bad}/{total} negative vertices outside the ball-size bounds ({100 * frac:.3f}%)", t0)
    assert ok


# ----------------------------------------------------------------------
# 7. growth and cost counters

def test_c7_counters(suite):
    t0 = time.perf_counter()
    cal = load_calibration(CALIBRATION)
    problems = []
    worst_heavy = worst_growth = 0.0
    for run in suite:
        c = run.G.counters
        n0 = 2 * run.H.n
        for it in c.iterations:
            ratio = heavy_ratio(it)
            worst_heavy = max(worst_heavy, ratio)
            if ratio > cal.heavy_limit:
                problems.append(f"{run.spec}: t={it.t} new heavy ratio {ratio}")
            if it.add_edge_max_depth > it.t:
                problems.append(f"{run.spec}: t={it.t} add-edge depth {it.add_edge_max_depth}")
            if it.add_edge_max_work > (it.t + 1) ** 2:
                problems.append(f"{run.spec}: t={it.t} add-edge work {it.add_edge_max_work}")
        g = growth_ratio(run.G.n, n0)
        worst_growth = max(worst_growth, g)
        if g > cal.growth_limit:
            problems.append(f"{run.spec}: growth ratio {g}")
    ok = not problems
    verdict("c7 growth and cost counters", ok,
            f"max heavy ratio {worst_heavy:.3f} (limit {cal.heavy_limit}), "
            f"max growth ratio {worst_growth:.3f} (limit {cal.growth_limit}), {len(problems)} violations",
            t0)
    assert ok, problems[:5]


# ----------------------------------------------------------------------
# 9. determinism

def test_c9_determinism(suite):
    t0 = time.perf_counter()
    differ = []
    for run in suite:
        G = to_well_behaved(run.H)
        cfg = SolveConfig(base_threshold=0, seed=run.spec.seed)
        run_iterations(G, cfg, random.Random(cfg.seed))
        if _stream(finalize(G, 0), G.counters) != run.stream:
            differ.append(run.spec)
    for spec in diff_specs({"n_min": 8, "n_max": 48}, 200):
        H = generate(spec)
        a, b = solve(H, 0), solve(H, 0)
        if _stream(a.distances, a.counters) != _stream(b.distances, b.counters):
            differ.append(spec)
    ok = not differ
    verdict("c9 determinism", ok,
            f"{len(differ)} differing streams over {len(suite)} forced and 200 default runs", t0)
    assert ok, differ[:5]


# ----------------------------------------------------------------------
# 10. archived scaling report

def test_c10_scaling_report():
    t0 = time.perf_counter()
    found = []
    for name in ("bench_spec_sizes.json", "bench_forced_small.json"):
        path = ROOT / "reports" / name
        if not path.exists():
            continue
        data = json.loads(path.read_text())
        rows = data.get("rows", [])
        if rows and "context" in data and "loglog_slope" in data:
            found.append(f"{name}: sizes {[r['n'] for r in rows]}, slope {data['loglog_slope']}")
    spec_sizes = json.loads((ROOT / "reports" / "bench_spec_sizes.json").read_text()) \
        if (ROOT / "reports" / "bench_spec_sizes.json").exists() else {"rows": []}
    ok = len(found) == 2 and [r["n"] for r in spec_sizes["rows"]] == [256, 512, 1024, 2048]
    verdict("c10 scaling report archived", ok, "; ".join(found) or "no reports", t0)
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
