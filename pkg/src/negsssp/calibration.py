"""Calibrated constants for the growth and cost counters.

Two ratios are measured on a suite of forced runs (shortcut iterations even
below the base-case threshold):

* ``K``: newly heavy vertices per iteration over ``eta * log2(n)``, with n the
  vertex count at the start of the iteration;
* ``K_prime``: final vertex count over ``n0 * log2(n0)**4``.

The maxima are written once to a JSON file that is checked in; later runs are
held to ``16 * K`` and ``64 * K_prime``.
"""
from __future__ import annotations

import argparse
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .counters import IterationCounters, RunCounters
from .graph_core import InputGraph, to_well_behaved
from .oracle_harness import GraphSpec, generate, has_negative_cycle
from .sssp_driver import SolveConfig, run_iterations

FORCED_FAMILIES = ("erdos", "path", "grid", "layered")
HEAVY_HEADROOM = 16
GROWTH_HEADROOM = 64


def forced_suite(count: int, seed0: int = 0, n_min: int = 2, n_max: int = 8,
                 p: float = 0.4) -> Iterator[tuple[GraphSpec, InputGraph]]:
    """Solvable small instances cycling through families and sizes."""
    sizes = n_max - n_min + 1
    i = 0
    made = 0
    while made < count:
        spec = GraphSpec(FORCED_FAMILIES[i % len(FORCED_FAMILIES)], n_min + (i // 4) % sizes, p,
                         seed=seed0 + i)
        i += 1
        H = generate(spec)
        if has_negative_cycle(H):
            continue
        made += 1
        yield spec, H


def forced_counters(H: InputGraph, seed: int) -> tuple[RunCounters, int]:
    """Counters of a run of every shortcut iteration, and the final vertex count."""
    G = to_well_behaved(H)
    run_iterations(G, SolveConfig(base_threshold=0, seed=seed), random.Random(seed))
    return G.counters, G.n


def heavy_ratio(it: IterationCounters) -> float:
    denom = it.eta * math.log2(max(2, it.vertices_before))
    return it.new_heavy / denom if denom else 0.0


def growth_ratio(final_vertices: int, n0: int) -> float:
    return final_vertices / (n0 * math.log2(max(2, n0)) ** 4)


@dataclass
class Calibration:
    K: float
    K_prime: float
    instances: int
    seed0: int

    @property
    def heavy_limit(self) -> float:
        return HEAVY_HEADROOM * self.K

    @property
    def growth_limit(self) -> float:
        return GROWTH_HEADROOM * self.K_prime

    def as_dict(self) -> dict:
        return {"K": self.K, "K_prime": self.K_prime, "instances": self.instances,
                "seed0": self.seed0, "heavy_headroom": HEAVY_HEADROOM,
                "growth_headroom": GROWTH_HEADROOM}


def calibrate(count: int = 40, seed0: int = 100_000) -> Calibration:
    K = K_prime = 0.0
    for spec, H in forced_suite(count, seed0):
        counters, final_n = forced_counters(H, spec.seed)
        K = max([K] + [heavy_ratio(it) for it in counters.iterations])
        K_prime = max(K_prime, growth_ratio(final_n, 2 * H.n))
    return Calibration(K, K_prime, count, seed0)


def load_calibration(path: str | Path) -> Calibration:
    d = json.loads(Path(path).read_text())
    return Calibration(d["K"], d["K_prime"], d["instances"], d["seed0"])


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description="Measure the counter constants and write them as JSON.")
    ap.add_argument("--out", required=True)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--seed0", type=int, default=100_000)
    args = ap.parse_args(argv)
    cal = calibrate(args.count, args.seed0)
    Path(args.out).write_text(json.dumps(cal.as_dict(), indent=2, sort_keys=True) + "\n")
    print(json.dumps(cal.as_dict(), sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
