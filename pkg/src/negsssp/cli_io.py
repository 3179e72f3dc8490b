"""DIMACS shortest-path files, result formatting and the command-line interface.

Exit codes: 0 success, 1 negative cycle (certificate printed), 2 usage or
parse error, 3 internal invariant failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .errors import HopResidueError, InvariantViolation, ParseError, PotentialInvalid, PreconditionViolated
from .graph_core import InputGraph
from .oracle_harness import FAMILIES, GraphSpec, bellman_ford, differential_run, generate
from .preprocess import EXACT_ORACLE, SAMPLED, iteration_count
from .sssp_driver import SolveConfig, SolveResult, solve

EXIT_OK = 0
EXIT_CYCLE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

MODES = {"exact-oracle": EXACT_ORACLE, "sampled": SAMPLED}


# ----------------------------------------------------------------------
# DIMACS

def parse_dimacs(text: str) -> InputGraph:
    """Parse "p sp n m" plus "a u v w" arcs (1-based) into a 0-based InputGraph."""
    n = m = None
    edges: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise ParseError(lineno, "second problem line")
            if len(parts) != 4 or parts[1] != "sp":
                raise ParseError(lineno, "expected 'p sp <n> <m>'")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, "non-integer size") from None
            if n < 1 or m < 0:
                raise ParseError(lineno, "sizes out of range")
        elif parts[0] == "a":
            if n is None:
                raise ParseError(lineno, "arc before problem line")
            if len(parts) != 4:
                raise ParseError(lineno, "expected 'a <u> <v> <w>'")
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, "non-integer arc field") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(lineno, f"vertex index outside 1..{n}")
            edges.append((u - 1, v - 1, w))
        else:
            raise ParseError(lineno, f"unknown line type {parts[0]!r}")
    if n is None:
        raise ParseError(0, "missing problem line")
    if len(edges) != m:
        raise ParseError(0, f"header announces {m} arcs, found {len(edges)}")
    return InputGraph(n, edges)


def write_dimacs(H: InputGraph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines += [f"c {c}" for c in comment.splitlines()]
    lines.append(f"p sp {H.n} {len(H.edges)}")
    lines += [f"a {u + 1} {v + 1} {w}" for u, v, w in H.edges]
    return "\n".join(lines) + "\n"


def read_graph(path: str) -> InputGraph:
    return parse_dimacs(Path(path).read_text())


# ----------------------------------------------------------------------
# output

def format_distances(dist: Sequence[int | None]) -> str:
    """One "vertex distance" line per vertex, 1-based, INF when unreachable."""
    return "".join(f"{v + 1} {'INF' if d is None else d}\n" for v, d in enumerate(dist))


def format_cycle(cycle: Sequence[tuple[int, int, int]]) -> str:
    total = sum(w for _, _, w in cycle)
    lines = [f"negative cycle weight {total}"]
    lines += [f"{u + 1} {v + 1} {w}" for u, v, w in cycle]
    return "\n".join(lines) + "\n"


def emit_result(res: SolveResult, out: TextIO) -> int:
    if res.cycle is not None:
        out.write(format_cycle(res.cycle))
        return EXIT_CYCLE
    out.write(format_distances(res.distances))
    return EXIT_OK


# ----------------------------------------------------------------------
# bench

def bench_graph(n: int, seed: int, density: float = 0.5) -> InputGraph:
    """Dense random solvable graph for timing runs."""
    return generate(GraphSpec("erdos", n, density, seed=seed))


def fit_slope(ns: Sequence[float], times: Sequence[float]) -> float | None:
    """Least-squares slope of log(time) against log(n); None with fewer than two points."""
    pts = [(math.log(a), math.log(b)) for a, b in zip(ns, times) if b > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


class BudgetExceeded(Exception):
    pass


def _budget_hook(max_vertices: int | None, deadline: float | None, progress: list[dict]):
    """Stop a run past its limits; log each finished iteration into ``progress``."""
    t0 = time.perf_counter()

    def hook(event: str, state) -> None:
        if event == "after_iteration":
            progress.append({"t": state.t, "vertices": state.G.n,
                             "elapsed_seconds": time.perf_counter() - t0})
        if max_vertices is not None and state.G.n > max_vertices:
            raise BudgetExceeded(f"{state.G.n} vertices at iteration {state.t} ({event})")
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(f"time budget hit at iteration {state.t} ({event})")
    return hook


def run_bench(sizes: Sequence[int], seed: int = 0, config: SolveConfig | None = None,
              density: float = 0.5, max_vertices: int | None = None,
              time_budget: float | None = None) -> dict:
    """Time solve() per size; rows stopped by a budget are reported, not fitted."""
    config = config or SolveConfig(seed=seed)
    rows = []
    for n in sizes:
        H = bench_graph(n, seed, density)
        deadline = None if time_budget is None else time.monotonic() + time_budget
        progress: list[dict] = []
        cfg = replace(config, hook=_budget_hook(max_vertices, deadline, progress))
        t0 = time.perf_counter()
        status = "ok"
        res = None
        try:
            res = solve(H, 0, cfg)
        except BudgetExceeded as exc:
            status = f"budget exceeded: {exc}"
        wall = time.perf_counter() - t0
        row = {"n": n, "m": len(H.edges), "wall_seconds": wall, "status": status,
               "iterations_planned": iteration_count(2 * n), "iterations_done": progress}
        if res is not None:
            c = res.counters
            row.update({
                "base_case": c.base_case,
                "iterations": len(c.iterations),
                "relaxations": c.relaxations,
                "ball_sq_sum": sum(it.ball_sq_sum for it in c.iterations),
                "final_vertices": c.final_vertices,
                "final_edges": c.final_edges,
                "vertex_growth": c.final_vertices / (2 * n) if c.final_vertices else None,
            })
        rows.append(row)
    done = [r for r in rows if r["status"] == "ok"]
    return {
        "config": config.as_dict(),
        "seed": seed,
        "density": density,
        "max_vertices": max_vertices,
        "time_budget": time_budget,
        "rows": rows,
        "loglog_slope": fit_slope([r["n"] for r in done], [r["wall_seconds"] for r in done]),
        "context": ("The analysed bound is n^{2+o(1)} time for single-source shortest paths "
                    "with real weights; desk-scale timings are reported, not asserted."),
    }


# ----------------------------------------------------------------------
# diff

def diff_specs(cfg: dict, runs: int) -> list[GraphSpec]:
    """Instance specs for a differential run; cycles through families and sizes."""
    families = cfg.get("families", ["erdos", "path", "grid", "layered"])
    n_min, n_max = cfg.get("n_min", 8), cfg.get("n_max", 48)
    base_seed = cfg.get("seed", 0)
    specs = []
    for i in range(runs):
        fam = families[i % len(families)]
        n = n_min + (i * 7919 + base_seed) % (n_max - n_min + 1)
        specs.append(GraphSpec(fam, n, cfg.get("p", 0.15), cfg.get("lo", -8), cfg.get("hi", 15),
                               cfg.get("neg_fraction", 0.3), cfg.get("solvable", True),
                               base_seed + i))
    return specs


# ----------------------------------------------------------------------
# command line

def _config_from_args(args: argparse.Namespace) -> SolveConfig:
    return SolveConfig(mode=MODES[args.mode], seed=args.seed, gamma_scale=args.gamma_scale,
                       base_threshold=args.base_threshold)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="negsssp", description="Negative-weight single-source shortest paths.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def solver_opts(p: argparse.ArgumentParser) -> None:
        p.add_argument("--mode", choices=sorted(MODES), default="exact-oracle")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--gamma-scale", type=float, default=1.0)
        p.add_argument("--base-threshold", type=int, default=SolveConfig.base_threshold,
                       help="negative-vertex count at or below which the hop-limited base case runs")

    p = sub.add_parser("solve", help="shortest paths from one source")
    p.add_argument("file")
    p.add_argument("--source", type=int, required=True, help="1-based source vertex")
    p.add_argument("--counters", help="write the counter stream as JSON here")
    solver_opts(p)

    p = sub.add_parser("oracle", help="Bellman-Ford reference answer")
    p.add_argument("file")
    p.add_argument("--source", type=int, required=True)

    p = sub.add_parser("diff", help="solver against Bellman-Ford on generated instances")
    p.add_argument("--spec", help="JSON file with generator settings")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--report", help="write the report as JSON here")
    solver_opts(p)

    p = sub.add_parser("gen", help="write a generated instance")
    p.add_argument("--family", choices=FAMILIES, default="erdos")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("bench", help="wall time per size with a fitted log-log slope")
    p.add_argument("--sizes", default="256,512,1024,2048")
    p.add_argument("--report", required=True)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--max-vertices", type=int, default=None)
    p.add_argument("--time-budget", type=float, default=None, help="seconds per size")
    solver_opts(p)
    return ap


def _source(H: InputGraph, k: int) -> int:
    if not 1 <= k <= H.n:
        raise ParseError(0, f"source {k} outside 1..{H.n}")
    return k - 1


def _write_report(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _dispatch(args, out)
    except (ParseError, OSError, json.JSONDecodeError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (InvariantViolation, PreconditionViolated, PotentialInvalid, HopResidueError) as exc:
        err.write(f"internal invariant failure: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


def _dispatch(args: argparse.Namespace, out: TextIO) -> int:
    if args.cmd == "solve":
        H = read_graph(args.file)
        cfg = _config_from_args(args)
        res = solve(H, _source(H, args.source), cfg)
        if args.counters:
            payload = {"config": cfg.as_dict(), "source": args.source, **res.counters.as_dict()}
            Path(args.counters).write_text(json.dumps(payload, indent=2, sort_keys=True))
        return emit_result(res, out)
    if args.cmd == "oracle":
        H = read_graph(args.file)
        ref = bellman_ford(H, _source(H, args.source))
        if ref.cycle is not None:
            out.write(format_cycle(ref.cycle))
            return EXIT_CYCLE
        out.write(format_distances(ref.distances))
        return EXIT_OK
    if args.cmd == "diff":
        spec_cfg = json.loads(Path(args.spec).read_text()) if args.spec else {}
        cfg = _config_from_args(args)
        rep = differential_run(diff_specs(spec_cfg, args.runs), cfg)
        payload = {"generator": spec_cfg, "config": cfg.as_dict(), **rep.as_dict()}
        text = json.dumps(payload, indent=2, sort_keys=True)
        if args.report:
            _write_report(args.report, text)
        out.write(text + "\n")
        return EXIT_OK if rep.mismatches == 0 else EXIT_INTERNAL
    if args.cmd == "gen":
        spec = GraphSpec(args.family, args.n, args.p, seed=args.seed)
        H = generate(spec)
        Path(args.output).write_text(write_dimacs(H, json.dumps(asdict(spec), sort_keys=True)))
        return EXIT_OK
    if args.cmd == "bench":
        sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
        rep = run_bench(sizes, args.seed, _config_from_args(args), args.density,
                        args.max_vertices, args.time_budget)
        text = json.dumps(rep, indent=2, sort_keys=True)
        _write_report(args.report, text)
        out.write(text + "\n")
        return EXIT_OK
    raise AssertionError(args.cmd)


if __name__ == "__main__":
    sys.exit(main())
