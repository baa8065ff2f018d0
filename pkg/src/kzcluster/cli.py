"""Batch command-line front end.

Subcommands:
  cluster        graph clustering: preprocess + local search, result JSON
  spanner        lift a point set into a spanner graph (edge-list output)
  cluster-points spanner construction followed by clustering
  oracle         brute-force optimum on a small graph
  check          replay an operation trace, auditing consistency per step
  bench          timing table (TSV), optionally with a scaling figure

All randomness is seeded (default seed 0); with the sequential scheduler the
JSON output is byte-identical across runs for identical arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import report
from .cover import build_cover
from .errors import KzClusterError
from .gen import random_connected_graph
from .graph import read_edge_list, write_edge_list
from .oracle import brute_force_opt, check_state_consistency, exact_cost
from .preprocess import coarse_solution, normalize_weights
from .search import alpha_z, compute_s, run_local_search
from .spanner import (JaccardDataset, LpDataset, MinHashJaccardFamily,
                      PStableLshFamily, build_lsh_spanner, read_jaccard_sets,
                      read_points, spanner_params)
from .state import StateParams, initialize

S_CAP = 64  # desk-scale cap on the probe count; --s overrides


def _dump_json(obj, path: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _resolve_s(args, g, cover_size: int) -> int:
    if args.s is not None:
        return args.s
    theoretical = compute_s(args.epsilon, args.z, g.n, g.m, cover_size, args.s_factor)
    return min(theoretical, S_CAP)


def _cluster_result(args, g, sol, stats, s: int, normalized: bool) -> dict:
    return {
        "centers": sol.centers,
        "assignment": sol.assignment,
        "exact_cost": sol.exact_cost,
        "estimated_cost": sol.estimated_cost,
        "alpha_target": sol.alpha_target,
        "stats": {
            "iterations": stats.positive_iterations,
            "volume_sum": stats.volume_sum,
            "potential_initial": stats.potential_initial,
            "potential_final": stats.potential_final,
        },
        "provenance": {
            "n": g.n,
            "m": g.m,
            "k": args.k,
            "z": args.z,
            "epsilon": args.epsilon,
            "beta": args.beta if args.beta is not None else g.n - 1,
            "s": s,
            "scheduler": args.scheduler,
            "seed": args.seed,
            "normalized": normalized,
            "iteration_bound": stats.iteration_cap,
            "volume_bound": stats.volume_cap,
        },
    }


def _run_cluster_on_graph(args, g):
    normalized = not args.no_normalize
    work = normalize_weights(g, args.k, args.z, args.epsilon) if normalized else g
    cover = build_cover(work.n)
    params = StateParams.for_graph(work, cover, args.z, args.epsilon, args.beta)
    s = _resolve_s(args, work, cover.size)
    rng = np.random.default_rng(args.seed)
    sol, stats = run_local_search(work, args.k, params, s,
                                  scheduler=args.scheduler, rng=rng,
                                  audit=args.audit)
    result = _cluster_result(args, work, sol, stats, s, normalized)
    if normalized:
        # exact cost on the original weights is the figure of merit
        result["exact_cost_original"] = exact_cost(g, sol.centers, args.z)
    if args.audit:
        result["audit"] = "pass" if not stats.audit_violations else stats.audit_violations
    return result, sol, stats


def cmd_cluster(args) -> int:
    g = read_edge_list(args.graph)
    result, sol, stats = _run_cluster_on_graph(args, g)
    _dump_json(result, args.out)
    if args.report:
        os.makedirs(args.report, exist_ok=True)
        _dump_json(result, os.path.join(args.report, "result.json"))
        report.save_cost_trajectory(stats.cost_trajectory,
                                    os.path.join(args.report, "cost_trajectory.png"),
                                    exact_final=sol.exact_cost)
    if args.audit and stats.audit_violations:
        return 1
    return 0


def _load_dataset(args):
    if args.metric == "jaccard":
        return read_jaccard_sets(args.points)
    pts = read_points(args.points)
    if args.metric == "l2":
        return LpDataset(pts, 2.0)
    if args.metric.startswith("lp:"):
        return LpDataset(pts, float(args.metric.split(":", 1)[1]))
    raise KzClusterError(f"unknown metric {args.metric!r}")


def _build_spanner(args):
    dataset = _load_dataset(args)
    if args.metric == "jaccard":
        family = MinHashJaccardFamily(dataset.universe_size)
        aspect = 1.0
    else:
        family = PStableLshFamily(dataset.points.shape[1], dataset.p)
        dmin, dmax = dataset.min_max_distance()
        aspect = dmax / dmin if dmin > 0 else math.inf
    params = spanner_params(dataset.n, aspect, family, args.c,
                            rep_constant=args.rep_constant, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    stats: dict = {}
    g = build_lsh_spanner(dataset, family, args.c, params, rng=rng, stats=stats)
    return g, stats


def cmd_spanner(args) -> int:
    g, stats = _build_spanner(args)
    write_edge_list(g, args.out)
    sys.stderr.write(f"spanner: n={g.n} m={g.m} reps={stats['reps']} "
                     f"scales={len(stats['scales'])} events={stats['events']}\n")
    return 0


def cmd_cluster_points(args) -> int:
    g, spanner_stats = _build_spanner(args)
    result, sol, stats = _run_cluster_on_graph(args, g)
    result["spanner"] = {
        "edges": spanner_stats["edges"],
        "reps": spanner_stats["reps"],
        "scales": spanner_stats["scales"],
        "events": spanner_stats["events"],
        "c": args.c,
    }
    _dump_json(result, args.out)
    if args.audit and stats.audit_violations:
        return 1
    return 0


def cmd_oracle(args) -> int:
    g = read_edge_list(args.graph)
    centers, cost = brute_force_opt(g, args.k, args.z, cap=args.cap)
    _dump_json({"centers": list(centers), "cost": cost, "n": g.n, "m": g.m,
                "k": args.k, "z": args.z}, args.out)
    return 0


def cmd_check(args) -> int:
    g = read_edge_list(args.graph)
    cover = build_cover(g.n)
    params = StateParams.for_graph(g, cover, args.z, args.epsilon, args.beta)
    rng = np.random.default_rng(args.seed)
    state = None
    with open(args.trace, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            op = parts[0]
            if op == "init":
                state = initialize(g, cover, params, [int(x) for x in parts[1:]])
            elif state is None:
                sys.stderr.write(f"line {lineno}: trace must start with 'init'\n")
                return 2
            elif op == "insert":
                state.insert(int(parts[1]))
            elif op == "delete":
                state.delete(int(parts[1]))
            elif op == "sample":
                state.sample_noncenter(rng)
            else:
                sys.stderr.write(f"line {lineno}: unknown op {op!r}\n")
                return 2
            rep = check_state_consistency(g, state)
            if not rep.ok:
                sys.stderr.write(f"line {lineno}: consistency violations after {op}:\n")
                for v in rep.violations:
                    sys.stderr.write(f"  {v}\n")
                return 1
    sys.stderr.write("trace replayed, all checks passed\n")
    return 0


def cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows = []
    for n in args.sizes:
        g = random_connected_graph(n, 2 * n, rng)
        k = max(2, n // 10)
        cover = build_cover(g.n)
        params = StateParams.for_graph(g, cover, args.z, args.epsilon, None)
        t0 = time.perf_counter()
        state = initialize(g, cover, params, coarse_solution(g, k))
        init_ms = (time.perf_counter() - t0) * 1e3

        noncenters = [v for v in range(n) if v not in state.C]
        trials = min(30, len(noncenters))
        t0 = time.perf_counter()
        for v in noncenters[:trials]:
            state.insert(v)
            state.delete(v)
        swap_us = (time.perf_counter() - t0) / max(trials, 1) * 1e6

        t0 = time.perf_counter()
        for _ in range(1000):
            state.sample_noncenter(rng)
        sample_us = (time.perf_counter() - t0) / 1000 * 1e6

        s = min(compute_s(args.epsilon, args.z, g.n, g.m, cover.size), S_CAP)
        t0 = time.perf_counter()
        sol, stats = run_local_search(g, k, params, s, rng=np.random.default_rng(args.seed))
        ls_ms = (time.perf_counter() - t0) * 1e3
        rows.append({
            "n": n, "m": g.m, "k": k,
            "init_ms": round(init_ms, 3),
            "insert_us": round(swap_us / 2, 1),
            "delete_us": round(swap_us / 2, 1),
            "sample_us": round(sample_us, 2),
            "local_search_ms": round(ls_ms, 1),
            "iterations": stats.positive_iterations,
            "exact_cost": sol.exact_cost,
        })
    cols = list(rows[0].keys())
    lines = ["\t".join(cols)]
    for r in rows:
        lines.append("\t".join(str(r[c]) for c in cols))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        report.save_bench_figure(rows, args.plot)
    return 0


def _add_cluster_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--beta", type=int, default=None,
                   help="hop bound (default n-1, always valid on connected graphs)")
    p.add_argument("--s", type=int, default=None,
                   help="probe count per iteration (default: theory value capped at %d)" % S_CAP)
    p.add_argument("--s-factor", type=float, default=2.0, dest="s_factor",
                   help="safety exponent c0 in the probe-count formula")
    p.add_argument("--scheduler", choices=["round_robin", "sequential"],
                   default="sequential")
    p.add_argument("--no-normalize", action="store_true",
                   help="skip edge-weight normalization (aspect-ratio bound)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--audit", action="store_true",
                   help="run the full invariant audit after every committed swap")
    p.add_argument("--out", default=None, help="result JSON path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kzcluster", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a weighted graph")
    p.add_argument("--graph", required=True, help="edge-list file: 'n m' then 'u v w' lines")
    _add_cluster_opts(p)
    p.add_argument("--report", default=None,
                   help="directory for result.json plus rendered figures")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("spanner", help="build an LSH spanner from points")
    p.add_argument("--points", required=True)
    p.add_argument("--metric", default="l2", help="l2 | lp:<p> | jaccard")
    p.add_argument("--c", type=float, required=True, help="stretch target")
    p.add_argument("--rep-constant", type=float, default=3.0, dest="rep_constant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output edge-list path")
    p.set_defaults(func=cmd_spanner)

    p = sub.add_parser("cluster-points", help="spanner construction + clustering")
    p.add_argument("--points", required=True)
    p.add_argument("--metric", default="l2", help="l2 | lp:<p> | jaccard")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--rep-constant", type=float, default=3.0, dest="rep_constant")
    _add_cluster_opts(p)
    p.set_defaults(func=cmd_cluster_points)

    p = sub.add_parser("oracle", help="brute-force optimum (small n)")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--cap", type=int, default=10 ** 6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="replay an operation trace with per-step audits")
    p.add_argument("--graph", required=True)
    p.add_argument("--trace", required=True,
                   help="text trace: 'init c0 c1 ...' then 'insert v' | 'delete v' | 'sample'")
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--beta", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="timing table over random graphs (TSV)")
    p.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")],
                   default=[50, 100, 200])
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="TSV path (default stdout)")
    p.add_argument("--plot", default=None, help="scaling-figure PNG path")
    p.set_defaults(func=cmd_bench)
    return ap


def run_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KzClusterError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
