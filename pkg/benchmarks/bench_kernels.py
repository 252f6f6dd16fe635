"""Timing comparison of the two kernel engines on identical workloads.

The engine is fixed at import time, so each engine runs in its own
subprocess: once as-is (numba when installed) and once with
HYPERLIM_NO_NUMBA=1 forcing the numpy fallback. The parent prints a table
and verifies both engines returned identical checksums.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _workloads():
    import numpy as np

    from hyperlim import kernels, rng
    from hyperlim.combinatorics import comb_table
    from hyperlim.hypergraph import Hypergraph, densities, hom
    from hyperlim.hypergraphon import builtin_w, density
    from hyperlim.sampling import sample_w_edge_count

    W = builtin_w("example1", 2)
    F4 = Hypergraph.random(2, 4, 0.7, 11)
    H28 = Hypergraph.random(2, 28, 0.3, 12)
    G500 = Hypergraph.random(2, 500, 0.05, 13)
    tri = Hypergraph(2, 3, [(0, 1), (0, 2), (1, 2)])
    edges = np.array(tri.sorted_edges(), dtype=np.int64)
    flags = np.ones(3, dtype=np.int64)
    ct500 = comb_table(500, 2)
    member500 = G500.member_array()

    def bench_hom():
        return hom(F4, H28)

    def bench_induced():
        return densities(F4, H28).t_ind.numerator

    def bench_eval_maps():
        maps = kernels.uniform_maps(200_000, 3, 500, rng.derive(3, rng.TAG_INJECTIVE))
        return kernels.eval_maps_count(maps, edges, flags, member500, ct500, 2)

    def bench_sample():
        return sum(sample_w_edge_count(W, 900, s) for s in range(4))

    def bench_mc_density():
        est, _ = density(tri, W, mode="montecarlo", samples=300_000, seed=5)
        return round(est * 300_000)

    return [
        ("hom backtracking (4 into 28 vertices)", bench_hom),
        ("induced counts (4 into 28 vertices)", bench_induced),
        ("evaluate 200k maps (triangle, n=500)", bench_eval_maps),
        ("step sampling 4x (n=900)", bench_sample),
        ("monte carlo density (300k points)", bench_mc_density),
    ]


def run_worker(repeat):
    from hyperlim import kernels

    kernels.warmup()
    results = {}
    for name, fn in _workloads():
        fn()  # warm path once so timings exclude one-off setup
        best = float("inf")
        check = None
        for _ in range(repeat):
            t0 = time.perf_counter()
            check = fn()
            best = min(best, time.perf_counter() - t0)
        results[name] = {"seconds": best, "check": int(check)}
    print(json.dumps({"engine": "numba" if kernels.USING_NUMBA else "numpy", "results": results}))


def run_parent(repeat):
    here = os.path.abspath(__file__)
    reports = {}
    for label, extra_env in (("numba", {}), ("numpy", {"HYPERLIM_NO_NUMBA": "1"})):
        env = dict(os.environ)
        env.pop("HYPERLIM_NO_NUMBA", None)
        env.update(extra_env)
        out = subprocess.run(
            [sys.executable, here, "--worker", "--repeat", str(repeat)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        reports[label] = json.loads(out.stdout.strip().splitlines()[-1])
    if reports["numba"]["engine"] != "numba":
        print("note: numba unavailable, both columns ran the numpy fallback")
    rows = []
    for name, a in reports["numba"]["results"].items():
        b = reports["numpy"]["results"][name]
        if a["check"] != b["check"]:
            raise SystemExit(f"engine mismatch on {name}: {a['check']} vs {b['check']}")
        rows.append((name, a["seconds"], b["seconds"]))
    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numba':>9}  {'numpy':>9}  {'speedup':>8}")
    for name, ta, tb in rows:
        print(f"{name:<{width}}  {ta:>8.4f}s  {tb:>8.4f}s  {tb / ta:>7.1f}x")
    print("checksums identical across engines")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", action="store_true")
    args = ap.parse_args()
    if args.worker:
        run_worker(args.repeat)
    else:
        run_parent(args.repeat)


if __name__ == "__main__":
    main()
