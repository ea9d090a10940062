#!/usr/bin/env python3
"""Benchmark the matching kernels: numba-jitted versus the pure fallback.

Runs a maximum-matching workload and a full rejection scan in the current
process, then (unless --no-compare) re-runs itself with RESERVES_NO_NUMBA=1
and prints both timings side by side. Compilation happens before any timer
starts.

Usage:
    python benchmarks/bench_matching.py
    python benchmarks/bench_matching.py --agents 500 --categories 20 --repeats 5
"""

import argparse
import json
import os
import subprocess
import sys
import time

from reserves import _kernels
from reserves.generator import random_instance
from reserves.graph import max_matching_size, reservation_graph
from reserves.rules import rr


def run_workload(agents: int, categories: int, max_quota: int, density: float,
                 repeats: int) -> dict:
    _kernels.warm_up()
    inst = random_instance(agents, categories, max_quota=max_quota,
                           eligibility_density=density, seed=42)
    match_times = []
    for _ in range(repeats):
        g = reservation_graph(inst)  # fresh graph so CSR build is included
        t0 = time.perf_counter()
        size = max_matching_size(g)
        match_times.append(time.perf_counter() - t0)
    scan_times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        matching, _ = rr(inst)
        scan_times.append(time.perf_counter() - t0)
    return {
        "numba": _kernels.USING_NUMBA,
        "matching_size": size,
        "scan_size": matching.size(),
        "max_matching_s": min(match_times),
        "rejection_scan_s": min(scan_times),
    }


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--agents", type=int, default=300)
    ap.add_argument("--categories", type=int, default=12)
    ap.add_argument("--max-quota", type=int, default=20)
    ap.add_argument("--density", type=float, default=0.5)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--no-compare", action="store_true",
                    help="only run the current mode, emit JSON")
    args = ap.parse_args()

    mine = run_workload(args.agents, args.categories, args.max_quota,
                        args.density, args.repeats)
    if args.no_compare:
        json.dump(mine, sys.stdout)
        print()
        return 0

    env = dict(os.environ)
    if _kernels.USING_NUMBA:
        env["RESERVES_NO_NUMBA"] = "1"
    else:
        env.pop("RESERVES_NO_NUMBA", None)
    other = json.loads(subprocess.run(
        [sys.executable, __file__, "--no-compare",
         "--agents", str(args.agents), "--categories", str(args.categories),
         "--max-quota", str(args.max_quota), "--density", str(args.density),
         "--repeats", str(args.repeats)],
        capture_output=True, text=True, env=env, check=True).stdout)

    jit, pure = (mine, other) if mine["numba"] else (other, mine)
    if not jit["numba"]:
        print("numba is unavailable; both runs used the pure fallback")
        return 1
    assert jit["matching_size"] == pure["matching_size"]
    assert jit["scan_size"] == pure["scan_size"]

    print(f"workload: {args.agents} agents, {args.categories} categories, "
          f"density {args.density}, best of {args.repeats}")
    print(f"{'kernel':<18}{'max matching':>14}{'rejection scan':>16}")
    for label, row in (("numba @njit", jit), ("pure fallback", pure)):
        print(f"{label:<18}{row['max_matching_s'] * 1e3:>11.2f} ms"
              f"{row['rejection_scan_s'] * 1e3:>13.2f} ms")
    print(f"{'speedup':<18}"
          f"{pure['max_matching_s'] / jit['max_matching_s']:>12.1f}x"
          f"{pure['rejection_scan_s'] / jit['rejection_scan_s']:>14.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
