"""Throughput comparison between the two simulation kernels.

Runs the same seeded workload through every available backend, checks
the results agree bit for bit, and reports events per second.

    python benchmarks/bench_kernel.py --steps 200000 --rows 50 --cols 50
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from coopsim import abm, kernel, networks
from coopsim.game import AIBehavior, donation


def build_config(args: argparse.Namespace) -> abm.SimConfig:
    if args.topology == "lattice":
        graph = networks.square_lattice(args.rows, args.cols)
    elif args.topology == "complete":
        graph = networks.complete(args.nodes)
    else:
        graph = networks.barabasi_albert(args.nodes, 2, seed=args.seed)
    ai_count = round(0.1 * graph.node_count)
    return abm.SimConfig(
        graph=graph, ai_count=ai_count, ai_behavior=AIBehavior.SAMARITAN,
        matrix=donation(2.0, 1.0), beta_h=0.5, steps=args.steps,
        seed=args.seed)


def bench(cfg: abm.SimConfig, backend: str, repeats: int) -> tuple[float, abm.RunResult]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = abm.run(cfg, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--topology", choices=("lattice", "complete", "ba"),
                        default="lattice")
    parser.add_argument("--rows", type=int, default=50)
    parser.add_argument("--cols", type=int, default=50)
    parser.add_argument("--nodes", type=int, default=1000)
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    cfg = build_config(args)
    backends = kernel.available_backends()
    print(f"workload: {args.topology}, {cfg.graph.node_count} nodes, "
          f"{cfg.steps} events, backends: {', '.join(backends)}")

    timings = {}
    results = {}
    for backend in backends:
        elapsed, result = bench(cfg, backend, args.repeats)
        timings[backend] = elapsed
        results[backend] = result
        print(f"  {backend:>8}: {elapsed:8.3f} s  "
              f"({cfg.steps / elapsed / 1e6:7.2f} M events/s)")

    if len(backends) == 2:
        a, b = (results[k] for k in backends)
        identical = (
            np.array_equal(a.state.action, b.state.action)
            and np.array_equal(a.state.fitness, b.state.fitness)
            and a.state.rng_state == b.state.rng_state
            and a.series.coop_frac == b.series.coop_frac
        )
        print(f"  outputs bit-identical: {identical}")
        if not identical:
            return 1
        slow = max(timings.values())
        fast = min(timings.values())
        print(f"  speedup: {slow / fast:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
