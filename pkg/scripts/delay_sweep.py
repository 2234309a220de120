#!/usr/bin/env python3
"""Instrumented delay sweep across domain sizes.

Runs the enumeration engine on the dense isolated-pairs family at several
sizes and prints per-size delay statistics in elementary operations (wall
clock shown for orientation only; the constant-delay claim is about work, not
machine noise).

Usage: python scripts/delay_sweep.py [--sizes 1000,10000,100000] [--mode both]
"""

import argparse
import sys
import time

from approxenum import figures, selfcheck
from approxenum.engine import enumerate_general, enumerate_local
from approxenum.neighborhoods import TypeRegistry


def sweep(mode: str, sizes, seed: int, cap: int) -> None:
    registry = TypeRegistry()
    print(f"--- mode: {mode} ---")
    print(f"{'n':>9} {'outputs':>8} {'max_ops':>8} {'p99_ops':>8} {'bound':>7} "
          f"{'oracle':>7} {'wall_s':>7}")
    for n in sizes:
        db = figures.isolated_db(n)
        sink = []
        t0 = time.perf_counter()
        if mode == "local":
            q = figures.isolated_pair_query(registry, radius=2)
            summary = enumerate_local(db, q, gamma=0.3, seed=seed, emit=sink.append,
                                      registry=registry, instrument=True,
                                      max_outputs=cap, keep_delays=True)
        else:
            q = selfcheck._general_iso_query(registry)
            summary = enumerate_general(db, q, gamma=0.3, epsilon=0.3, seed=seed,
                                        emit=sink.append, registry=registry,
                                        tester="sampling", instrument=True,
                                        max_outputs=cap, keep_delays=True)
        wall = time.perf_counter() - t0
        delays = sorted(summary.delays) or [0]
        p99 = delays[min(len(delays) - 1, int(0.99 * len(delays)))]
        print(f"{n:>9} {summary.outputs:>8} {summary.max_delay_ops:>8} {p99:>8} "
              f"{summary.delay_bound:>7} {summary.max_oracle_per_output:>7} "
              f"{wall:>7.2f}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,10000,100000")
    parser.add_argument("--mode", default="both", choices=["local", "general", "both"])
    parser.add_argument("--seed", type=int, default=41)
    parser.add_argument("--max-outputs", type=int, default=1200)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s]
    modes = ["local", "general"] if args.mode == "both" else [args.mode]
    for mode in modes:
        sweep(mode, sizes, args.seed, args.max_outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
