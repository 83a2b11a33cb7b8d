#!/usr/bin/env python3
"""Randomized engine-vs-oracle cross-check, configurable from the shell.

Usage: cross_check_random.py [count] [seed] [depth]
Prints a summary and exits nonzero on any disagreement.
"""

import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import random_problem
from llx.engine import LimitExceeded, SearchLimits, prove_all_paths, prove_exists
from llx.interchange import dumps_cfir
from llx.oracle import oracle_reachable


def main() -> int:
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 500
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    depth = int(sys.argv[3]) if len(sys.argv) > 3 else 8
    rng = random.Random(seed)
    limits = SearchLimits(max_depth=depth, max_states=50_000)
    compared = skipped = disagreements = 0
    start = time.perf_counter()
    for _ in range(count):
        problem = random_problem(rng)
        for mode, prover in (("exists", prove_exists), ("all_paths", prove_all_paths)):
            engine_verdict = prover(problem, limits)
            oracle_verdict = oracle_reachable(problem, depth, mode)
            if isinstance(engine_verdict, LimitExceeded) or isinstance(
                oracle_verdict, LimitExceeded
            ):
                skipped += 1
                continue
            compared += 1
            if type(engine_verdict) is not type(oracle_verdict):
                disagreements += 1
                print(f"DISAGREEMENT ({mode}):\n{dumps_cfir(problem)}")
                print(f"  engine: {engine_verdict}\n  oracle: {oracle_verdict}")
    elapsed = time.perf_counter() - start
    print(
        f"{compared} comparisons, {skipped} skipped on limits, "
        f"{disagreements} disagreements in {elapsed:.1f}s"
    )
    return 1 if disagreements else 0


if __name__ == "__main__":
    sys.exit(main())
