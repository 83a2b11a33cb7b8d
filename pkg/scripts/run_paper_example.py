#!/usr/bin/env python3
"""Walk the bundled training-phase example end to end.

Verifies the goal on all paths, prints each proof in the three styles,
and dumps the petri-net, clause and interchange views.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from llx.core import parse_problem
from llx.engine import Proven, prove_all_paths
from llx.interchange import dumps_cfir, export_clf
from llx.petri import export_dot, to_petri
from llx.proof import render_proof, trace_to_proof

FIXTURE = Path(__file__).resolve().parent.parent / "src" / "llx" / "fixtures" / "paper.llx"


def main() -> int:
    problem = parse_problem(FIXTURE.read_text(), name="paper")
    verdict = prove_all_paths(problem)
    if not isinstance(verdict, Proven):
        print(f"unexpected verdict: {verdict}")
        return 1
    print(f"VERIFIED ({len(verdict.traces)} paths)\n")
    for i, trace in enumerate(verdict.traces):
        print(f"--- path {i}: {trace} ---")
        proof = trace_to_proof(problem, trace)
        for style in ("transition", "simplified", "full"):
            print(f"[{style}]")
            print(render_proof(proof, style))
    print("--- petri net (dot) ---")
    print(export_dot(to_petri(problem)))
    print("--- clauses ---")
    print(export_clf(problem))
    print("--- interchange ---")
    print(dumps_cfir(problem))
    return 0


if __name__ == "__main__":
    sys.exit(main())
