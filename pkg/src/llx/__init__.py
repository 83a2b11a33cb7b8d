"""Linear-logic verification toolkit for experiment control flow.

Problems pair a program of permanent implications with an initial
multiset and a goal multiset; the engine decides reachability in
exists-path and all-paths modes, proofs are rebuilt as independently
checkable sequent derivations, and petri-net / clause / JSON views are
exported for external tools.
"""

from .core import (
    Atom,
    AtomRef,
    Bang,
    Formula,
    FragmentError,
    Kind,
    LlxError,
    Lolli,
    Multiset,
    ParseError,
    Problem,
    Rule,
    Tensor,
    ValidationError,
    With,
    make_problem,
    normalize_rule,
    parse_formula,
    parse_problem,
    print_formula,
    rule_to_formula,
)
from .engine import (
    Firing,
    LimitExceeded,
    Proven,
    Refuted,
    SearchLimits,
    StuckReport,
    Trace,
    Verdict,
    applicable,
    fire,
    prove_all_paths,
    prove_exists,
    replay,
)
from .checker import CheckResult, check_proof
from .oracle import oracle_reachable
from .proof import ProofTree, Sequent, interchange_to_proof, proof_to_interchange, render_proof, trace_to_proof

__version__ = "0.1.0"
