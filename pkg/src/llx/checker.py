"""Independent validator for sequent proof trees.

This is the trusted kernel: it shares no code with the reachability
search and re-derives every judgement locally from the inference-rule
schemas.  A tree is Valid when every node instantiates its schema --
identity concludes ``G |- G``; tensor-right splits both sides count-
exactly; tensor-left moves a tensor-of-atoms focus into the context;
implication-left fetches the named permanent rule, proves its premise
tensor on the left branch and continues with its right-hand side in
focus (or merged into the context when it is a single atom); choice-left
keeps the indexed alternative of the focused choice and records the
dropped ones -- and the root concludes exactly ``init |- goal``.

Invalid is a result, not an error: it carries the path from the root to
the offending node and the schema clause that failed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import AtomRef, Multiset, Problem, Rule, Tensor, With, call_with_stack_headroom
from .proof import (
    IdStep,
    LolliLStep,
    ProofTree,
    Sequent,
    TensorLStep,
    TensorRStep,
    WithLStep,
)


@dataclass(frozen=True)
class CheckResult:
    valid: bool
    node_path: tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


VALID = CheckResult(True)


def _tensor_atoms(formula) -> Multiset | None:
    """The atom multiset of a tensor-of-atoms (or single atom), else None."""
    if isinstance(formula, AtomRef):
        return Multiset.of(formula.name)
    if isinstance(formula, Tensor) and all(isinstance(c, AtomRef) for c in formula.children):
        return Multiset(c.name for c in formula.children)
    return None


def _rule_rhs_matches(rule: Rule, sequent: Sequent, context: Multiset) -> str | None:
    """Check that `sequent` continues the rule's right-hand side over `context`."""
    if len(rule.alternatives) > 1:
        if not isinstance(sequent.focus, With):
            return "continuation of a multi-alternative rule must focus its choice"
        if len(sequent.focus.children) != len(rule.alternatives):
            return "focused choice arity differs from the rule's alternatives"
        for i, child in enumerate(sequent.focus.children):
            atoms = _tensor_atoms(child)
            if atoms is None or atoms != rule.alternatives[i]:
                return f"focused alternative {i} differs from the rule"
        if sequent.left_multiset() != context:
            return "context changed across implication-left"
        return None
    produced = rule.alternatives[0]
    if produced.size() > 1:
        atoms = _tensor_atoms(sequent.focus) if sequent.focus is not None else None
        if atoms is None or atoms != produced:
            return "continuation must focus the produced tensor"
        if sequent.left_multiset() != context:
            return "context changed across implication-left"
        return None
    if sequent.focus is not None:
        return "single-atom production leaves nothing in focus"
    if sequent.left_multiset() != context + produced:
        return "continuation context must gain exactly the produced atom"
    return None


def check_proof(p: Problem, proof: ProofTree) -> CheckResult:
    """Validate every node locally and the root against ``init |- goal``."""
    rules = {r.name: r for r in p.rules}

    root = proof.conclusion
    if root.focus is not None:
        return CheckResult(False, (), "root sequent must not hold a focus")
    if root.left_multiset() != p.init or root.right_multiset() != p.goal:
        return CheckResult(False, (), "root conclusion is not init |- goal")

    def visit(node: ProofTree, path: tuple[int, ...]) -> CheckResult:
        seq = node.conclusion
        step = node.step
        if not seq.right:
            return CheckResult(False, path, "right-hand side must be nonempty")

        if isinstance(step, IdStep):
            if seq.focus is not None:
                return CheckResult(False, path, "identity cannot hold a focus")
            if seq.left_multiset() != seq.right_multiset():
                return CheckResult(False, path, "identity needs equal sides")

        elif isinstance(step, TensorRStep):
            if seq.focus is not None:
                return CheckResult(False, path, "tensor-right cannot hold a focus")
            (a, b) = node.premises
            for child, which in ((a, "left"), (b, "right")):
                if child.conclusion.focus is not None:
                    return CheckResult(False, path, f"tensor-right {which} premise holds a focus")
                if not child.conclusion.right:
                    return CheckResult(False, path, f"tensor-right {which} part is empty")
            if a.conclusion.left_multiset() + b.conclusion.left_multiset() != seq.left_multiset():
                return CheckResult(False, path, "tensor-right splits the context inexactly")
            if (
                a.conclusion.right_multiset() + b.conclusion.right_multiset()
                != seq.right_multiset()
            ):
                return CheckResult(False, path, "tensor-right splits the goal inexactly")

        elif isinstance(step, TensorLStep):
            atoms = _tensor_atoms(seq.focus) if seq.focus is not None else None
            if atoms is None or atoms.size() < 2:
                return CheckResult(False, path, "tensor-left needs a tensor-of-atoms focus")
            (child,) = node.premises
            if child.conclusion.focus is not None:
                return CheckResult(False, path, "tensor-left premise still holds a focus")
            if child.conclusion.left_multiset() != seq.left_multiset() + atoms:
                return CheckResult(False, path, "tensor-left premise context mismatch")
            if child.conclusion.right_multiset() != seq.right_multiset():
                return CheckResult(False, path, "goal changed across tensor-left")

        elif isinstance(step, WithLStep):
            if not isinstance(seq.focus, With):
                return CheckResult(False, path, "choice-left needs a focused choice")
            arms = seq.focus.children
            if not 0 <= step.kept_index < len(arms):
                return CheckResult(False, path, "kept alternative out of range")
            arm_atoms = [_tensor_atoms(c) for c in arms]
            if any(a is None for a in arm_atoms):
                return CheckResult(False, path, "choice arms must be tensors of atoms")
            expected_dropped = tuple(
                a for i, a in enumerate(arm_atoms) if i != step.kept_index
            )
            if tuple(step.dropped) != expected_dropped:
                return CheckResult(False, path, "dropped alternatives mislabelled")
            kept = arm_atoms[step.kept_index]
            (child,) = node.premises
            assert kept is not None
            if kept.size() > 1:
                child_atoms = (
                    _tensor_atoms(child.conclusion.focus)
                    if child.conclusion.focus is not None
                    else None
                )
                if child_atoms != kept:
                    return CheckResult(False, path, "premise must focus the kept tensor")
                if child.conclusion.left_multiset() != seq.left_multiset():
                    return CheckResult(False, path, "context changed across choice-left")
            else:
                if child.conclusion.focus is not None:
                    return CheckResult(False, path, "single-atom choice leaves nothing in focus")
                if child.conclusion.left_multiset() != seq.left_multiset() + kept:
                    return CheckResult(False, path, "premise context must gain the kept atom")
            if child.conclusion.right_multiset() != seq.right_multiset():
                return CheckResult(False, path, "goal changed across choice-left")

        elif isinstance(step, LolliLStep):
            if seq.focus is not None:
                return CheckResult(False, path, "implication-left cannot hold a focus")
            rule = rules.get(step.rule_name)
            if rule is None:
                return CheckResult(False, path, f"no permanent rule named {step.rule_name!r}")
            left, right = node.premises
            if left.conclusion.focus is not None:
                return CheckResult(False, path, "premise proof cannot hold a focus")
            if left.conclusion.right_multiset() != rule.premises:
                return CheckResult(False, path, "left premise must prove the rule's premises")
            consumed = left.conclusion.left_multiset()
            if not seq.left_multiset().contains(consumed):
                return CheckResult(False, path, "context does not contain the consumed part")
            context = seq.left_multiset() - consumed
            why = _rule_rhs_matches(rule, right.conclusion, context)
            if why is not None:
                return CheckResult(False, path, why)
            if right.conclusion.right_multiset() != seq.right_multiset():
                return CheckResult(False, path, "goal changed across implication-left")

        else:
            return CheckResult(False, path, f"unknown step {type(step).__name__}")

        for i, child in enumerate(node.premises):
            result = visit(child, path + (i,))
            if not result.valid:
                return result
        return VALID

    return call_with_stack_headroom(lambda: visit(proof, ()), len(proof.nodes()))
