"""Sequent-calculus proof trees built from engine traces, plus renderers.

A proof node records a full sequent, the inference step that concludes
it, and its premise subtrees.  The program rules are permanent, so they
are never listed inside sequents: an implication-left step names its
rule instead, and a choice-left step is labelled with the alternative it
drops (proving the f1 path of the running example uses the label
``&l(f2)``).

Sequent sides keep the atom order they were built with (renderers show
states in declaration order); the checker compares them as multisets.

Rendering styles:

* ``full``        - the whole tree, premises indented above their conclusion;
* ``simplified``  - the spine only, tensor bookkeeping suppressed;
* ``transition``  - just the rewritten states joined by labelled arrows.

The JSON interchange form (schema ``llx-proof/1``) round-trips losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    Formula,
    LlxError,
    Multiset,
    Problem,
    With,
    call_with_stack_headroom,
    parse_formula,
    print_formula,
)
from .engine import Firing, Trace, replay


class TraceDoesNotReachGoal(LlxError):
    pass


class SchemaError(LlxError):
    def __init__(self, path: str, message: str = "invalid or missing field"):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Sequent:
    """`left` atoms plus an optional in-focus formula proving `right` atoms."""

    left: tuple[str, ...]
    focus: Formula | None
    right: tuple[str, ...]

    def left_multiset(self) -> Multiset:
        return Multiset(self.left)

    def right_multiset(self) -> Multiset:
        return Multiset(self.right)

    def __str__(self) -> str:
        items = list(self.left)
        if self.focus is not None:
            items.append(print_formula(self.focus))
        # a multi-atom right-hand side reads as the tensor it stands for
        return f"{', '.join(items)} |- {' * '.join(self.right)}"


@dataclass(frozen=True)
class InferenceStep:
    pass


@dataclass(frozen=True)
class IdStep(InferenceStep):
    pass


@dataclass(frozen=True)
class TensorLStep(InferenceStep):
    pass


@dataclass(frozen=True)
class TensorRStep(InferenceStep):
    pass


@dataclass(frozen=True)
class LolliLStep(InferenceStep):
    rule_name: str


@dataclass(frozen=True)
class WithLStep(InferenceStep):
    kept_index: int
    dropped: tuple[Multiset, ...]  # the non-kept alternatives, in rule order


_ARITY = {IdStep: 0, TensorLStep: 1, TensorRStep: 2, LolliLStep: 2, WithLStep: 1}


@dataclass(frozen=True)
class ProofTree:
    conclusion: Sequent
    step: InferenceStep
    premises: tuple["ProofTree", ...] = field(default=())

    def __post_init__(self) -> None:
        expected = _ARITY[type(self.step)]
        if len(self.premises) != expected:
            raise LlxError(
                f"{type(self.step).__name__} takes {expected} premises, got {len(self.premises)}"
            )

    def nodes(self) -> list["ProofTree"]:
        out: list[ProofTree] = []
        stack = [self]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(node.premises))
        return out

    def label(self) -> str:
        return step_label(self.step)


def step_label(step: InferenceStep) -> str:
    if isinstance(step, IdStep):
        return "id"
    if isinstance(step, TensorLStep):
        return "*l"
    if isinstance(step, TensorRStep):
        return "*r"
    if isinstance(step, LolliLStep):
        return f"-o l({step.rule_name})"
    if isinstance(step, WithLStep):
        dropped = ", ".join(str(d) for d in step.dropped)
        return f"&l({dropped})"
    raise TypeError(f"not a step: {step!r}")


# --- construction -------------------------------------------------------------


def _formula_of_names(names: tuple[str, ...]) -> Formula:
    """An atom reference, or the tensor of the names in the given order."""
    from .core import AtomRef, Tensor

    if len(names) == 1:
        return AtomRef(names[0])
    return Tensor(tuple(AtomRef(n) for n in names))


def _atoms_proof(names: tuple[str, ...]) -> ProofTree:
    """Prove `names |- names` by splitting the tensor down to identity leaves."""
    if len(names) <= 1:
        return ProofTree(Sequent(names, None, names), IdStep())
    head, rest = names[:1], names[1:]
    return ProofTree(
        Sequent(names, None, names),
        TensorRStep(),
        (_atoms_proof(head), _atoms_proof(rest)),
    )


def trace_to_proof(p: Problem, t: Trace | Sequence[Firing]) -> ProofTree:
    """Build the sequent derivation that replays `t` bottom-up from init.

    Each firing contributes an implication-left step whose left premise
    proves the rule's premise tensor from identity leaves, preceded (above)
    by a choice-left step when the rule has several alternatives and a
    tensor-left step when the produced alternative has several atoms.
    """
    firings = t.firings if isinstance(t, Trace) else tuple(t)
    final = replay(p, firings)
    if final != p.goal:
        raise TraceDoesNotReachGoal(f"trace ends at {{{final}}}, goal is {{{p.goal}}}")

    position = {name: i for i, name in enumerate(p.atom_order())}
    rules = {r.name: r for r in p.rules}

    def expand(ms: Multiset) -> tuple[str, ...]:
        return tuple(sorted(ms.expand(), key=position.__getitem__))

    goal_names = expand(p.goal)
    states = [p.init]
    for f in firings:
        rule = rules[f.rule_name]
        states.append(states[-1] - rule.premises + rule.alternatives[f.branch])

    # fold backwards from the terminal identity, wrapping one firing at a time
    tree = _atoms_proof(expand(states[-1]))
    for i in reversed(range(len(firings))):
        f = firings[i]
        rule = rules[f.rule_name]
        rest = states[i] - rule.premises

        produced = rule.alternatives[f.branch]
        if produced.size() > 1:
            focus_seq = Sequent(expand(rest), _formula_of_names(expand(produced)), goal_names)
            tree = ProofTree(focus_seq, TensorLStep(), (tree,))
        if len(rule.alternatives) > 1:
            with_formula = With(
                tuple(_formula_of_names(expand(a)) for a in rule.alternatives)
            )
            dropped = tuple(a for b, a in enumerate(rule.alternatives) if b != f.branch)
            choice_seq = Sequent(expand(rest), with_formula, goal_names)
            tree = ProofTree(choice_seq, WithLStep(f.branch, dropped), (tree,))
        left = _atoms_proof(expand(rule.premises))
        tree = ProofTree(
            Sequent(expand(states[i]), None, goal_names),
            LolliLStep(rule.name),
            (left, tree),
        )
    return tree


# --- rendering ----------------------------------------------------------------


def _spine(proof: ProofTree) -> list[ProofTree]:
    """Conclusion-to-axiom chain following continuation premises."""
    chain = [proof]
    node = proof
    while True:
        if isinstance(node.step, LolliLStep):
            node = node.premises[1]
        elif isinstance(node.step, (WithLStep, TensorLStep)):
            node = node.premises[0]
        else:
            break
        chain.append(node)
    return chain


def render_proof(proof: ProofTree, style: str = "full") -> str:
    """Deterministic text for a proof; equal trees render equally."""
    if style == "full":
        # premises print above their conclusion, as in a stacked derivation
        lines: list[str] = []
        stack: list[tuple[ProofTree, int, bool]] = [(proof, 0, False)]
        while stack:
            node, depth, expanded = stack.pop()
            if expanded:
                lines.append(f"{'  ' * depth}{node.conclusion}   [{node.label()}]")
                continue
            stack.append((node, depth, True))
            for child in reversed(node.premises):
                stack.append((child, depth + 1, False))
        return "\n".join(lines) + "\n"

    if style == "simplified":
        chain = _spine(proof)
        lines = [str(chain[0].conclusion)]
        for node, above in zip(chain, chain[1:]):
            lines.append(f"  --[{node.label()}]-->")
            lines.append(str(above.conclusion))
        return "\n".join(lines) + "\n"

    if style == "transition":
        chain = _spine(proof)
        lines = [", ".join(chain[0].conclusion.left)]
        i = 0
        while i < len(chain):
            node = chain[i]
            if isinstance(node.step, LolliLStep):
                label = f"--{node.step.rule_name}"
                j = i + 1
                # fold the choice and tensor bookkeeping into the arrow
                while j < len(chain) and isinstance(chain[j].step, (WithLStep, TensorLStep)):
                    if isinstance(chain[j].step, WithLStep):
                        dropped = ", ".join(str(d) for d in chain[j].step.dropped)
                        label += f" [&l {dropped}]"
                    j += 1
                lines.append(f"  {label}-->")
                lines.append(", ".join(chain[j].conclusion.left))
                i = j
            else:
                i += 1
        return "\n".join(lines) + "\n"

    raise ValueError(f"unknown render style: {style!r}")


# --- interchange ----------------------------------------------------------------

SCHEMA_VERSION = "llx-proof/1"

_STEP_TAGS = {
    IdStep: "id",
    TensorLStep: "tensor_l",
    TensorRStep: "tensor_r",
    LolliLStep: "lolli_l",
    WithLStep: "with_l",
}


def _node_to_json(node: ProofTree) -> dict:
    step = node.step
    out: dict = {"rule_kind": _STEP_TAGS[type(step)], "label": None}
    if isinstance(step, LolliLStep):
        out["label"] = step.rule_name
    elif isinstance(step, WithLStep):
        out["label"] = ", ".join(str(d) for d in step.dropped)
        out["kept_index"] = step.kept_index
    out["sequent"] = {
        "left": list(node.conclusion.left),
        "focus": None
        if node.conclusion.focus is None
        else print_formula(node.conclusion.focus),
        "right": list(node.conclusion.right),
    }
    out["premises"] = [_node_to_json(c) for c in node.premises]
    return out


def proof_to_interchange(proof: ProofTree) -> str:
    # compact on purpose: premises nest one level per step, so indented
    # output grows quadratically with proof depth
    def encode() -> str:
        doc = {"schema_version": SCHEMA_VERSION, "proof": _node_to_json(proof)}
        return json.dumps(doc, separators=(",", ":")) + "\n"

    return call_with_stack_headroom(encode, len(proof.nodes()))


def _require(mapping: dict, key: str, path: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise SchemaError(f"{path}.{key}")
    return mapping[key]


def _names_list(value, path: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(path, "expected a list of atom names")
    return tuple(value)


def _node_from_json(obj: dict, path: str) -> ProofTree:
    kind = _require(obj, "rule_kind", path)
    seq_obj = _require(obj, "sequent", path)
    left = _names_list(_require(seq_obj, "left", f"{path}.sequent"), f"{path}.sequent.left")
    right = _names_list(_require(seq_obj, "right", f"{path}.sequent"), f"{path}.sequent.right")
    focus_text = _require(seq_obj, "focus", f"{path}.sequent")
    if focus_text is not None and not isinstance(focus_text, str):
        raise SchemaError(f"{path}.sequent.focus", "expected null or a formula string")
    focus = None if focus_text is None else parse_formula(focus_text)
    sequent = Sequent(left, focus, right)

    label = obj.get("label")
    step: InferenceStep
    if kind == "id":
        step = IdStep()
    elif kind == "tensor_l":
        step = TensorLStep()
    elif kind == "tensor_r":
        step = TensorRStep()
    elif kind == "lolli_l":
        if not isinstance(label, str):
            raise SchemaError(f"{path}.label", "lolli_l needs its rule name")
        step = LolliLStep(label)
    elif kind == "with_l":
        kept = _require(obj, "kept_index", path)
        if not isinstance(kept, int) or not isinstance(focus, With):
            raise SchemaError(f"{path}.kept_index", "with_l needs kept_index and a with focus")
        if not 0 <= kept < len(focus.children):
            raise SchemaError(f"{path}.kept_index", "kept_index out of range")
        dropped = tuple(
            _formula_atoms(c, f"{path}.sequent.focus")
            for i, c in enumerate(focus.children)
            if i != kept
        )
        step = WithLStep(kept, dropped)
    else:
        raise SchemaError(f"{path}.rule_kind", f"unknown rule_kind {kind!r}")

    raw_premises = _require(obj, "premises", path)
    if not isinstance(raw_premises, list):
        raise SchemaError(f"{path}.premises", "expected a list")
    premises = tuple(
        _node_from_json(c, f"{path}.premises[{i}]") for i, c in enumerate(raw_premises)
    )
    try:
        return ProofTree(sequent, step, premises)
    except LlxError as exc:
        raise SchemaError(path, str(exc)) from None


def _formula_atoms(f: Formula, path: str) -> Multiset:
    from .core import AtomRef, Tensor

    if isinstance(f, AtomRef):
        return Multiset.of(f.name)
    if isinstance(f, Tensor) and all(isinstance(c, AtomRef) for c in f.children):
        return Multiset(c.name for c in f.children)  # type: ignore[union-attr]
    raise SchemaError(path, "alternative must be a tensor of atoms")


def interchange_to_proof(text: str) -> ProofTree:
    def decode() -> ProofTree:
        try:
            doc = json.loads(text)
        except (json.JSONDecodeError, RecursionError) as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from None
        version = _require(doc, "schema_version", "$")
        if version != SCHEMA_VERSION:
            raise SchemaError("$.schema_version", f"unsupported version {version!r}")
        return _node_from_json(_require(doc, "proof", "$"), "$.proof")

    return call_with_stack_headroom(decode, text.count('"rule_kind"'))
