"""Petri-net view of a problem: conversion both ways and DOT rendering.

Places are the atoms, transitions are the rule alternatives (a rule with
m alternatives becomes m transitions named ``rule#0 .. rule#m-1``, shown
with letter suffixes ``a, b, ...``), and the marking is the initial
multiset.  The goal has no petri-net counterpart, so converting back
yields a problem with an empty goal and a warning unless one is passed
alongside.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

from .core import Atom, Kind, LlxError, Multiset, Problem, Rule, make_problem

_SUFFIX_RE = re.compile(r"^(?P<base>[a-zA-Z_][a-zA-Z0-9_]*)#(?P<idx>\d+)$")


class GroupingError(LlxError):
    """Raised when same-base transitions cannot regroup into one rule."""


@dataclass(frozen=True)
class Transition:
    name: str
    inputs: Multiset
    outputs: Multiset


@dataclass(frozen=True)
class PetriNet:
    places: tuple[tuple[str, Kind], ...]
    transitions: tuple[Transition, ...]
    marking: Multiset

    def __post_init__(self) -> None:
        declared = {name for name, _ in self.places}
        seen: set[str] = set()
        for t in self.transitions:
            if t.name in seen:
                raise LlxError(f"duplicate transition name: {t.name}")
            seen.add(t.name)
            for arc in (*t.inputs.names(), *t.outputs.names()):
                if arc not in declared:
                    raise LlxError(f"transition {t.name} references undeclared place {arc!r}")
        for name in self.marking.names():
            if name not in declared:
                raise LlxError(f"marking references undeclared place {name!r}")


def to_petri(p: Problem) -> PetriNet:
    """One place per atom, one transition per rule alternative, marking = init."""
    places = tuple((a.name, a.kind) for a in p.atoms)
    transitions = []
    for rule in p.rules:
        for b, alt in enumerate(rule.alternatives):
            transitions.append(Transition(f"{rule.name}#{b}", rule.premises, alt))
    return PetriNet(places, tuple(transitions), p.init)


def from_petri(n: PetriNet, goal: Multiset | None = None) -> Problem:
    """Regroup ``base#idx`` transitions into multi-alternative rules.

    Same-base transitions must agree on their inputs and carry contiguous
    indices from 0.  A transition without the suffix becomes its own
    single-alternative rule.  Without an explicit goal the result carries
    an empty goal and a warning; such a problem is a view, not a directly
    checkable sequent.
    """
    groups: dict[str, dict[int, Transition]] = {}
    order: list[str] = []
    for t in n.transitions:
        m = _SUFFIX_RE.match(t.name)
        base, idx = (m.group("base"), int(m.group("idx"))) if m else (t.name, 0)
        if base not in groups:
            groups[base] = {}
            order.append(base)
        if idx in groups[base]:
            raise GroupingError(f"transition {base}#{idx} appears twice")
        groups[base][idx] = t

    rules = []
    for base in order:
        branches = groups[base]
        if sorted(branches) != list(range(len(branches))):
            raise GroupingError(f"rule {base}: branch indices are not contiguous from 0")
        inputs = {t.inputs for t in branches.values()}
        if len(inputs) != 1:
            raise GroupingError(f"rule {base}: transitions disagree on inputs")
        alternatives = tuple(branches[i].outputs for i in range(len(branches)))
        rules.append(Rule(base, next(iter(inputs)), alternatives))

    if goal is None:
        warnings.warn(
            "petri net carries no goal; resulting problem has an empty goal",
            UserWarning,
            stacklevel=2,
        )
        goal = Multiset()
    atoms = [Atom(name, kind) for name, kind in n.places]
    return make_problem(
        rules, n.marking, goal, atoms=atoms, allow_empty_goal=goal.is_empty()
    )


@dataclass(frozen=True)
class DotOptions:
    control_color: str = "orange"
    resource_color: str = "palegreen"
    transition_color: str = "gray80"


def _display_name(name: str, multi: bool) -> str:
    m = _SUFFIX_RE.match(name)
    if not m:
        return name
    if not multi:
        return m.group("base")
    idx = int(m.group("idx"))
    suffix = chr(ord("a") + idx) if idx < 26 else f"#{idx}"
    return f"{m.group('base')}{suffix}"


def export_dot(n: PetriNet, options: DotOptions = DotOptions()) -> str:
    """Deterministic DOT digraph: circles for places, boxes for transitions."""
    base_counts: dict[str, int] = {}
    for t in n.transitions:
        m = _SUFFIX_RE.match(t.name)
        base = m.group("base") if m else t.name
        base_counts[base] = base_counts.get(base, 0) + 1

    lines = ["digraph petri {", "  rankdir=LR;", '  node [fontname="Helvetica"];']
    for name, kind in n.places:
        color = options.control_color if kind is Kind.CONTROL else options.resource_color
        tokens = n.marking.count(name)
        label = f"{name} ({tokens})" if tokens else name
        lines.append(
            f'  "{name}" [shape=circle, style=filled, fillcolor="{color}", label="{label}"];'
        )
    for t in n.transitions:
        m = _SUFFIX_RE.match(t.name)
        base = m.group("base") if m else t.name
        label = _display_name(t.name, base_counts[base] > 1)
        lines.append(
            f'  "{t.name}" [shape=box, style=filled, '
            f'fillcolor="{options.transition_color}", label="{label}"];'
        )
    place_order = [name for name, _ in n.places]
    for t in n.transitions:
        for name, count in sorted(
            t.inputs.counts.items(), key=lambda kv: place_order.index(kv[0])
        ):
            suffix = f' [label="{count}"]' if count > 1 else ""
            lines.append(f'  "{name}" -> "{t.name}"{suffix};')
        for name, count in sorted(
            t.outputs.counts.items(), key=lambda kv: place_order.index(kv[0])
        ):
            suffix = f' [label="{count}"]' if count > 1 else ""
            lines.append(f'  "{t.name}" -> "{name}"{suffix};')
    lines.append("}")
    return "\n".join(lines) + "\n"
