"""Control-flow interchange documents and the clause-style export.

The CFIR document (schema ``llx-cfir/1``) is the JSON form of a problem,
shared with front-end extractors: atom declarations, initial tokens,
rules as premise/alternative name lists, the goal, and optionally a map
from experimental-phase names to their entry atoms.  The mapping to and
from Problem is lossless.

``export_clf`` prints the problem as named clauses over declared
propositions, suitable for feeding concurrent-logic tools: one
declaration per atom and one clause per rule, for example
``pi2 : t * m -o {f1 & f2}.``  Atom names colliding with declaration
keywords are escaped with a trailing underscore and a warning.
"""

from __future__ import annotations

import json
import warnings

from .core import Atom, Kind, LlxError, Multiset, Problem, Rule, make_problem

SCHEMA_VERSION = "llx-cfir/1"

_CLF_RESERVED = {"type", "prop"}


class SchemaError(LlxError):
    def __init__(self, path: str, message: str = "invalid or missing field"):
        self.path = path
        super().__init__(f"{path}: {message}")


def problem_to_cfir(p: Problem) -> dict:
    """The JSON-ready document for `p`; name lists use declaration order."""
    order = p.atom_order()
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "atoms": [{"name": a.name, "kind": a.kind.value} for a in p.atoms],
        "init": list(p.init.expand(order)),
        "rules": [
            {
                "name": r.name,
                "premises": list(r.premises.expand(order)),
                "alternatives": [list(a.expand(order)) for a in r.alternatives],
            }
            for r in p.rules
        ],
        "goal": list(p.goal.expand(order)),
    }
    if p.phases:
        doc["phases"] = {name: {"entry_atom": entry} for name, entry in p.phases.items()}
    return doc


def dumps_cfir(p: Problem) -> str:
    return json.dumps(problem_to_cfir(p), indent=2) + "\n"


def _expect(doc, key: str, path: str):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{path}.{key}" if path else key)
    return doc[key]


def _name_list(value, path: str, allow_empty: bool = True) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) and v for v in value):
        raise SchemaError(path, "expected a list of atom names")
    if not value and not allow_empty:
        raise SchemaError(path, "must be nonempty")
    return value


def cfir_to_problem(doc: dict | str, name: str | None = None) -> Problem:
    """Validate and rebuild a Problem; errors carry the offending field path."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from None
    version = _expect(doc, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"unsupported version {version!r}")

    atoms = []
    for i, entry in enumerate(_expect(doc, "atoms", "")):
        atom_name = _expect(entry, "name", f"atoms[{i}]")
        kind_name = _expect(entry, "kind", f"atoms[{i}]")
        try:
            atoms.append(Atom(atom_name, Kind(kind_name)))
        except (ValueError, LlxError) as exc:
            raise SchemaError(f"atoms[{i}]", str(exc)) from None

    rules = []
    for i, entry in enumerate(_expect(doc, "rules", "")):
        rule_name = _expect(entry, "name", f"rules[{i}]")
        premises = _name_list(
            _expect(entry, "premises", f"rules[{i}]"), f"rules[{i}].premises", allow_empty=False
        )
        raw_alts = _expect(entry, "alternatives", f"rules[{i}]")
        if not isinstance(raw_alts, list) or not raw_alts:
            raise SchemaError(f"rules[{i}].alternatives", "must be a nonempty list")
        alternatives = tuple(
            Multiset(
                _name_list(a, f"rules[{i}].alternatives[{j}]", allow_empty=False)
            )
            for j, a in enumerate(raw_alts)
        )
        try:
            rules.append(Rule(rule_name, Multiset(premises), alternatives))
        except LlxError as exc:
            raise SchemaError(f"rules[{i}]", str(exc)) from None

    init = Multiset(_name_list(_expect(doc, "init", ""), "init"))
    goal = Multiset(_name_list(_expect(doc, "goal", ""), "goal", allow_empty=False))

    phases = None
    if "phases" in doc:
        raw_phases = doc["phases"]
        if not isinstance(raw_phases, dict):
            raise SchemaError("phases", "expected an object")
        phases = {}
        for phase_name, entry in raw_phases.items():
            phases[phase_name] = _expect(entry, "entry_atom", f"phases.{phase_name}")

    try:
        return make_problem(rules, init, goal, atoms=atoms, name=name, phases=phases)
    except LlxError as exc:
        raise SchemaError("$", str(exc)) from None


def _clf_names(p: Problem) -> dict[str, str]:
    taken = set(p.atom_order())
    renames: dict[str, str] = {}
    for name in p.atom_order():
        if name in _CLF_RESERVED:
            candidate = name + "_"
            while candidate in taken:
                candidate += "_"
            taken.add(candidate)
            renames[name] = candidate
            warnings.warn(
                f"atom {name!r} collides with a declaration keyword; exported as {candidate!r}",
                UserWarning,
                stacklevel=3,
            )
    return renames


def export_clf(p: Problem) -> str:
    """Deterministic clause text: declarations, then one clause per rule."""
    order = p.atom_order()
    renames = _clf_names(p)

    def show(name: str) -> str:
        return renames.get(name, name)

    def tensor(ms: Multiset) -> str:
        return " * ".join(show(n) for n in ms.expand(order))

    lines = [
        f"% init: {', '.join(show(n) for n in p.init.expand(order))}",
        f"% goal: {', '.join(show(n) for n in p.goal.expand(order))}",
    ]
    for atom in p.atoms:
        lines.append(f"{show(atom.name)} : type.")
    if p.rules:
        lines.append("")
    for rule in p.rules:
        alts = " & ".join(tensor(a) for a in rule.alternatives)
        lines.append(f"{rule.name} : {tensor(rule.premises)} -o {{{alts}}}.")
    return "\n".join(lines) + "\n"
