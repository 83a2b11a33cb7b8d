"""Walk an annotated experiment script and emit an llx-cfir/1 document.

The script is read with the standard `ast` module.  Each configured
phase function becomes a control atom entered from the environment
atom; every call from the phase to a module-level helper becomes a
control atom and an implication; an if/elif/else whose arms call
different helpers becomes one rule whose alternatives are the arms (an
if without else gets the fall-through continuation as its second arm);
each helper flows back to the next control point, the last one back to
the environment.  The initial tokens are the environment atom plus one
token per declared resource; the goal is the environment atom.

Annotations are structured comments:

    def training():          # llx: atom t
        ...
    def forward_pass(m, x):  # llx: atom f1
        return m(x)          # llx: resource m

``# llx: atom NAME`` on a def's header line names that function's
control atom; ``# llx: resource NAME`` declares that the enclosing
helper consumes one NAME token per occurrence.  Config values override
markers, which override the bare function name.

Rules are named pi1, pi2, ... in emission order: entry rule first, then
per call-bearing statement its rule followed by its helpers' return
rules.  Alternatives of a branching rule are ordered by the callees'
definition positions, with the fall-through arm last.  Unsupported
constructs (loops, try/except, nested defs, dynamic calls) are warned
about and treated as opaque sequential statements, or rejected under
strict mode.
"""

from __future__ import annotations

import ast
import re
import warnings
from dataclasses import dataclass, field
from typing import Mapping

SCHEMA_VERSION = "llx-cfir/1"

_RESOURCE_MARKER = re.compile(r"#\s*llx:\s*resource\s+([A-Za-z_]\w*)")
_ATOM_MARKER = re.compile(r"#\s*llx:\s*atom\s+([A-Za-z_]\w*)")


class UnsupportedConstructError(Exception):
    pass


class ExtractionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ExtractionConfig:
    phase_functions: tuple[str, ...] = ("training", "validation", "testing")
    resource_markers: Mapping[str, str] = field(default_factory=dict)
    entry_atom_prefix: str = "e"
    atom_names: Mapping[str, str] = field(default_factory=dict)
    strict: bool = False

    def __post_init__(self) -> None:
        if len(set(self.phase_functions)) != len(self.phase_functions):
            raise ValueError("phase function names must be distinct")
        if len(set(self.resource_markers)) != len(self.resource_markers):
            raise ValueError("marker strings must be distinct")
        ident = re.compile(r"[A-Za-z_]\w*\Z")
        for atom in (
            self.entry_atom_prefix,
            *self.resource_markers.values(),
            *self.atom_names.values(),
        ):
            if not isinstance(atom, str) or not ident.match(atom):
                raise ValueError(f"invalid atom name {atom!r} in config")


def load_config(text: str) -> ExtractionConfig:
    import json

    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    known = {"phase_functions", "resource_markers", "entry_atom_prefix", "atom_names"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config fields: {', '.join(sorted(unknown))}")
    kwargs = {}
    if "phase_functions" in doc:
        kwargs["phase_functions"] = tuple(doc["phase_functions"])
    if "resource_markers" in doc:
        kwargs["resource_markers"] = dict(doc["resource_markers"])
    if "entry_atom_prefix" in doc:
        kwargs["entry_atom_prefix"] = doc["entry_atom_prefix"]
    if "atom_names" in doc:
        kwargs["atom_names"] = dict(doc["atom_names"])
    return ExtractionConfig(**kwargs)


def _warn_or_raise(message: str, strict: bool) -> None:
    if strict:
        raise UnsupportedConstructError(message)
    warnings.warn(message, ExtractionWarning, stacklevel=3)


_OPAQUE_NODES = (
    ast.For,
    ast.While,
    ast.Try,
    ast.With,
    ast.FunctionDef,
    ast.AsyncFunctionDef,
    ast.ClassDef,
    ast.Match,
)


class _Accumulator:
    """Atoms in first-reference order (controls before resources) plus rules."""

    def __init__(self) -> None:
        self.controls: list[str] = []
        self.resources: list[str] = []
        self.rules: list[dict] = []
        self._return_edges: set[tuple[str, str]] = set()

    def control(self, name: str) -> str:
        if name in self.resources:
            raise UnsupportedConstructError(f"atom {name!r} used as both control and resource")
        if name not in self.controls:
            self.controls.append(name)
        return name

    def resource(self, name: str) -> str:
        if name in self.controls:
            raise UnsupportedConstructError(f"atom {name!r} used as both control and resource")
        if name not in self.resources:
            self.resources.append(name)
        return name

    def rule(self, premises: list[str], alternatives: list[list[str]]) -> None:
        self.rules.append(
            {
                "name": f"pi{len(self.rules) + 1}",
                "premises": premises,
                "alternatives": alternatives,
            }
        )

    def return_edge(self, helper_atom: str, target: str) -> None:
        if (helper_atom, target) not in self._return_edges:
            self._return_edges.add((helper_atom, target))
            self.rule([helper_atom], [[target]])


@dataclass
class _Script:
    defs: dict[str, ast.FunctionDef]
    def_order: dict[str, int]
    atom_markers: dict[str, str]
    resource_by_line: dict[int, list[str]]


def _scan(source: str, config: ExtractionConfig) -> _Script:
    tree = ast.parse(source)
    lines = source.splitlines()
    resource_by_line: dict[int, list[str]] = {}
    for lineno, line in enumerate(lines, start=1):
        names = _RESOURCE_MARKER.findall(line)
        for marker, atom in config.resource_markers.items():
            if marker in line:
                names.append(atom)
        if names:
            resource_by_line[lineno] = names

    defs: dict[str, ast.FunctionDef] = {}
    def_order: dict[str, int] = {}
    atom_markers: dict[str, str] = {}
    for node in tree.body:
        if isinstance(node, ast.FunctionDef):
            defs[node.name] = node
            def_order[node.name] = node.lineno
            header = lines[node.lineno - 1] if node.lineno - 1 < len(lines) else ""
            m = _ATOM_MARKER.search(header)
            if m:
                atom_markers[node.name] = m.group(1)
    return _Script(defs, def_order, atom_markers, resource_by_line)


def _helper_calls(stmt: ast.stmt, script: _Script) -> list[str]:
    """Module-level functions called anywhere inside `stmt`, in source order."""
    found: list[str] = []
    for node in ast.walk(stmt):
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in script.defs
        ):
            if node.func.id not in found:
                found.append(node.func.id)
    return found


def _resources_in_span(script: _Script, lo: int, hi: int) -> dict[str, int]:
    needs: dict[str, int] = {}
    for lineno, names in script.resource_by_line.items():
        if lo <= lineno <= hi:
            for name in names:
                needs[name] = needs.get(name, 0) + 1
    return needs


def _helper_resources(script: _Script, helper: str) -> dict[str, int]:
    node = script.defs[helper]
    return _resources_in_span(script, node.lineno, node.end_lineno or node.lineno)


def _atom_for(fn: str, script: _Script, config: ExtractionConfig) -> str:
    return config.atom_names.get(fn) or script.atom_markers.get(fn, fn)


def _flatten_arms(stmt: ast.If) -> tuple[list[list[ast.stmt]], bool]:
    """The arm bodies of an if/elif chain plus whether a final else exists."""
    arms = [stmt.body]
    node: ast.stmt = stmt
    while isinstance(node, ast.If):
        tail = node.orelse
        if len(tail) == 1 and isinstance(tail[0], ast.If):
            node = tail[0]
            arms.append(node.body)
        else:
            if tail:
                arms.append(tail)
            return arms, bool(tail)
    return arms, False


def _call_bearing(statements: list[ast.stmt], script: _Script, strict: bool) -> list[ast.stmt]:
    bearing = []
    for stmt in statements:
        if isinstance(stmt, _OPAQUE_NODES):
            _warn_or_raise(
                f"line {stmt.lineno}: {type(stmt).__name__} is not modelled; treated as opaque",
                strict,
            )
            continue
        if _helper_calls(stmt, script):
            bearing.append(stmt)
    return bearing


def extract(source: str, config: ExtractionConfig = ExtractionConfig()) -> dict:
    """Translate `source` into a validated llx-cfir/1 document (a dict)."""
    script = _scan(source, config)
    acc = _Accumulator()
    env = acc.control(config.entry_atom_prefix)
    phases: dict[str, dict] = {}

    def arm_target(arm: list[ast.stmt]) -> tuple[str | None, dict[str, int]]:
        """The helper an arm lands in (None = fall-through) and its resource needs."""
        calls: list[str] = []
        for stmt in arm:
            if isinstance(stmt, ast.If):
                _warn_or_raise(
                    f"line {stmt.lineno}: nested branching is not modelled; "
                    "treated as opaque",
                    config.strict,
                )
                continue
            calls.extend(c for c in _helper_calls(stmt, script) if c not in calls)
        if not calls:
            return None, {}
        if len(calls) > 1:
            _warn_or_raise(
                f"multiple helper calls in one branch ({', '.join(calls)}); "
                "only the first is modelled",
                config.strict,
            )
        helper = calls[0]
        return helper, _helper_resources(script, helper)

    for phase in config.phase_functions:
        node = script.defs.get(phase)
        if node is None:
            warnings.warn(
                f"phase function {phase!r} not found in the script",
                ExtractionWarning,
                stacklevel=2,
            )
            continue
        statements = _call_bearing(node.body, script, config.strict)
        if not statements:
            warnings.warn(
                f"phase function {phase!r} contains no supported calls; skipped",
                ExtractionWarning,
                stacklevel=2,
            )
            continue
        phase_atom = acc.control(_atom_for(phase, script, config))
        phases[phase] = {"entry_atom": phase_atom}
        acc.rule([env], [[phase_atom]])

        current = phase_atom
        for index, stmt in enumerate(statements):
            last = index == len(statements) - 1
            continuation = env if last else f"{phase_atom}_s{index + 1}"

            if isinstance(stmt, ast.If):
                arm_bodies, has_else = _flatten_arms(stmt)
                targets = [arm_target(arm) for arm in arm_bodies]
                if not has_else:
                    targets.append((None, {}))  # implicit fall-through arm
            else:
                helpers = _helper_calls(stmt, script)
                if len(helpers) > 1:
                    _warn_or_raise(
                        f"line {stmt.lineno}: multiple helper calls in one statement; "
                        "only the first is modelled",
                        config.strict,
                    )
                targets = [(helpers[0], _helper_resources(script, helpers[0]))]

            # markers on the call-site lines themselves contribute too
            needs_max = _resources_in_span(script, stmt.lineno, stmt.end_lineno or stmt.lineno)

            helper_atoms: list[tuple[str, str]] = []  # (atom, helper fn)
            arm_atoms: list[str] = []
            for helper, needs in targets:
                if helper is None:
                    arm_atoms.append(continuation)
                    continue
                atom = _atom_for(helper, script, config)
                helper_atoms.append((atom, helper))
                arm_atoms.append(atom)
                for name, count in needs.items():
                    needs_max[name] = max(needs_max.get(name, 0), count)

            def sort_key(atom: str) -> tuple[int, int]:
                for helper_atom, helper in helper_atoms:
                    if helper_atom == atom:
                        return (0, script.def_order[helper])
                return (1, 0)  # fall-through continuation sorts last

            ordered = sorted(dict.fromkeys(arm_atoms), key=sort_key)
            for atom in ordered:
                acc.control(atom)
            if not last:
                acc.control(continuation)
            premises = [current]
            for name in sorted(needs_max):
                acc.resource(name)
                premises.extend([name] * needs_max[name])
            acc.rule(premises, [[atom] for atom in ordered])

            for atom, helper in sorted(
                helper_atoms, key=lambda pair: script.def_order[pair[1]]
            ):
                acc.return_edge(atom, continuation)
            current = continuation

    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "atoms": (
            [{"name": n, "kind": "control"} for n in acc.controls]
            + [{"name": n, "kind": "resource"} for n in acc.resources]
        ),
        "init": [env] + list(acc.resources),
        "rules": acc.rules,
        "goal": [env],
    }
    if phases:
        doc["phases"] = phases
    return doc
