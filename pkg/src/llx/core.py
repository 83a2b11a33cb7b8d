"""Term language for the propositional linear-logic fragment.

The fragment has atoms, tensor (`*`), additive choice (`&`), linear
implication (`-o`) and the permanence marker (`!`).  Program rules are
permanent implications in the normal form ``!(a1 * ... * an -o A1 & ... & Am)``
where every ``Ai`` is a tensor of atoms.  A verification problem bundles a
rule program with an initial multiset and a goal multiset.

Concrete syntax (ASCII):

    formula   := with ( "-o" with )?          -o loosest, non-associative
    with      := tensor ( "&" tensor )*
    tensor    := primary ( "*" primary )*      * binds tightest
    primary   := IDENT | "(" formula ")" | "!" primary

Whitespace is insignificant; ``#`` starts a comment in problem files.
All values in this module are immutable after construction.
"""

from __future__ import annotations

import re
import sys
import threading
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, Sequence, TypeVar

IDENT_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*")

T = TypeVar("T")


def call_with_stack_headroom(fn: Callable[[], T], frames_hint: int) -> T:
    """Run fn, on a large-stack worker thread when deep recursion is likely.

    Search depths and proof sizes are user-bounded (default 10 000), which
    overflows CPython's default stack; the worker raises the recursion
    limit proportionally instead of forcing iterative rewrites everywhere.
    """
    if frames_hint <= 800:
        return fn()
    box: dict[str, object] = {}

    def runner() -> None:
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 4 * frames_hint + 1000))
        try:
            box["value"] = fn()
        except BaseException as exc:  # re-raised on the caller's thread
            box["error"] = exc
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size(256 * 1024 * 1024)
    try:
        worker = threading.Thread(target=runner)
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
    if "error" in box:
        raise box["error"]  # type: ignore[misc]
    return box["value"]  # type: ignore[return-value]


class LlxError(Exception):
    """Base class for all toolkit errors."""


class ParseError(LlxError):
    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        self.bare_message = message
        suffix = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{column}: {message}{suffix}")


class FragmentError(LlxError):
    """Raised when a formula falls outside the rule fragment."""


class ValidationError(LlxError):
    """Raised when a structurally well-formed problem violates an invariant."""


class FragmentWarning(UserWarning):
    """Signals accepted-but-unusual input, e.g. a rule missing its bang."""


class Kind(str, Enum):
    CONTROL = "control"
    RESOURCE = "resource"


@dataclass(frozen=True)
class Atom:
    """A named proposition tagged as a control point or a consumable resource."""

    name: str
    kind: Kind = Kind.CONTROL

    def __post_init__(self) -> None:
        if not IDENT_RE.fullmatch(self.name):
            raise ValidationError(f"invalid atom name: {self.name!r}")


class Multiset:
    """Immutable multiset of atom names with positive multiplicities.

    Equality is count-exact and order-independent.  The canonical textual
    form lists names lexicographically, repeated per multiplicity
    (e.g. ``e, m, m``).
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, counts: Mapping[str, int] | Iterable[str] = ()):
        acc: dict[str, int] = {}
        if isinstance(counts, str):
            raise ValidationError("pass atom names, not a bare string (use Multiset.of)")
        if isinstance(counts, Mapping):
            for name, n in counts.items():
                if not isinstance(n, int) or n <= 0:
                    raise ValidationError(f"multiplicity of {name!r} must be a positive int, got {n!r}")
                acc[name] = acc.get(name, 0) + n
        else:
            for name in counts:
                acc[name] = acc.get(name, 0) + 1
        object.__setattr__(self, "_counts", dict(sorted(acc.items())))
        object.__setattr__(self, "_hash", hash(tuple(self._counts.items())))

    @classmethod
    def of(cls, *names: str) -> "Multiset":
        return cls(names)

    @property
    def counts(self) -> Mapping[str, int]:
        return dict(self._counts)

    def count(self, name: str) -> int:
        return self._counts.get(name, 0)

    def names(self) -> tuple[str, ...]:
        return tuple(self._counts)

    def size(self) -> int:
        return sum(self._counts.values())

    def is_empty(self) -> bool:
        return not self._counts

    def expand(self, order: Sequence[str] | None = None) -> tuple[str, ...]:
        """All elements with repetition; lexicographic, or by `order` when given."""
        names = sorted(self._counts) if order is None else (
            [n for n in order if n in self._counts]
            + sorted(n for n in self._counts if n not in order)
        )
        out: list[str] = []
        for n in names:
            out.extend([n] * self._counts[n])
        return tuple(out)

    def contains(self, other: "Multiset") -> bool:
        return all(self.count(n) >= c for n, c in other._counts.items())

    def __le__(self, other: "Multiset") -> bool:
        return other.contains(self)

    def __add__(self, other: "Multiset") -> "Multiset":
        acc = dict(self._counts)
        for n, c in other._counts.items():
            acc[n] = acc.get(n, 0) + c
        return Multiset(acc)

    def __sub__(self, other: "Multiset") -> "Multiset":
        if not self.contains(other):
            raise ValidationError(f"cannot remove {other} from {self}")
        acc = dict(self._counts)
        for n, c in other._counts.items():
            acc[n] -= c
            if acc[n] == 0:
                del acc[n]
        return Multiset(acc)

    def shortfall(self, available: "Multiset") -> "Multiset":
        """Positive part of self - available: what `available` is missing."""
        acc = {n: c - available.count(n) for n, c in self._counts.items() if c > available.count(n)}
        return Multiset(acc)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Multiset) and self._counts == other._counts

    def __hash__(self) -> int:
        return self._hash

    def __iter__(self) -> Iterator[str]:
        return iter(self.expand())

    def __str__(self) -> str:
        return ", ".join(self.expand())

    def __repr__(self) -> str:
        return f"Multiset({dict(self._counts)!r})"


# --- formulas ---------------------------------------------------------------

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class AtomRef(Formula):
    name: str


@dataclass(frozen=True)
class Tensor(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self) -> None:
        flat: list[Formula] = []
        for c in self.children:
            flat.extend(c.children if isinstance(c, Tensor) else [c])
        if len(flat) < 2:
            raise ValidationError("tensor needs at least two children")
        object.__setattr__(self, "children", tuple(flat))


@dataclass(frozen=True)
class With(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self) -> None:
        flat: list[Formula] = []
        for c in self.children:
            flat.extend(c.children if isinstance(c, With) else [c])
        if len(flat) < 2:
            raise ValidationError("with needs at least two children")
        object.__setattr__(self, "children", tuple(flat))


@dataclass(frozen=True)
class Lolli(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Bang(Formula):
    inner: Formula


# --- lexing / parsing -------------------------------------------------------

_TOKEN_NAMES = {
    "*": "'*'", "&": "'&'", "-o": "'-o'", "!": "'!'",
    "(": "'('", ")": "')'", "ident": "identifier", "eof": "end of input",
}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in "*&!()":
            tokens.append(_Token(ch, ch, line, col))
            col += 1
            i += 1
            continue
        if ch == "-":
            if i + 1 < n and text[i + 1] == "o":
                tokens.append(_Token("-o", "-o", line, col))
                col += 2
                i += 2
                continue
            raise ParseError("dangling '-'", line, col, ("'-o'",))
        m = IDENT_RE.match(text, i)
        if m:
            tokens.append(_Token("ident", m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(tok, (kind,))
        self.pos += 1
        return tok

    def fail(self, tok: _Token, expected: tuple[str, ...]) -> None:
        names = tuple(_TOKEN_NAMES.get(e, e) for e in expected)
        what = _TOKEN_NAMES.get(tok.kind, repr(tok.text))
        raise ParseError(f"unexpected {what}", tok.line, tok.column, names)

    def formula(self) -> Formula:
        left = self.with_expr()
        if self.peek().kind == "-o":
            self.take("-o")
            right = self.with_expr()
            if self.peek().kind == "-o":
                # -o is non-associative: a -o b -o c must be parenthesised
                self.fail(self.peek(), (")", "eof"))
            return Lolli(left, right)
        return left

    def with_expr(self) -> Formula:
        parts = [self.tensor_expr()]
        while self.peek().kind == "&":
            self.take("&")
            parts.append(self.tensor_expr())
        return parts[0] if len(parts) == 1 else With(tuple(parts))

    def tensor_expr(self) -> Formula:
        parts = [self.primary()]
        while self.peek().kind == "*":
            self.take("*")
            parts.append(self.primary())
        return parts[0] if len(parts) == 1 else Tensor(tuple(parts))

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "ident":
            self.take("ident")
            return AtomRef(tok.text)
        if tok.kind == "(":
            self.take("(")
            inner = self.formula()
            self.take(")")
            return inner
        if tok.kind == "!":
            self.take("!")
            return Bang(self.primary())
        self.fail(tok, ("ident", "(", "!"))
        raise AssertionError("unreachable")


def parse_formula(text: str) -> Formula:
    """Parse concrete syntax into a flattened formula tree."""
    parser = _Parser(_lex(text))
    f = parser.formula()
    parser.take("eof")
    return f


# --- printing ---------------------------------------------------------------

_LEVEL_LOLLI, _LEVEL_WITH, _LEVEL_TENSOR, _LEVEL_PRIMARY = 0, 1, 2, 3


def _level(f: Formula) -> int:
    if isinstance(f, Lolli):
        return _LEVEL_LOLLI
    if isinstance(f, With):
        return _LEVEL_WITH
    if isinstance(f, Tensor):
        return _LEVEL_TENSOR
    return _LEVEL_PRIMARY


def print_formula(f: Formula) -> str:
    """Canonical text with minimal parentheses; inverse of parse_formula."""

    def wrap(child: Formula, minimum: int) -> str:
        text = print_formula(child)
        return f"({text})" if _level(child) < minimum else text

    if isinstance(f, AtomRef):
        return f.name
    if isinstance(f, Bang):
        inner = print_formula(f.inner)
        return f"!{inner}" if _level(f.inner) == _LEVEL_PRIMARY else f"!({inner})"
    if isinstance(f, Tensor):
        return " * ".join(wrap(c, _LEVEL_PRIMARY) for c in f.children)
    if isinstance(f, With):
        return " & ".join(wrap(c, _LEVEL_TENSOR) for c in f.children)
    if isinstance(f, Lolli):
        # non-associative: nested lollis on either side need parentheses
        return f"{wrap(f.left, _LEVEL_WITH)} -o {wrap(f.right, _LEVEL_WITH)}"
    raise TypeError(f"not a formula: {f!r}")


# --- rules ------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """A permanent implication: premises are consumed, one alternative is produced.

    Alternative order is significant: it defines branch indices and the
    letter suffixes used in petri-net transition names.  `banged` records
    whether the source formula carried the `!`; permanence is the only
    supported semantics either way, so it does not take part in equality.
    """

    name: str
    premises: Multiset
    alternatives: tuple[Multiset, ...]
    banged: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        if not IDENT_RE.fullmatch(self.name):
            raise ValidationError(f"invalid rule name: {self.name!r}")
        if self.premises.is_empty():
            raise ValidationError(f"rule {self.name}: empty premise multiset")
        if not self.alternatives:
            raise ValidationError(f"rule {self.name}: needs at least one alternative")
        if any(alt.is_empty() for alt in self.alternatives):
            raise ValidationError(f"rule {self.name}: empty alternative multiset")
        object.__setattr__(self, "alternatives", tuple(self.alternatives))

    def atoms_used(self) -> set[str]:
        used = set(self.premises.names())
        for alt in self.alternatives:
            used.update(alt.names())
        return used


def _atoms_of_tensor(f: Formula, context: str) -> Multiset:
    if isinstance(f, AtomRef):
        return Multiset.of(f.name)
    if isinstance(f, Tensor):
        names = []
        for c in f.children:
            if not isinstance(c, AtomRef):
                raise FragmentError(f"{context} must be a tensor of atoms, found '{print_formula(c)}'")
            names.append(c.name)
        return Multiset(names)
    raise FragmentError(f"{context} must be a tensor of atoms, found '{print_formula(f)}'")


def normalize_rule(name: str, f: Formula) -> Rule:
    """Coerce a formula into rule normal form ``!(T -o A1 & ... & Am)``.

    A missing bang is accepted with a FragmentWarning since permanence is
    the only supported reading.  Anything else outside the fragment raises
    FragmentError naming the offending sub-formula.
    """
    banged = True
    if isinstance(f, Bang):
        f = f.inner
        if isinstance(f, Bang):
            raise FragmentError(f"doubled bang in rule {name}: '!{print_formula(f)}'")
    else:
        banged = False
        warnings.warn(
            f"rule {name}: implication without '!' treated as permanent",
            FragmentWarning,
            stacklevel=2,
        )
    if isinstance(f, AtomRef):
        raise FragmentError(f"bang on atom '{f.name}' is not a rule")
    if not isinstance(f, Lolli):
        raise FragmentError(f"rule {name} must be an implication, found '{print_formula(f)}'")
    if isinstance(f.left, Lolli) or isinstance(f.right, Lolli):
        raise FragmentError(f"nested implication in rule {name}: '{print_formula(f)}'")
    if isinstance(f.left, With):
        raise FragmentError(f"with on left of implication in rule {name}: '{print_formula(f.left)}'")
    premises = _atoms_of_tensor(f.left, f"left side of rule {name}")
    alt_formulas = f.right.children if isinstance(f.right, With) else (f.right,)
    alternatives = tuple(
        _atoms_of_tensor(a, f"alternative {i} of rule {name}") for i, a in enumerate(alt_formulas)
    )
    return Rule(name, premises, alternatives, banged=banged)


def multiset_to_formula(ms: Multiset, order: Sequence[str] | None = None) -> Formula:
    """A tensor of atom references (or a single reference) covering `ms`."""
    names = ms.expand(order)
    if not names:
        raise ValidationError("cannot express an empty multiset as a formula")
    if len(names) == 1:
        return AtomRef(names[0])
    return Tensor(tuple(AtomRef(n) for n in names))


def rule_to_formula(rule: Rule, order: Sequence[str] | None = None) -> Formula:
    """The banged normal form of `rule`; inverse of normalize_rule."""
    left = multiset_to_formula(rule.premises, order)
    alts = [multiset_to_formula(a, order) for a in rule.alternatives]
    right = alts[0] if len(alts) == 1 else With(tuple(alts))
    return Bang(Lolli(left, right))


# --- problems ---------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """A rule program with an initial multiset and a goal multiset.

    `atoms` fixes the declaration order used by renderers and exporters.
    `phases` optionally maps an experimental-phase name to its entry atom;
    it is carried for interchange fidelity and ignored by comparisons.
    """

    atoms: tuple[Atom, ...]
    rules: tuple[Rule, ...]
    init: Multiset
    goal: Multiset
    name: str | None = field(default=None, compare=False)
    phases: Mapping[str, str] | None = field(default=None, compare=False)

    def atom_order(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.atoms)

    def kind_of(self, name: str) -> Kind:
        for a in self.atoms:
            if a.name == name:
                return a.kind
        raise ValidationError(f"undeclared atom: {name}")

    def rule_named(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise ValidationError(f"unknown rule: {name}")

    def rule_index(self) -> Mapping[str, int]:
        return {r.name: i for i, r in enumerate(self.rules)}


def make_problem(
    rules: Sequence[Rule],
    init: Multiset,
    goal: Multiset,
    atoms: Sequence[Atom] = (),
    name: str | None = None,
    phases: Mapping[str, str] | None = None,
    allow_empty_goal: bool = False,
) -> Problem:
    """Assemble and validate a Problem, implicitly declaring missing atoms as control."""
    declared: dict[str, Atom] = {}
    for a in atoms:
        if a.name in declared:
            raise ValidationError(f"duplicate atom declaration: {a.name}")
        declared[a.name] = a

    ordered = list(atoms)

    def ensure(names: Iterable[str]) -> None:
        for n in names:
            if n not in declared:
                atom = Atom(n, Kind.CONTROL)
                declared[n] = atom
                ordered.append(atom)

    seen_rules: set[str] = set()
    for r in rules:
        if r.name in seen_rules:
            raise ValidationError(f"duplicate rule name: {r.name}")
        seen_rules.add(r.name)
        ensure(r.premises.expand())
        for alt in r.alternatives:
            ensure(alt.expand())
    ensure(init.expand())
    ensure(goal.expand())
    if goal.is_empty() and not allow_empty_goal:
        raise ValidationError("goal multiset is empty")
    if phases:
        ensure(phases.values())
    return Problem(tuple(ordered), tuple(rules), init, goal, name=name, phases=phases)


def parse_problem(text: str, format_hint: str = "llx", name: str | None = None) -> Problem:
    """Parse the line-oriented `.llx` problem format.

    Directives: ``atoms <kind> <names...>``, ``init <names...>``,
    ``rule <name> : <formula>``, ``goal <names...>``.  ``#`` comments out
    the rest of a line; repetition of a name encodes multiplicity.
    """
    if format_hint != "llx":
        raise ValidationError(f"unknown problem format: {format_hint!r}")
    atoms: list[Atom] = []
    declared: set[str] = set()
    rules: list[Rule] = []
    init: Multiset | None = None
    goal: Multiset | None = None

    def names_of(parts: list[str], lineno: int, directive: str) -> list[str]:
        for p in parts:
            if not IDENT_RE.fullmatch(p):
                raise ParseError(f"invalid name {p!r} in {directive}", lineno, 1)
        return parts

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "atoms":
            kind_name, _, atom_names = rest.partition(" ")
            try:
                kind = Kind(kind_name)
            except ValueError:
                raise ParseError(
                    f"unknown atom kind {kind_name!r}", lineno, 1, ("control", "resource")
                ) from None
            for n in names_of(atom_names.split(), lineno, "atoms"):
                if n in declared:
                    raise ValidationError(f"line {lineno}: duplicate atom declaration: {n}")
                declared.add(n)
                atoms.append(Atom(n, kind))
        elif head == "init":
            if init is not None:
                raise ValidationError(f"line {lineno}: duplicate init directive")
            init = Multiset(names_of(rest.split(), lineno, "init"))
        elif head == "goal":
            if goal is not None:
                raise ValidationError(f"line {lineno}: duplicate goal directive")
            goal = Multiset(names_of(rest.split(), lineno, "goal"))
            if goal.is_empty():
                raise ValidationError(f"line {lineno}: empty goal")
        elif head == "rule":
            rule_name, colon, formula_text = rest.partition(":")
            rule_name = rule_name.strip()
            if not colon:
                raise ParseError("rule directive needs ':'", lineno, 1, ("':'",))
            if not IDENT_RE.fullmatch(rule_name):
                raise ParseError(f"invalid rule name {rule_name!r}", lineno, 1)
            try:
                formula = parse_formula(formula_text)
            except ParseError as exc:
                raise ParseError(
                    f"in the body of rule {rule_name}: {exc.bare_message}",
                    lineno,
                    exc.column,
                    exc.expected,
                ) from None
            # the rule directive itself declares permanence, so a bare
            # implication here is the normal form, not a warning case
            if not isinstance(formula, Bang):
                formula = Bang(formula)
            rules.append(normalize_rule(rule_name, formula))
        else:
            raise ParseError(
                f"unknown directive {head!r}", lineno, 1, ("atoms", "init", "rule", "goal")
            )

    if goal is None:
        raise ValidationError("missing goal directive")
    return make_problem(
        rules, init if init is not None else Multiset(), goal, atoms=atoms, name=name
    )


def print_problem(p: Problem) -> str:
    """Render a Problem back to `.llx` text (declaration order preserved)."""
    order = p.atom_order()
    lines: list[str] = []
    run: list[str] = []
    run_kind: Kind | None = None
    for atom in (*p.atoms, None):
        if atom is not None and atom.kind is run_kind:
            run.append(atom.name)
            continue
        if run:
            lines.append(f"atoms {run_kind.value} {' '.join(run)}")
        if atom is not None:
            run, run_kind = [atom.name], atom.kind
    if not p.init.is_empty():
        lines.append(f"init {' '.join(p.init.expand(order))}")
    for r in p.rules:
        body = print_formula(rule_to_formula(r, order))
        lines.append(f"rule {r.name} : {body[2:-1] if body.startswith('!(') else body}")
    lines.append(f"goal {' '.join(p.goal.expand(order))}")
    return "\n".join(lines) + "\n"
