"""Multiset-rewriting semantics and bounded reachability search.

Two verdicts are offered over a sequent ``rules, init |- goal``:

* exists-path: some sequence of firings (rule and branch both chosen by
  the prover) rewrites the initial multiset to exactly the goal;
* all-paths: the prover commits to a rule before its branch outcome is
  known, the environment picks the branch, and every play must end at
  exactly the goal: ``win(s) = s == goal or exists applicable r such that
  all branches b of r satisfy win(fire(r, b, s))``.

Goal matching is count-exact (no weakening).  Revisiting a state along
the current path counts as failure, which makes the bounded search
terminate on cyclic programs.  The exists search memoizes failed states;
the all-paths search memoizes winning states only - caching losses is
unsound because a loss depends on the path taken to the state.

Both searches are deterministic: rules are tried in program order and
branches in index order, so returned traces are canonical.  Hitting a
limit anywhere aborts the whole search with LimitExceeded, which makes
verdicts and trace sets monotone under limit increases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import LlxError, Multiset, Problem, Rule, call_with_stack_headroom

State = Multiset


class NotApplicableError(LlxError):
    def __init__(self, rule_name: str, missing: Multiset):
        self.rule_name = rule_name
        self.missing = missing
        super().__init__(f"rule {rule_name} not applicable: missing {{{missing}}}")


class BranchOutOfRange(LlxError):
    pass


class ReplayError(LlxError):
    def __init__(self, step: int, missing: Multiset | None, message: str | None = None):
        self.step = step
        self.missing = missing
        detail = message or f"missing {{{missing}}}"
        super().__init__(f"replay failed at step {step}: {detail}")


@dataclass(frozen=True)
class Firing:
    """One application of a named rule along a chosen alternative."""

    rule_name: str
    branch: int

    def __str__(self) -> str:
        return f"{self.rule_name}#{self.branch}"


@dataclass(frozen=True)
class Trace:
    """A replayable sequence of firings from `start` ending at `end`."""

    firings: tuple[Firing, ...]
    start: State
    end: State

    def __str__(self) -> str:
        return " ".join(str(f) for f in self.firings) if self.firings else "(empty)"


@dataclass(frozen=True)
class StuckReport:
    """A non-goal state with no applicable rule, and how the search got there."""

    state: State
    demonic_choices: tuple[Firing, ...]
    blocked: tuple[tuple[str, Multiset], ...]


@dataclass(frozen=True)
class SearchLimits:
    max_depth: int = 10_000
    max_states: int = 1_000_000

    def __post_init__(self) -> None:
        if self.max_depth <= 0 or self.max_states <= 0:
            raise ValueError("search limits must be positive")


@dataclass(frozen=True)
class Proven:
    traces: tuple[Trace, ...]


@dataclass(frozen=True)
class Refuted:
    stuck: StuckReport | None = None
    note: str = ""


@dataclass(frozen=True)
class LimitExceeded:
    limit: str  # "max_depth" or "max_states"


Verdict = Proven | Refuted | LimitExceeded


def applicable(rule: Rule, state: State) -> bool:
    """True iff the rule's premises are contained in the state, count-wise."""
    return state.contains(rule.premises)


def fire(rule: Rule, branch: int, state: State) -> State:
    """Consume the premises, produce the chosen alternative; pure."""
    if not 0 <= branch < len(rule.alternatives):
        raise BranchOutOfRange(f"rule {rule.name} has no branch {branch}")
    if not applicable(rule, state):
        raise NotApplicableError(rule.name, rule.premises.shortfall(state))
    result = state - rule.premises + rule.alternatives[branch]
    assert all(c > 0 for c in result.counts.values())
    return result


def replay(p: Problem, t: Trace | Sequence[Firing], start: State | None = None) -> State:
    """Apply firings in order; errors on the first inapplicable step."""
    if isinstance(t, Trace):
        firings: Sequence[Firing] = t.firings
        state = t.start if start is None else start
    else:
        firings = tuple(t)
        state = p.init if start is None else start
    rules = {r.name: r for r in p.rules}
    for i, f in enumerate(firings):
        rule = rules.get(f.rule_name)
        if rule is None:
            raise ReplayError(i, None, f"unknown rule {f.rule_name!r}")
        if not 0 <= f.branch < len(rule.alternatives):
            raise ReplayError(i, None, f"rule {f.rule_name} has no branch {f.branch}")
        missing = rule.premises.shortfall(state)
        if not missing.is_empty():
            raise ReplayError(i, missing)
        state = state - rule.premises + rule.alternatives[f.branch]
    return state


class _LimitAbort(Exception):
    def __init__(self, limit: str):
        self.limit = limit


def _blocked(p: Problem, state: State) -> tuple[tuple[str, Multiset], ...]:
    out = []
    for r in p.rules:
        missing = r.premises.shortfall(state)
        if not missing.is_empty():
            out.append((r.name, missing))
    return tuple(out)


def _state_key(state: State) -> State:
    return state  # Multiset is hashable and order-independent


def prove_exists(p: Problem, limits: SearchLimits = SearchLimits()) -> Verdict:
    """Search for one firing sequence rewriting init to exactly goal."""

    failed: set[State] = set()
    seen: set[State] = set()
    path: set[State] = set()
    firings: list[Firing] = []
    first_stuck: list[StuckReport] = []

    def search(state: State, depth: int) -> tuple[Firing, ...] | None:
        if state == p.goal:
            return tuple(firings)
        if state in failed or state in path:
            return None
        if state not in seen:
            seen.add(state)
            if len(seen) > limits.max_states:
                raise _LimitAbort("max_states")
        options = [r for r in p.rules if applicable(r, state)]
        if not options:
            if not first_stuck:
                first_stuck.append(StuckReport(state, tuple(firings), _blocked(p, state)))
            failed.add(state)
            return None
        if depth >= limits.max_depth:
            raise _LimitAbort("max_depth")
        path.add(state)
        try:
            for rule in options:
                for branch in range(len(rule.alternatives)):
                    firings.append(Firing(rule.name, branch))
                    found = search(fire(rule, branch, state), depth + 1)
                    if found is not None:
                        return found
                    firings.pop()
        finally:
            path.discard(state)
        failed.add(state)
        return None

    try:
        found = call_with_stack_headroom(lambda: search(p.init, 0), limits.max_depth)
    except _LimitAbort as exc:
        return LimitExceeded(exc.limit)
    if found is None:
        if first_stuck:
            return Refuted(stuck=first_stuck[0])
        return Refuted(note="search space exhausted: every path revisits a state")
    trace = Trace(tuple(found), p.init, replay(p, tuple(found)))
    return Proven((trace,))


def prove_all_paths(p: Problem, limits: SearchLimits = SearchLimits()) -> Verdict:
    """Decide the branch-adversarial game; Proven carries one trace per play.

    The prover picks the rule, the environment picks the alternative.  The
    returned trace set covers every branch combination of the winning
    strategy, ordered lexicographically by (rule position, branch).
    """

    win_memo: dict[State, tuple[tuple[Firing, ...], ...]] = {}
    seen: set[State] = set()
    path: set[State] = set()
    firings: list[Firing] = []
    first_stuck: list[StuckReport] = []

    def search(state: State, depth: int) -> tuple[tuple[Firing, ...], ...] | None:
        if state == p.goal:
            return ((),)
        hit = win_memo.get(state)
        if hit is not None:
            return hit
        if state in path:
            return None
        if state not in seen:
            seen.add(state)
            if len(seen) > limits.max_states:
                raise _LimitAbort("max_states")
        options = [r for r in p.rules if applicable(r, state)]
        if not options:
            if not first_stuck:
                first_stuck.append(StuckReport(state, tuple(firings), _blocked(p, state)))
            return None
        if depth >= limits.max_depth:
            raise _LimitAbort("max_depth")
        path.add(state)
        try:
            for rule in options:
                collected: list[tuple[Firing, ...]] = []
                all_win = True
                for branch in range(len(rule.alternatives)):
                    firings.append(Firing(rule.name, branch))
                    sub = search(fire(rule, branch, state), depth + 1)
                    firings.pop()
                    if sub is None:
                        all_win = False
                        break
                    head = Firing(rule.name, branch)
                    collected.extend((head, *suffix) for suffix in sub)
                if all_win:
                    result = tuple(collected)
                    win_memo[state] = result
                    return result
        finally:
            path.discard(state)
        return None

    try:
        plays = call_with_stack_headroom(lambda: search(p.init, 0), limits.max_depth)
    except _LimitAbort as exc:
        return LimitExceeded(exc.limit)
    if plays is None:
        if first_stuck:
            return Refuted(stuck=first_stuck[0])
        return Refuted(note="no branch-proof strategy: every alternative cycles")
    index = p.rule_index()
    ordered = sorted(
        plays, key=lambda fs: tuple((index[f.rule_name], f.branch) for f in fs)
    )
    traces = tuple(Trace(fs, p.init, replay(p, fs)) for fs in ordered)
    return Proven(traces)
