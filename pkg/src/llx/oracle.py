"""Brute-force reachability oracle used to cross-check the engine.

Enumerates the full choice tree with no memoization and no move
ordering, evaluating in three-valued logic: a position is True (goal
reached / forced), False (dead or revisits the path), or Unknown when
the depth bound cuts off a live continuation.  Unknown anywhere that
could have flipped the answer yields LimitExceeded rather than a
verdict, so definitive oracle verdicts are trustworthy at their depth.

Deliberately shares no code with llx.engine beyond the data types:
containment and firing are re-derived from raw count dictionaries.
"""

from __future__ import annotations

from .core import Multiset, Problem
from .engine import Firing, LimitExceeded, Proven, Refuted, Trace, Verdict

# ordered so that min = environment's branch pick, max = prover's rule pick
_FALSE, _UNKNOWN, _TRUE = 0, 1, 2


class _Budget:
    def __init__(self, nodes: int):
        self.nodes = nodes

    def tick(self) -> None:
        self.nodes -= 1
        if self.nodes < 0:
            raise _BudgetExhausted()


class _BudgetExhausted(Exception):
    pass


def _fire_counts(state: dict[str, int], take: Multiset, give: Multiset) -> dict[str, int]:
    nxt = dict(state)
    for name, c in take.counts.items():
        nxt[name] = nxt[name] - c
        if nxt[name] == 0:
            del nxt[name]
    for name, c in give.counts.items():
        nxt[name] = nxt.get(name, 0) + c
    return nxt


def _enabled(state: dict[str, int], take: Multiset) -> bool:
    return all(state.get(name, 0) >= c for name, c in take.counts.items())


def oracle_reachable(
    p: Problem, max_depth: int, mode: str = "exists", node_budget: int = 500_000
) -> Verdict:
    """Exhaustive verdict for the exists or all_paths question to max_depth."""
    if mode not in ("exists", "all_paths"):
        raise ValueError(f"unknown oracle mode: {mode!r}")
    goal = dict(p.goal.counts)
    budget = _Budget(node_budget)

    def freeze(state: dict[str, int]) -> tuple[tuple[str, int], ...]:
        return tuple(sorted(state.items()))

    def exists(state: dict[str, int], stack: tuple, depth: int) -> tuple[int, tuple[Firing, ...] | None]:
        budget.tick()
        if state == goal:
            return _TRUE, ()
        key = freeze(state)
        if key in stack:
            return _FALSE, None
        moves = [
            (r, b)
            for r in p.rules
            if _enabled(state, r.premises)
            for b in range(len(r.alternatives))
        ]
        if not moves:
            return _FALSE, None
        if depth == 0:
            return _UNKNOWN, None
        verdict = _FALSE
        for rule, b in moves:
            sub, witness = exists(
                _fire_counts(state, rule.premises, rule.alternatives[b]),
                stack + (key,),
                depth - 1,
            )
            if sub == _TRUE:
                return _TRUE, (Firing(rule.name, b),) + (witness or ())
            verdict = max(verdict, sub)
        return verdict, None

    def all_paths(
        state: dict[str, int], stack: tuple, depth: int
    ) -> tuple[int, tuple[tuple[Firing, ...], ...] | None]:
        budget.tick()
        if state == goal:
            return _TRUE, ((),)
        key = freeze(state)
        if key in stack:
            return _FALSE, None
        rules = [r for r in p.rules if _enabled(state, r.premises)]
        if not rules:
            return _FALSE, None
        if depth == 0:
            return _UNKNOWN, None
        verdict = _FALSE
        for rule in rules:
            value = _TRUE
            plays: list[tuple[Firing, ...]] = []
            for b in range(len(rule.alternatives)):
                sub, sub_plays = all_paths(
                    _fire_counts(state, rule.premises, rule.alternatives[b]),
                    stack + (key,),
                    depth - 1,
                )
                value = min(value, sub)
                if value == _FALSE:
                    break
                if sub == _TRUE:
                    plays.extend((Firing(rule.name, b),) + s for s in sub_plays or ())
            if value == _TRUE:
                return _TRUE, tuple(plays)
            verdict = max(verdict, value)
        return verdict, None

    init = dict(p.init.counts)
    try:
        if mode == "exists":
            value, witness = exists(init, (), max_depth)
            plays = (witness,) if witness is not None else None
        else:
            value, plays = all_paths(init, (), max_depth)
    except _BudgetExhausted:
        return LimitExceeded("max_states")
    if value == _UNKNOWN:
        return LimitExceeded("max_depth")
    if value == _FALSE:
        return Refuted(note=f"exhaustive enumeration to depth {max_depth}")
    assert plays is not None
    traces = tuple(
        Trace(fs, p.init, _replay_counts(p, fs)) for fs in plays
    )
    return Proven(traces)


def _replay_counts(p: Problem, firings: tuple[Firing, ...]) -> Multiset:
    state = dict(p.init.counts)
    rules = {r.name: r for r in p.rules}
    for f in firings:
        r = rules[f.rule_name]
        state = _fire_counts(state, r.premises, r.alternatives[f.branch])
    return Multiset(state)
