"""Resource-consumption policies checked against proven trace sets.

A policy constrains which resource atoms an experimental phase may
consume.  When `allowed` is present it is closed-world: consuming any
resource outside the set is a violation.  Absent `allowed`, only the
explicit `forbidden` set is enforced.  `require_consumed` additionally
demands that every listed resource is consumed on every play.

Audits are pure functions of the trace set and the policy, so re-running
one always reproduces the same report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .core import Kind, LlxError, Multiset, Problem
from .engine import Proven, Trace, replay


class PolicyError(LlxError):
    pass


@dataclass(frozen=True)
class Policy:
    phase_name: str = ""
    allowed: frozenset[str] | None = None
    forbidden: frozenset[str] = frozenset()
    require_consumed: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.allowed is not None and self.allowed & self.forbidden:
            overlap = ", ".join(sorted(self.allowed & self.forbidden))
            raise PolicyError(f"allowed and forbidden overlap: {overlap}")


def load_policy(text: str) -> Policy:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolicyError(f"policy is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise PolicyError("policy must be a JSON object")
    unknown = set(doc) - {"phase", "allowed", "forbidden", "require_consumed"}
    if unknown:
        raise PolicyError(f"unknown policy fields: {', '.join(sorted(unknown))}")

    def names(key: str) -> frozenset[str]:
        value = doc.get(key, [])
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise PolicyError(f"policy field {key!r} must be a list of atom names")
        return frozenset(value)

    return Policy(
        phase_name=doc.get("phase", ""),
        allowed=names("allowed") if "allowed" in doc else None,
        forbidden=names("forbidden"),
        require_consumed=names("require_consumed"),
    )


def _check_resource_names(p: Problem, names: Sequence[str]) -> None:
    declared = {a.name: a.kind for a in p.atoms}
    for name in names:
        if name not in declared:
            raise PolicyError(f"policy names unknown atom {name!r}")
        if declared[name] is not Kind.RESOURCE:
            raise PolicyError(f"policy names non-resource atom {name!r}")


@dataclass(frozen=True)
class Finding:
    trace_index: int
    firing_index: int | None
    rule_name: str | None
    atom: str
    kind: str  # "not_allowed" | "forbidden" | "missing_required"

    def __str__(self) -> str:
        if self.kind == "missing_required":
            return f"trace {self.trace_index}: required resource {self.atom} never consumed"
        return (
            f"trace {self.trace_index} firing {self.firing_index} "
            f"rule {self.rule_name}: consumes {self.atom} ({self.kind})"
        )


@dataclass(frozen=True)
class AuditReport:
    verdict: str  # "pass" | "violation"
    findings: tuple[Finding, ...] = field(default=())


def consumed_resources(p: Problem, t: Trace | Sequence) -> Multiset:
    """Sum of resource-kind premises over the trace's firings."""
    firings = t.firings if isinstance(t, Trace) else tuple(t)
    replay(p, firings)  # validates applicability step by step
    resource = {a.name for a in p.atoms if a.kind is Kind.RESOURCE}
    total: Multiset = Multiset()
    for f in firings:
        premises = p.rule_named(f.rule_name).premises
        taken = {n: c for n, c in premises.counts.items() if n in resource}
        if taken:
            total = total + Multiset(taken)
    return total


def audit(p: Problem, verdict: Proven, policy: Policy) -> AuditReport:
    """Check every trace of a proven verdict against the policy."""
    if not isinstance(verdict, Proven):
        raise PolicyError("audit requires a proven verdict")
    _check_resource_names(
        p,
        sorted(
            (policy.allowed or frozenset())
            | policy.forbidden
            | policy.require_consumed
        ),
    )
    resource = {a.name for a in p.atoms if a.kind is Kind.RESOURCE}
    findings: list[Finding] = []
    for ti, trace in enumerate(verdict.traces):
        consumed_names: set[str] = set()
        for fi, firing in enumerate(trace.firings):
            premises = p.rule_named(firing.rule_name).premises
            for name in sorted(set(premises.names()) & resource):
                consumed_names.add(name)
                if name in policy.forbidden:
                    findings.append(Finding(ti, fi, firing.rule_name, name, "forbidden"))
                elif policy.allowed is not None and name not in policy.allowed:
                    findings.append(Finding(ti, fi, firing.rule_name, name, "not_allowed"))
        for name in sorted(policy.require_consumed - consumed_names):
            findings.append(Finding(ti, None, None, name, "missing_required"))
    return AuditReport("pass" if not findings else "violation", tuple(findings))
