"""Command-line interface.

Subcommands: check (reachability verdict), prove (render proofs),
export (dot / clf / cfir), audit (policy over proven traces) and
oracle (cross-check the engine against the brute-force enumerator).

Exit codes: 0 verified/pass/agrees, 1 refuted/violation/disagrees,
2 usage, I/O, parse or limit problems.  Identical invocations write
byte-identical stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import audit as audit_mod
from . import engine, oracle
from .core import LlxError, Problem, parse_problem
from .interchange import cfir_to_problem, dumps_cfir, export_clf
from .petri import DotOptions, export_dot, to_petri
from .proof import proof_to_interchange, render_proof, trace_to_proof

EXIT_OK, EXIT_REFUTED, EXIT_ERROR = 0, 1, 2


def load_problem(path: str) -> Problem:
    text = Path(path).read_text()
    if path.endswith(".cfir.json") or path.endswith(".json"):
        return cfir_to_problem(text)
    if path.endswith(".llx"):
        return parse_problem(text)
    raise LlxError(f"cannot tell the format of {path!r} (expected .llx or .cfir.json)")


def _limits(args: argparse.Namespace) -> engine.SearchLimits:
    return engine.SearchLimits(max_depth=args.max_depth, max_states=args.max_states)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _describe_verdict(verdict: engine.Verdict) -> tuple[str, int]:
    if isinstance(verdict, engine.Proven):
        lines = [f"VERIFIED ({len(verdict.traces)} path{'s' if len(verdict.traces) != 1 else ''})"]
        for i, trace in enumerate(verdict.traces):
            lines.append(f"path {i}: {trace}")
        return "\n".join(lines) + "\n", EXIT_OK
    if isinstance(verdict, engine.Refuted):
        lines = ["REFUTED"]
        if verdict.stuck is not None:
            report = verdict.stuck
            lines.append(f"stuck at {{{report.state}}}")
            via = " ".join(str(f) for f in report.demonic_choices) or "(initial state)"
            lines.append(f"  via: {via}")
            for rule_name, missing in report.blocked:
                lines.append(f"  {rule_name} missing {{{missing}}}")
        if verdict.note:
            lines.append(f"  note: {verdict.note}")
        return "\n".join(lines) + "\n", EXIT_REFUTED
    assert isinstance(verdict, engine.LimitExceeded)
    return f"LIMIT EXCEEDED ({verdict.limit})\n", EXIT_ERROR


def cmd_check(args: argparse.Namespace) -> int:
    p = load_problem(args.file)
    prover = engine.prove_all_paths if args.mode == "all-paths" else engine.prove_exists
    text, code = _describe_verdict(prover(p, _limits(args)))
    _emit(text, args.output)
    return code


def cmd_prove(args: argparse.Namespace) -> int:
    p = load_problem(args.file)
    verdict = engine.prove_all_paths(p, _limits(args))
    if isinstance(verdict, engine.LimitExceeded):
        sys.stderr.write(f"limit exceeded: {verdict.limit}\n")
        return EXIT_ERROR
    if isinstance(verdict, engine.Refuted):
        text, code = _describe_verdict(verdict)
        sys.stderr.write(text)
        return code

    def rendered(trace: engine.Trace) -> str:
        proof = trace_to_proof(p, trace)
        if args.style == "interchange":
            return proof_to_interchange(proof)
        return render_proof(proof, args.style)

    if args.path is not None:
        if not 0 <= args.path < len(verdict.traces):
            sys.stderr.write(
                f"path {args.path} out of range: proof has {len(verdict.traces)} paths\n"
            )
            return EXIT_ERROR
        _emit(rendered(verdict.traces[args.path]), args.output)
        return EXIT_OK
    blocks = []
    for i, trace in enumerate(verdict.traces):
        blocks.append(f"=== path {i}: {trace} ===\n{rendered(trace)}")
    _emit("".join(blocks), args.output)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    p = load_problem(args.file)
    if args.format == "dot":
        options = DotOptions(
            control_color=args.control_color, resource_color=args.resource_color
        )
        text = export_dot(to_petri(p), options)
    elif args.format == "clf":
        text = export_clf(p)
    else:
        text = dumps_cfir(p)
    _emit(text, args.output)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    p = load_problem(args.file)
    policy = audit_mod.load_policy(Path(args.policy).read_text())
    verdict = engine.prove_all_paths(p, _limits(args))
    if not isinstance(verdict, engine.Proven):
        sys.stderr.write("cannot audit: the goal is not proven on all paths\n")
        return EXIT_ERROR
    report = audit_mod.audit(p, verdict, policy)
    lines = [f"AUDIT {report.verdict.upper()} ({len(verdict.traces)} paths)"]
    lines.extend(str(f) for f in report.findings)
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if report.verdict == "pass" else EXIT_REFUTED


def cmd_oracle(args: argparse.Namespace) -> int:
    p = load_problem(args.file)
    mode = "all_paths" if args.mode == "all-paths" else "exists"
    prover = engine.prove_all_paths if mode == "all_paths" else engine.prove_exists
    engine_verdict = prover(p, _limits(args))
    oracle_verdict = oracle.oracle_reachable(p, args.max_depth, mode)
    engine_text, _ = _describe_verdict(engine_verdict)
    lines = [f"engine: {engine_text.splitlines()[0]}"]
    oracle_text, _ = _describe_verdict(oracle_verdict)
    lines.append(f"oracle: {oracle_text.splitlines()[0]}")
    if isinstance(engine_verdict, engine.LimitExceeded) or isinstance(
        oracle_verdict, engine.LimitExceeded
    ):
        lines.append("UNDECIDED (limits)")
        _emit("\n".join(lines) + "\n", args.output)
        return EXIT_ERROR
    agrees = type(engine_verdict) is type(oracle_verdict)
    lines.append("AGREES" if agrees else "DISAGREES")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if agrees else EXIT_REFUTED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llx",
        description="Verify resource and control-flow properties in linear logic.",
    )
    parser.add_argument(
        "--no-color", action="store_true", help="force plain output (output is always plain)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, depth_default: int = 10_000) -> None:
        p.add_argument("file", help="problem file (.llx or .cfir.json)")
        p.add_argument("--max-depth", type=int, default=depth_default)
        p.add_argument("--max-states", type=int, default=1_000_000)
        p.add_argument("-o", "--output", default=None, help="write to file instead of stdout")

    p_check = sub.add_parser("check", help="decide the reachability sequent")
    common(p_check)
    p_check.add_argument("--mode", choices=("exists", "all-paths"), default="all-paths")
    p_check.set_defaults(func=cmd_check)

    p_prove = sub.add_parser("prove", help="emit checkable proofs for every path")
    common(p_prove)
    p_prove.add_argument(
        "--style",
        choices=("full", "simplified", "transition", "interchange"),
        default="full",
    )
    p_prove.add_argument("--path", type=int, default=None, help="emit only this path's proof")
    p_prove.set_defaults(func=cmd_prove)

    p_export = sub.add_parser("export", help="export dot, clf or cfir views")
    common(p_export)
    p_export.add_argument("--format", choices=("dot", "clf", "cfir"), required=True)
    p_export.add_argument("--control-color", default="orange")
    p_export.add_argument("--resource-color", default="palegreen")
    p_export.set_defaults(func=cmd_export)

    p_audit = sub.add_parser("audit", help="check resource policy over all proofs")
    common(p_audit)
    p_audit.add_argument("--policy", required=True, help="policy JSON file")
    p_audit.set_defaults(func=cmd_audit)

    p_oracle = sub.add_parser("oracle", help="cross-check engine against brute force")
    common(p_oracle, depth_default=8)
    p_oracle.add_argument("--mode", choices=("exists", "all-paths"), default="all-paths")
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except LlxError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
