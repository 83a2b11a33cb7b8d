"""Command line for the extractor.

    llx-extract <script> [--config cfg.json] [--strict] [-o out.cfir.json]

Emits an llx-cfir/1 document on stdout (or to the output file) and
prints extraction warnings on stderr.  Exit codes: 0 extracted,
2 on syntax errors, unsupported constructs under --strict, or bad
configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from pathlib import Path

from .extract import ExtractionConfig, UnsupportedConstructError, extract, load_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llx-extract",
        description="Extract a control-flow interchange document from an experiment script.",
    )
    parser.add_argument("script", help="annotated Python experiment script")
    parser.add_argument("--config", default=None, help="extraction config JSON")
    parser.add_argument(
        "--strict", action="store_true", help="reject unsupported constructs instead of warning"
    )
    parser.add_argument("-o", "--output", default=None, help="write the document here")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        source = Path(args.script).read_text()
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    try:
        config = ExtractionConfig()
        if args.config:
            config = load_config(Path(args.config).read_text())
        if args.strict:
            config = dataclasses.replace(config, strict=True)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: bad config: {exc}\n")
        return 2
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            document = extract(source, config)
        for w in caught:
            sys.stderr.write(f"warning: {w.message}\n")
    except SyntaxError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except UnsupportedConstructError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    text = json.dumps(document, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
