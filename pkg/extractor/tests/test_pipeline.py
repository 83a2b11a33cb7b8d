"""End-to-end checks against the verifier package through its public surfaces."""

import json
import subprocess
import sys
import time
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FIGURE1 = FIXTURES / "figure1.py"
PAPER_LLX = Path(__file__).resolve().parents[2] / "src" / "llx" / "fixtures" / "paper.llx"


def run_extract(*argv: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "llx_extract.cli", *argv],
        capture_output=True,
        text=True,
    )


def test_figure1_document_equals_bundled_problem(tmp_path):
    start = time.perf_counter()
    result = run_extract(str(FIGURE1))
    assert result.returncode == 0, result.stderr

    from llx.core import parse_problem
    from llx.interchange import cfir_to_problem

    extracted = cfir_to_problem(json.loads(result.stdout))
    bundled = parse_problem(PAPER_LLX.read_text())
    assert extracted == bundled
    assert extracted.atoms == bundled.atoms
    assert extracted.rules == bundled.rules
    assert extracted.init == bundled.init
    assert extracted.goal == bundled.goal
    assert time.perf_counter() - start < 2.0


def test_figure1_pipes_into_all_paths_check(tmp_path):
    start = time.perf_counter()
    out = tmp_path / "figure1.cfir.json"
    result = run_extract(str(FIGURE1), "-o", str(out))
    assert result.returncode == 0, result.stderr
    assert "warning:" in result.stderr  # empty validation/testing phases

    check = subprocess.run(
        [sys.executable, "-m", "llx.cli", "check", str(out), "--mode", "all-paths"],
        capture_output=True,
        text=True,
    )
    assert check.returncode == 0, check.stderr
    assert check.stdout.splitlines()[0] == "VERIFIED (2 paths)"
    assert time.perf_counter() - start < 2.0


def test_extracted_bytes_are_deterministic(tmp_path):
    first = run_extract(str(FIGURE1))
    second = run_extract(str(FIGURE1))
    assert first.stdout == second.stdout


def test_strict_flag_propagates(tmp_path):
    script = tmp_path / "loopy.py"
    script.write_text(
        "def helper():\n    pass\n\n\ndef training():\n"
        "    while True:\n        pass\n    helper()\n"
    )
    ok = run_extract(str(script))
    assert ok.returncode == 0
    strict = run_extract(str(script), "--strict")
    assert strict.returncode == 2
    assert "While" in strict.stderr


def test_missing_script_exits_2():
    result = run_extract("no_such_file.py")
    assert result.returncode == 2


def test_one_helper_script_checks_green(tmp_path):
    script = tmp_path / "simple.py"
    script.write_text("def helper():\n    pass\n\n\ndef training():\n    helper()\n")
    out = tmp_path / "simple.cfir.json"
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"phase_functions": ["training"]}')
    result = run_extract(str(script), "--config", str(cfg), "-o", str(out))
    assert result.returncode == 0, result.stderr
    doc = json.loads(out.read_text())
    assert len(doc["atoms"]) == 3
    assert len(doc["rules"]) == 3
    check = subprocess.run(
        [sys.executable, "-m", "llx.cli", "check", str(out)],
        capture_output=True,
        text=True,
    )
    assert check.returncode == 0
