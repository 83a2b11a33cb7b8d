import json

import pytest

from llx.cli import main

from conftest import FIXTURES, load_fixture

PAPER = str(FIXTURES / "paper.llx")
PAPER_NO_M = str(FIXTURES / "paper_no_m.llx")
LEAK = str(FIXTURES / "leak.llx")
ALLOW_M = str(FIXTURES / "allow_m.json")
FORBID_VAL = str(FIXTURES / "forbid_val.json")


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCheck:
    def test_paper_all_paths_verified(self, capsys):
        code, out, _ = run(capsys, "check", PAPER, "--mode", "all-paths")
        assert code == 0
        assert out.splitlines()[0] == "VERIFIED (2 paths)"
        assert "path 0: pi1#0 pi2#0 pi3#0" in out
        assert "path 1: pi1#0 pi2#1 pi4#0" in out

    def test_exists_mode_single_path(self, capsys):
        code, out, _ = run(capsys, "check", PAPER, "--mode", "exists")
        assert code == 0
        assert out.splitlines()[0] == "VERIFIED (1 path)"

    def test_refuted_prints_stuck_report(self, capsys, tmp_path):
        content = load_fixture("paper.llx").replace("init e m", "init e").replace(
            "goal e", "goal f1"
        )
        f = tmp_path / "stuck.llx"
        f.write_text(content)
        code, out, _ = run(capsys, "check", str(f))
        assert code == 1
        assert "REFUTED" in out
        assert "stuck at {t}" in out
        assert "pi2 missing {m}" in out
        assert "via: pi1#0" in out

    def test_missing_file_exits_2(self, capsys):
        code, _, err = run(capsys, "check", "missing.llx")
        assert code == 2
        assert "error" in err

    def test_parse_error_exits_2(self, capsys, tmp_path):
        f = tmp_path / "bad.llx"
        f.write_text("rule broken e -o\n")
        code, _, err = run(capsys, "check", str(f))
        assert code == 2
        assert "error" in err

    def test_limit_exceeded_exits_2(self, capsys):
        code, out, _ = run(capsys, "check", PAPER, "--max-depth", "1", "--mode", "exists")
        assert code == 2
        assert "LIMIT EXCEEDED (max_depth)" in out

    def test_cfir_input_accepted(self, capsys, tmp_path):
        run(capsys, "export", PAPER, "--format", "cfir", "-o", str(tmp_path / "p.cfir.json"))
        code, out, _ = run(capsys, "check", str(tmp_path / "p.cfir.json"))
        assert code == 0
        assert "VERIFIED (2 paths)" in out

    def test_stdout_is_reproducible(self, capsys):
        _, first, _ = run(capsys, "check", PAPER)
        _, second, _ = run(capsys, "check", PAPER)
        assert first == second

    def test_unknown_extension_exits_2(self, capsys, tmp_path):
        f = tmp_path / "problem.txt"
        f.write_text("goal e\n")
        code, _, err = run(capsys, "check", str(f))
        assert code == 2
        assert "format" in err

    def test_no_color_flag_accepted(self, capsys):
        code, out, _ = run(capsys, "--no-color", "check", PAPER)
        assert code == 0
        assert "\x1b[" not in out


class TestProve:
    def test_transition_path0_matches_golden(self, capsys):
        code, out, _ = run(capsys, "prove", PAPER, "--style", "transition", "--path", "0")
        assert code == 0
        assert out == load_fixture("golden/paper_transition_path0.txt")

    def test_full_path1_uses_other_choice(self, capsys):
        code, out, _ = run(capsys, "prove", PAPER, "--style", "full", "--path", "1")
        assert code == 0
        assert "[&l(f1)]" in out
        assert "-o l(pi4)" in out

    def test_all_paths_have_headers(self, capsys):
        code, out, _ = run(capsys, "prove", PAPER)
        assert code == 0
        assert "=== path 0: pi1#0 pi2#0 pi3#0 ===" in out
        assert "=== path 1: pi1#0 pi2#1 pi4#0 ===" in out

    def test_interchange_style_is_valid_json(self, capsys):
        code, out, _ = run(capsys, "prove", PAPER, "--style", "interchange", "--path", "0")
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == "llx-proof/1"

    def test_unprovable_exits_1_without_proof(self, capsys, tmp_path):
        content = load_fixture("paper.llx").replace("goal e", "goal f1")
        f = tmp_path / "nope.llx"
        f.write_text(content)
        code, out, err = run(capsys, "prove", str(f))
        assert code == 1
        assert out == ""
        assert "REFUTED" in err

    def test_path_out_of_range_exits_2(self, capsys):
        code, _, err = run(capsys, "prove", PAPER, "--path", "7")
        assert code == 2
        assert "out of range" in err


class TestExport:
    @pytest.mark.parametrize(
        "fmt,golden",
        [("dot", "golden/paper.dot"), ("clf", "golden/paper.clf"), ("cfir", "golden/paper.cfir.json")],
    )
    def test_golden_outputs(self, capsys, fmt, golden):
        code, out, _ = run(capsys, "export", PAPER, "--format", fmt)
        assert code == 0
        assert out == load_fixture(golden)

    def test_output_flag_writes_file(self, capsys, tmp_path):
        target = tmp_path / "net.dot"
        code, out, _ = run(capsys, "export", PAPER, "--format", "dot", "-o", str(target))
        assert code == 0
        assert out == ""
        assert target.read_text() == load_fixture("golden/paper.dot")

    def test_color_flags(self, capsys):
        code, out, _ = run(capsys, "export", PAPER, "--format", "dot", "--control-color", "red")
        assert code == 0
        assert 'fillcolor="red"' in out

    def test_cfir_reexport_is_canonical(self, capsys, tmp_path):
        first = tmp_path / "a.cfir.json"
        second = tmp_path / "b.cfir.json"
        run(capsys, "export", PAPER, "--format", "cfir", "-o", str(first))
        run(capsys, "export", str(first), "--format", "cfir", "-o", str(second))
        assert first.read_bytes() == second.read_bytes()


class TestAudit:
    def test_paper_allow_m_passes(self, capsys):
        code, out, _ = run(capsys, "audit", PAPER, "--policy", ALLOW_M)
        assert code == 0
        assert "AUDIT PASS" in out

    def test_leak_forbidden_violation_names_pi5(self, capsys):
        code, out, _ = run(capsys, "audit", LEAK, "--policy", FORBID_VAL)
        assert code == 1
        assert "AUDIT VIOLATION" in out
        assert "pi5" in out
        assert "val_slice" in out

    def test_malformed_policy_exits_2(self, capsys, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text("{")
        code, _, err = run(capsys, "audit", PAPER, "--policy", str(f))
        assert code == 2
        assert "error" in err

    def test_unprovable_problem_exits_2(self, capsys, tmp_path):
        content = load_fixture("paper.llx").replace("goal e", "goal f1")
        f = tmp_path / "nope.llx"
        f.write_text(content)
        code, _, err = run(capsys, "audit", str(f), "--policy", ALLOW_M)
        assert code == 2
        assert "not proven" in err


class TestOracle:
    def test_paper_agrees(self, capsys):
        code, out, _ = run(capsys, "oracle", PAPER, "--max-depth", "6", "--mode", "all-paths")
        assert code == 0
        assert out.splitlines()[-1] == "AGREES"
        assert "engine: VERIFIED (2 paths)" in out

    def test_exists_mode_agrees(self, capsys):
        code, out, _ = run(capsys, "oracle", PAPER, "--max-depth", "8", "--mode", "exists")
        assert code == 0
        assert "AGREES" in out

    def test_no_m_fixture_agrees(self, capsys):
        code, out, _ = run(capsys, "oracle", PAPER_NO_M, "--max-depth", "8")
        assert code == 0
        assert "AGREES" in out

    def test_depth_too_small_is_undecided(self, capsys):
        code, out, _ = run(capsys, "oracle", PAPER, "--max-depth", "2", "--mode", "exists")
        assert code == 2
        assert "UNDECIDED" in out
