import json
import math
import subprocess
import sys

import pytest

from treelab.checks import report_from_json
from treelab.cli import main
from treelab.trees import make_star, serialize_tree


def run_cli(*args):
    return main(list(args))


class TestKernelCommand:
    def test_distance_golden(self, tmp_path, capsys):
        assert run_cli("kernel", "--tree", "path:3", "--kind", "distance",
                       "--out", str(tmp_path)) == 0
        assert capsys.readouterr().out == "0,1,2\n1,0,1\n2,1,0\n"
        assert (tmp_path / "kernel_distance.csv").read_text() == "0,1,2\n1,0,1\n2,1,0\n"

    def test_exp_golden(self, tmp_path, capsys):
        assert run_cli("kernel", "--tree", "path:2", "--kind", "exp",
                       "--t", "0.5", "--out", str(tmp_path)) == 0
        assert capsys.readouterr().out == "1,0.5\n0.5,1\n"

    def test_gram_matches_exp(self, tmp_path, capsys):
        assert run_cli("kernel", "--tree", "path:3", "--kind", "gram",
                       "--t", "0.5", "--out", str(tmp_path)) == 0
        gram_rows = capsys.readouterr().out.strip().splitlines()
        assert run_cli("kernel", "--tree", "path:3", "--kind", "exp",
                       "--t", "0.5", "--out", str(tmp_path)) == 0
        exp_rows = capsys.readouterr().out.strip().splitlines()
        for g_row, e_row in zip(gram_rows, exp_rows):
            for g_val, e_val in zip(g_row.split(","), e_row.split(",")):
                assert float(g_val) == pytest.approx(float(e_val), abs=1e-12)

    def test_exp_requires_t(self, tmp_path, capsys):
        assert run_cli("kernel", "--tree", "path:2", "--kind", "exp",
                       "--out", str(tmp_path)) == 2


class TestOperatorCommand:
    def test_adjacency_golden(self, tmp_path, capsys):
        assert run_cli("operator", "--tree", "path:3", "--name", "S",
                       "--out", str(tmp_path)) == 0
        assert capsys.readouterr().out == "0,1,0\n1,0,1\n0,1,0\n"
        assert (tmp_path / "operator_S.csv").exists()

    def test_shift_and_adjoint(self, tmp_path, capsys):
        assert run_cli("operator", "--tree", "path:3", "--name", "P",
                       "--out", str(tmp_path)) == 0
        assert capsys.readouterr().out == "0,1,0\n0,0,1\n0,0,0\n"
        assert run_cli("operator", "--tree", "path:3", "--name", "Pstar",
                       "--out", str(tmp_path)) == 0
        assert capsys.readouterr().out == "0,0,0\n1,0,0\n0,1,0\n"

    def test_resolvent_at_one(self, tmp_path, capsys):
        assert run_cli("operator", "--tree", "path:2", "--name", "resolvent",
                       "--z", "1", "--out", str(tmp_path)) == 0
        assert capsys.readouterr().out == "1,1\n0,1\n"

    def test_deformation_needs_t(self, tmp_path):
        assert run_cli("operator", "--tree", "path:2", "--name", "T",
                       "--out", str(tmp_path)) == 2
        assert run_cli("operator", "--tree", "path:2", "--name", "Tinv",
                       "--t", "0.5", "--out", str(tmp_path)) == 0

    def test_remaining_names(self, tmp_path, capsys):
        for name in ("Q", "p0", "F", "Fstar", "b"):
            assert run_cli("operator", "--tree", "star:4", "--name", name,
                           "--out", str(tmp_path)) == 0
            assert (tmp_path / f"operator_{name}.csv").exists()


class TestCocycleCommand:
    def test_golden_output(self, capsys):
        assert run_cli("cocycle", "--tree", "path:3", "--x", "0", "--y", "2") == 0
        assert capsys.readouterr().out == "+ 0-1\n+ 1-2\n"

    def test_reverse_direction_flips_signs(self, capsys):
        assert run_cli("cocycle", "--tree", "path:3", "--x", "2", "--y", "0") == 0
        assert capsys.readouterr().out == "- 1-2\n- 0-1\n"

    def test_bad_vertex(self, capsys):
        assert run_cli("cocycle", "--tree", "path:3", "--x", "0", "--y", "9") == 2


class TestCurveCommand:
    def test_p2_closed_form(self, tmp_path, capsys):
        assert run_cli("curve", "--tree", "path:2", "--group", "auto", "--g", "1",
                       "--t", "0.9,0.99,0.999", "--out", str(tmp_path)) == 0
        rows = (tmp_path / "curve_1.csv").read_text().strip().splitlines()
        assert rows[0] == "t,dist_to_limit,dist_to_pi0"
        for row in rows[1:]:
            t, dist, _ = (float(v) for v in row.split(","))
            assert dist == pytest.approx(math.sqrt(2 * (1 - t)), abs=1e-10)

    def test_identity_element_curve_is_zero(self, tmp_path):
        assert run_cli("curve", "--tree", "path:2", "--group", "auto", "--g", "0",
                       "--t", "0.5,1.0", "--out", str(tmp_path)) == 0
        rows = (tmp_path / "curve_0.csv").read_text().strip().splitlines()[1:]
        for row in rows:
            _, dist_limit, dist_pi0 = (float(v) for v in row.split(","))
            assert dist_limit <= 1e-12 and dist_pi0 <= 1e-12

    def test_missing_g_index(self, tmp_path, capsys):
        assert run_cli("curve", "--tree", "path:2", "--group", "auto", "--g", "7",
                       "--out", str(tmp_path)) == 2
        assert "out of range" in capsys.readouterr().err


class TestCheckCommand:
    def test_small_suite_passes(self, tmp_path, capsys):
        code = run_cli("check", "--tree", "path:3", "--group", "auto",
                       "--t", "0,0.5,0.9", "--z", "0.5", "--out", str(tmp_path))
        assert code == 0
        assert "pass" in capsys.readouterr().out
        payload = report_from_json((tmp_path / "report.json").read_text())
        assert payload["aggregate_pass"] is True
        assert payload["schema"] == 1
        assert all(r["passed"] for r in payload["records"])

    def test_impossible_tolerance_fails_with_exit_one(self, tmp_path, capsys):
        code = run_cli("check", "--tree", "star:4", "--group", "auto",
                       "--t", "0.9", "--z", "0.5",
                       "--tol.unitarity=1e-18", "--out", str(tmp_path))
        assert code == 1
        out = capsys.readouterr().out
        assert "FAIL" in out
        payload = report_from_json((tmp_path / "report.json").read_text())
        assert payload["aggregate_pass"] is False

    def test_rejects_t_equal_one(self, tmp_path, capsys):
        assert run_cli("check", "--tree", "path:2", "--group", "auto",
                       "--t", "1.0", "--out", str(tmp_path)) == 2
        assert "open interval" in capsys.readouterr().err

    def test_auto_group_vertex_limit(self, tmp_path, capsys):
        assert run_cli("check", "--tree", "random:50,7", "--group", "auto",
                       "--out", str(tmp_path)) == 2
        assert "N <= 12" in capsys.readouterr().err

    def test_unknown_tolerance_name(self, tmp_path, capsys):
        assert run_cli("check", "--tree", "path:2", "--group", "auto",
                       "--tol.bogus=1e-9", "--out", str(tmp_path)) == 2
        assert "unknown tolerance" in capsys.readouterr().err

    def test_missing_tree_file(self, tmp_path, capsys):
        assert run_cli("check", "--tree", str(tmp_path / "nope.tree"),
                       "--out", str(tmp_path)) == 2

    def test_generator_string_with_bad_parameter(self, tmp_path, capsys):
        assert run_cli("check", "--tree", "path:0", "--out", str(tmp_path)) == 2
        assert "vertex count" in capsys.readouterr().err

    def test_tree_and_group_files(self, tmp_path):
        tree = make_star(4)
        tree_file = tmp_path / "star.tree"
        tree_file.write_text(serialize_tree(tree))
        group_file = tmp_path / "gens.txt"
        group_file.write_text("# leaf swaps\n0 2 1 3\n0 1 3 2\n")
        code = run_cli("check", "--tree", str(tree_file), "--group", str(group_file),
                       "--t", "0,0.5", "--z", "0.25", "--out", str(tmp_path))
        assert code == 0
        payload = report_from_json((tmp_path / "report.json").read_text())
        assert payload["config"]["group_order"] == 6

    def test_bad_group_file_line_numbered(self, tmp_path, capsys):
        tree_file = tmp_path / "p3.tree"
        tree_file.write_text("tree v=3\n0 1\n1 2\n")
        group_file = tmp_path / "gens.txt"
        group_file.write_text("2 1 0\n1 0 2\n")
        assert run_cli("check", "--tree", str(tree_file),
                       "--group", str(group_file), "--out", str(tmp_path)) == 2
        assert "line 2" in capsys.readouterr().err


class TestDeterminism:
    def test_reports_byte_identical_modulo_timings(self, tmp_path):
        for sub in ("a", "b"):
            code = run_cli("check", "--tree", "star:4", "--group", "auto",
                           "--t", "0,0.5,0.9", "--z", "0.5,0.3+0.4i",
                           "--seed", "7", "--out", str(tmp_path / sub))
            assert code == 0
        payloads = []
        for sub in ("a", "b"):
            payload = json.loads((tmp_path / sub / "report.json").read_text())
            payload.pop("timings")
            payloads.append(json.dumps(payload, indent=2))
        assert payloads[0] == payloads[1]


class TestReportCommand:
    def test_summarize_passing_report(self, tmp_path, capsys):
        run_cli("check", "--tree", "path:2", "--group", "auto",
                "--t", "0,0.5", "--out", str(tmp_path))
        capsys.readouterr()
        assert run_cli("report", str(tmp_path / "report.json")) == 0
        assert "pass" in capsys.readouterr().out

    def test_summarize_failing_report(self, tmp_path, capsys):
        run_cli("check", "--tree", "star:4", "--group", "auto", "--t", "0.9",
                "--tol.unitarity=1e-18", "--out", str(tmp_path))
        capsys.readouterr()
        assert run_cli("report", str(tmp_path / "report.json")) == 1

    def test_missing_report(self, tmp_path):
        assert run_cli("report", str(tmp_path / "none.json")) == 2


def test_module_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "treelab", "kernel", "--tree", "path:2",
         "--kind", "distance", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert result.stdout == "0,1\n1,0\n"


def test_help_exits_zero():
    assert run_cli("--help") == 0
