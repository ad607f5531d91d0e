import io
import json
import subprocess
import sys

import pytest

from gds import emit_gds, n_point_discrete, parse_gds, random_gds, singleton_gds
from gds.cli import main
from gds.numerics import Q


def write_dataset(tmp_path, name, X):
    p = tmp_path / name
    p.write_text(emit_gds(X))
    return str(p)


def feed_stdin(monkeypatch, text):
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0, out
    return json.loads(out)


class TestDconc:
    def test_exact_value_with_generated_inputs(self, capsys, monkeypatch):
        feed_stdin(monkeypatch, emit_gds(n_point_discrete(3)))
        payload = run_json(capsys, ["dconc", "--other", "singleton:1", "--exact"])
        assert payload["exact"] == "1/3"
        assert abs(payload["value"] - 1 / 3) < 1e-9

    def test_two_file_inputs(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(2))
        b = write_dataset(tmp_path, "b.json", singleton_gds([1]))
        payload = run_json(capsys, ["dconc", a, b])
        assert payload["exact"] == "1/2"

    def test_heuristic_reports_a_valid_upper_bound(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(3, 2, seed=1))
        b = write_dataset(tmp_path, "b.json", random_gds(3, 2, seed=2))
        exact = run_json(capsys, ["dconc", a, b])
        approx = run_json(capsys, ["dconc", "--heuristic", a, b])
        assert approx["value"] >= exact["value"] - 1e-12

    def test_bounds_bracket_the_value(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(3, 2, seed=3))
        b = write_dataset(tmp_path, "b.json", random_gds(2, 2, seed=4))
        exact = run_json(capsys, ["dconc", a, b])
        bounds = run_json(capsys, ["dconc", "--bounds", a, b])
        assert bounds["lower"]["value"] - 1e-12 <= exact["value"]
        assert exact["value"] <= bounds["upper"]["value"] + 1e-12

    def test_budget_exit_code(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(3, 3, seed=5))
        b = write_dataset(tmp_path, "b.json", random_gds(3, 3, seed=6))
        code = main(["dconc", "--budget", "4", a, b])
        err = capsys.readouterr().err
        assert code == 3
        assert err.startswith("gds: budget:")

    def test_budget_fallback_with_heuristic(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(3, 3, seed=5))
        b = write_dataset(tmp_path, "b.json", random_gds(3, 3, seed=6))
        payload = run_json(
            capsys, ["dconc", "--exact", "--heuristic", "--budget", "4", a, b]
        )
        assert "note" in payload
        assert payload["value"] >= 0


class TestBox:
    def test_exact_payload_includes_cells(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(2, 2, seed=7))
        b = write_dataset(tmp_path, "b.json", random_gds(2, 2, seed=8))
        payload = run_json(capsys, ["box", a, b])
        assert isinstance(payload["cells"], list)
        for cell in payload["cells"]:
            assert len(cell) == 2

    def test_mm_variant(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(2, 2, seed=9))
        b = write_dataset(tmp_path, "b.json", random_gds(2, 2, seed=10))
        mm = run_json(capsys, ["box", "--mm", a, b])
        full = run_json(capsys, ["box", a, b])
        assert mm["value"] <= full["value"] + 1e-12

    def test_cell_budget_flag_and_env(self, capsys, tmp_path, monkeypatch):
        a = write_dataset(tmp_path, "a.json", random_gds(5, 1, seed=11))
        b = write_dataset(tmp_path, "b.json", random_gds(4, 1, seed=12))
        assert main(["box", a, b]) == 3
        capsys.readouterr()
        payload = run_json(capsys, ["box", "--cells", "20", a, b])
        assert payload["value"] is not None
        monkeypatch.setenv("GDS_BUDGET_CELLS", "20")
        payload = run_json(capsys, ["box", a, b])
        assert payload["value"] is not None


class TestDiameters:
    def test_od_single_kappa(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(4))
        payload = run_json(capsys, ["od", "--kappa", "1/8", a])
        assert payload["exact"] == "1"

    def test_od_grid_csv(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(2))
        code = main(["od", a])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("kappa")
        assert len(lines) >= 2

    def test_pd_requires_alpha(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(2))
        with pytest.raises(SystemExit):
            main(["pd", a])

    def test_pd_single_feature(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(2))
        payload = run_json(capsys, ["pd", "--alpha", "1", "--feature", "d0", a])
        assert payload["exact"] == "1"


class TestMeasureCommands:
    def test_prohorov_identical(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(3, 2, seed=13))
        payload = run_json(capsys, ["prohorov", a, a])
        assert payload["value"] == 0

    def test_prohorov_rejects_mismatched_metrics(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", random_gds(3, 2, seed=13))
        b = write_dataset(tmp_path, "b.json", random_gds(3, 2, seed=14))
        code = main(["prohorov", a, b])
        assert code == 2
        assert capsys.readouterr().err.startswith("gds:")

    def test_kyfan_between_features(self, capsys, tmp_path):
        # rows differ by one unit on two of the three points
        a = write_dataset(tmp_path, "a.json", n_point_discrete(3))
        payload = run_json(capsys, ["kyfan", "-f", "d0", "-g", "d1", a])
        assert payload["exact"] == "2/3"


class TestStructureCommands:
    def test_quotient_mapping_on_stderr(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(4))
        code = main(["quotient", "--by", "d0,d1", a])
        captured = capsys.readouterr()
        assert code == 0
        quotient = parse_gds(captured.out)
        assert quotient.n == 3
        assert json.loads(captured.err)["mapping"] == [0, 1, 2, 2]

    def test_quotient_unknown_label(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(2))
        assert main(["quotient", "--by", "zebra", a]) == 2

    def test_product_shapes(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(2))
        b = write_dataset(tmp_path, "b.json", n_point_discrete(3))
        code = main(["product", a, b])
        out = capsys.readouterr().out
        assert code == 0
        assert parse_gds(out).n == 6

    def test_check_domination_verdicts(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", singleton_gds([0]))
        b = write_dataset(tmp_path, "b.json", singleton_gds([1]))
        payload = run_json(capsys, ["check", "domination", a, b])
        assert payload["verdict"] is False
        payload = run_json(capsys, ["check", "domination", a, a])
        assert payload["verdict"] is True
        assert payload["witness"] == [0]


class TestGen:
    def test_singleton(self, capsys):
        payload = main(["gen", "singleton", "--values", "0,1/2"])
        out = capsys.readouterr().out
        assert payload == 0
        X = parse_gds(out)
        assert X.n == 1 and X.k == 2

    def test_discrete_to_file(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        assert main(["gen", "discrete", "--n", "3", "-o", str(target)]) == 0
        assert parse_gds(target.read_text()).n == 3

    def test_random_deterministic(self, capsys):
        assert main(["gen", "random", "--n", "3", "--k", "2", "--seed", "5"]) == 0
        first = capsys.readouterr().out
        assert main(["gen", "random", "--n", "3", "--k", "2", "--seed", "5"]) == 0
        assert capsys.readouterr().out == first

    def test_levy_member(self, capsys):
        assert main(["gen", "levy", "--family", "discrete", "--n", "4"]) == 0
        X = parse_gds(capsys.readouterr().out)
        assert X.n == 4

    def test_levy_table(self, capsys):
        assert main(["gen", "levy", "--family", "discrete", "--n", "3", "--table"]) == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0].split(",")[0] == "member"
        assert len(lines) == 4


class TestErrorsAndModes:
    def test_missing_file(self, capsys):
        assert main(["od", "--kappa", "0", "/nonexistent.json"]) == 2
        assert capsys.readouterr().err.startswith("gds:")

    def test_bad_json_on_stdin(self, capsys, monkeypatch):
        feed_stdin(monkeypatch, "{broken")
        assert main(["od", "--kappa", "0", "-"]) == 2

    def test_bad_mode_env(self, capsys, monkeypatch, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(2))
        monkeypatch.setenv("GDS_MODE", "quantum")
        assert main(["od", "--kappa", "0", a]) == 2

    def test_float_mode_flag(self, capsys, tmp_path):
        a = write_dataset(tmp_path, "a.json", n_point_discrete(3))
        payload = run_json(capsys, ["od", "--mode", "float", "--kappa", "0.1", a])
        assert "exact" not in payload
        assert abs(payload["value"] - 1.0) < 1e-9

    def test_verify_smoke(self, capsys):
        assert main(["verify", "--trials", "2", "--seed", "0"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("theorem suite:")
        assert "result: ok" in out


class TestShellPipeline:
    def test_piped_generation(self):
        proc = subprocess.run(
            "gds gen discrete --n 3 | gds dconc --other singleton:1 --exact",
            shell=True,
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert json.loads(proc.stdout)["exact"] == "1/3"
