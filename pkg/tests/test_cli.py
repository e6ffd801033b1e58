"""End-to-end command-line behavior: formats, determinism, exit codes."""

import json

import pytest

import anarchy_lab as al
from anarchy_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGen:
    def test_generated_instance_is_valid(self, tmp_path, capsys):
        out = tmp_path / "g.json"
        code, _, _ = run(
            capsys, "gen", "--family", "mc_blind", "--n", "6", "--k", "3",
            "--eps", "0.01", "--out", str(out),
        )
        assert code == 0
        game = al.parse(out.read_text())
        assert al.check_vug(game).ok

    def test_sim_family_has_the_reference_optimum(self, tmp_path, capsys):
        out = tmp_path / "sim.json"
        code, _, _ = run(
            capsys, "gen", "--family", "sim", "--n", "10", "--k", "9",
            "--eps", "0.05", "--out", str(out),
        )
        assert code == 0
        game = al.parse(out.read_text())
        w, _ = al.optimal_welfare(game)
        assert w == pytest.approx(9.55, abs=1e-9)

    def test_missing_required_parameter_fails(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gen"])
        assert exc.value.code != 0

    def test_bad_parameters_exit_validation(self, capsys):
        code, _, err = run(capsys, "gen", "--family", "k_blind", "--n", "3", "--k", "3")
        assert code == 2
        assert "error" in err

    def test_stdout_output_is_deterministic(self, capsys):
        code1, out1, _ = run(capsys, "gen", "--family", "random", "--n", "4", "--seed", "5")
        code2, out2, _ = run(capsys, "gen", "--family", "random", "--n", "4", "--seed", "5")
        assert code1 == code2 == 0
        assert out1 == out2


class TestCheck:
    def test_valid_instance_exits_zero(self, tmp_path, capsys):
        path = tmp_path / "g.json"
        path.write_text(al.serialize(al.gen_k_blind(4, 2, 0.01, 0.01)))
        code, out, _ = run(capsys, "check", "--instance", str(path))
        assert code == 0
        assert "yes" in out

    def test_supermodular_table_exits_two_with_witness(self, tmp_path, capsys):
        doc = {
            "n": 2,
            "resources": [{"id": 0}, {"id": 1}],
            "table": [
                {"subset": [], "value": 0.0},
                {"subset": [0], "value": 1.0},
                {"subset": [1], "value": 1.0},
                {"subset": [0, 1], "value": 3.0},
            ],
            "action_sets": [[[0]], [[1]]],
            "utility": ["mc", "mc"],
            "compromise": ["normal", "normal"],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run(capsys, "check", "--instance", str(path))
        assert code == 2
        assert "witness" in out

    def test_equal_share_on_table_exits_two(self, tmp_path, capsys):
        doc = {
            "n": 1,
            "resources": [{"id": 0}],
            "table": [{"subset": [], "value": 0.0}, {"subset": [0], "value": 1.0}],
            "action_sets": [[[0]]],
            "utility": ["es"],
            "compromise": ["normal"],
        }
        path = tmp_path / "es.json"
        path.write_text(json.dumps(doc))
        code, _, err = run(capsys, "check", "--instance", str(path))
        assert code == 2
        assert "equal-share" in err


class TestAnalysis:
    @pytest.fixture()
    def instance(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(al.serialize(al.gen_mc_blind(5, 2, 0.01)))
        return str(path)

    def test_pne_lists_equilibria(self, instance, tmp_path, capsys):
        report = tmp_path / "pne.json"
        code, out, _ = run(capsys, "pne", "--instance", instance, "--json", str(report))
        assert code == 0
        doc = json.loads(report.read_text())
        assert doc["count"] >= 1
        assert "pure Nash equilibria" in out

    def test_poa_report(self, instance, tmp_path, capsys):
        report = tmp_path / "poa.json"
        code, out, _ = run(capsys, "poa", "--instance", instance, "--json", str(report))
        assert code == 0
        doc = json.loads(report.read_text())
        assert doc["ratio"] == pytest.approx(1.01 / 3.01, abs=1e-12)
        assert doc["bound_satisfied"] is True

    def test_size_cap_exit_code(self, instance, capsys):
        code, _, err = run(capsys, "poa", "--instance", instance, "--cap", "2")
        assert code == 3
        assert "cap" in err

    def test_bounds_sweep(self, capsys):
        code, out, _ = run(
            capsys, "bounds", "--family", "mc_blind", "--n", "5", "--k", "0..3",
            "--eps", "0.01",
        )
        assert code == 0
        assert "satisfied" in out
        assert "no" not in [cell.strip() for line in out.splitlines() for cell in line.split("  ")]

    def test_bounds_hub_family_all_rows_satisfied(self, capsys):
        code, out, _ = run(
            capsys, "bounds", "--family", "k_blind", "--n", "6", "--k", "0..4",
            "--eps", "0.001", "--delta", "0.001",
        )
        assert code == 0


class TestSearch:
    def test_search_writes_worst_instance(self, tmp_path, capsys):
        config = {
            "n": 3,
            "k": 1,
            "labels": ["blind"],
            "utility_class": "mc",
            "value_grid": [0.5, 1.0, 1.01],
            "budget": 80,
            "seed": 4,
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(config))
        out = tmp_path / "worst.json"
        rep = tmp_path / "rep.json"
        code, stdout, _ = run(
            capsys, "search", "--config", str(cfg), "--out", str(out), "--report", str(rep)
        )
        assert code == 0
        game = al.parse(out.read_text())
        doc = json.loads(rep.read_text())
        assert doc["ratio"] >= doc["theoretical_bound"] - 1e-9
        assert al.instance_poa(game).ratio == pytest.approx(doc["ratio"], abs=1e-12)


class TestLll:
    def test_csv_deterministic_across_runs(self, tmp_path, capsys):
        inst = tmp_path / "sim.json"
        inst.write_text(al.serialize(al.gen_sim_game(5, 4, 0.05)))
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        for out in (out1, out2):
            code, _, _ = run(
                capsys, "lll", "--instance", str(inst), "--temps", "0.001,1.0",
                "--steps", "1000", "--trials", "2", "--seed", "7", "--out", str(out),
            )
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_log_spaced_temperature_grid(self, tmp_path, capsys):
        inst = tmp_path / "sim.json"
        inst.write_text(al.serialize(al.gen_sim_game(5, 4, 0.05)))
        out = tmp_path / "sweep.csv"
        code, _, _ = run(
            capsys, "lll", "--instance", str(inst), "--temps", "0.001:10:5(log)",
            "--steps", "500", "--trials", "1", "--seed", "1", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        temps = [float(line.split(",")[0]) for line in lines[1:]]
        assert len(temps) == 5
        assert temps[0] == pytest.approx(0.001)
        assert temps[-1] == pytest.approx(10.0)
        ratios = [temps[i + 1] / temps[i] for i in range(4)]
        assert max(ratios) == pytest.approx(min(ratios), rel=1e-9)

    def test_worst_ne_start(self, tmp_path, capsys):
        inst = tmp_path / "sim.json"
        inst.write_text(al.serialize(al.gen_sim_game(5, 4, 0.05)))
        code, out, _ = run(
            capsys, "lll", "--instance", str(inst), "--temps", "0.0005",
            "--steps", "2000", "--trials", "1", "--seed", "2", "--init", "worst-ne",
        )
        assert code == 0
