import csv
import json

import pytest
from click.testing import CliRunner

from agewait.cli import main

TWO_POINT_MODEL = {"kind": "finite_iid",
                   "params": {"values": [0.0, 2.0],
                              "probabilities": [0.5, 0.5]}}


@pytest.fixture
def runner():
    return CliRunner()


def write_config(tmp_path, name="config.json", **extra):
    raw = {
        "model": TWO_POINT_MODEL,
        "penalty": {"kind": "linear"},
        "solver": {"M": 10.0},
    }
    raw.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


class TestSolve:
    def test_json_to_stdout(self, runner, tmp_path):
        cfg = write_config(tmp_path)
        result = runner.invoke(main, ["solve", "--config", str(cfg)])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["g_opt"] == pytest.approx(2 * 2**0.5 - 1, abs=1e-6)
        assert payload["policy"]["kind"] == "water_filling"
        # finite support: the table lists one row per state
        assert [row[0] for row in payload["table"]] == [0.0, 2.0]

    def test_json_to_file(self, runner, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "result.json"
        result = runner.invoke(main, ["solve", "--config", str(cfg),
                                      "--out", str(out)])
        assert result.exit_code == 0
        assert json.loads(out.read_text())["g_opt"] > 0

    def test_bad_config_exits_1(self, runner, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"penalty": {"kind": "linear"}}))
        result = runner.invoke(main, ["solve", "--config", str(cfg)])
        assert result.exit_code == 1
        assert "config error" in result.output


class TestSweep:
    def test_writes_csv(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"variable": "inv_f_max", "values": [1.1, 1.5]})
        out = tmp_path / "rows.csv"
        result = runner.invoke(main, ["sweep", "--config", str(cfg),
                                      "--out", str(out)])
        assert result.exit_code == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 2 * 4
        assert rows[0][0] == "value"

    def test_plot_renders_png(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"variable": "inv_f_max", "values": [1.1, 1.5]})
        out = tmp_path / "rows.csv"
        result = runner.invoke(main, ["sweep", "--config", str(cfg),
                                      "--out", str(out), "--plot"])
        assert result.exit_code == 0
        png = out.with_suffix(".png")
        assert png.exists()
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_all_rows_failing_exits_2(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            model={"kind": "finite_markov", "params": {"p": 0.7}},
            policies=["minimum_wait"],
            sweep={"variable": "rho", "values": [0.4, 0.8]})
        out = tmp_path / "rows.csv"
        result = runner.invoke(main, ["sweep", "--config", str(cfg),
                                      "--out", str(out)])
        assert result.exit_code == 2
        assert out.exists()

    def test_output_dir_env(self, runner, tmp_path, monkeypatch):
        base = tmp_path / "outputs"
        monkeypatch.setenv("AGEWAIT_OUTPUT_DIR", str(base))
        cfg = write_config(
            tmp_path, output="rows.csv",
            sweep={"variable": "inv_f_max", "values": [1.5]})
        result = runner.invoke(main, ["sweep", "--config", str(cfg)])
        assert result.exit_code == 0
        assert (base / "rows.csv").exists()

    def test_seed_override_changes_simulation(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"variable": "inv_f_max", "values": [1.5]},
            simulation={"n_stages": 100, "replications": 3, "seed": 1})
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        runner.invoke(main, ["sweep", "--config", str(cfg), "--out",
                             str(out_a), "--seed", "1"])
        runner.invoke(main, ["sweep", "--config", str(cfg), "--out",
                             str(out_b), "--seed", "2"])
        assert out_a.read_bytes() != out_b.read_bytes()


class TestZeroWaitCheck:
    def test_not_optimal_case(self, runner, tmp_path):
        cfg = write_config(tmp_path)
        result = runner.invoke(main, ["zero-wait-check", "--config", str(cfg)])
        assert result.exit_code == 0
        assert "verdict: not_optimal" in result.output
        assert "second_moment_criterion" in result.output

    def test_optimal_case(self, runner, tmp_path):
        cfg = write_config(tmp_path,
                           model={"kind": "constant", "params": {"value": 1.0}})
        result = runner.invoke(main, ["zero-wait-check", "--config", str(cfg)])
        assert result.exit_code == 0
        assert "verdict: optimal" in result.output

    def test_infeasible_exits_2(self, runner, tmp_path):
        cfg = write_config(tmp_path,
                           model={"kind": "constant", "params": {"value": 1.0}},
                           solver={"M": 10.0, "f_max": 0.5})
        result = runner.invoke(main, ["zero-wait-check", "--config", str(cfg)])
        assert result.exit_code == 2


class TestSimulate:
    def test_exports_stage_csv(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            policies=["zero_wait"],
            simulation={"n_stages": 50, "replications": 2, "seed": 9})
        out = tmp_path / "path.csv"
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(out)])
        assert result.exit_code == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["i", "Y", "Z", "Q", "D"]
        assert len(rows) == 51

    def test_missing_simulation_block_exits_1(self, runner, tmp_path):
        cfg = write_config(tmp_path)
        result = runner.invoke(main, ["simulate", "--config", str(cfg),
                                      "--out", str(tmp_path / "p.csv")])
        assert result.exit_code == 1
