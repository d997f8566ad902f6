"""Command-line surface: flags, exit codes, outputs."""

import csv
import json
import os

import numpy as np
import pytest

from pafit.cli import main
from pafit.history import read_history_csv, write_history_csv
from pafit.simulate import simulate_lcd


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def last_json(out):
    # output is a one-line resolved config followed by a pretty JSON result
    decoder = json.JSONDecoder()
    idx = out.index("\n") + 1
    return decoder.decode(out[idx:])


class TestHelp:
    @pytest.mark.parametrize(
        "argv",
        [
            ["--help"],
            ["simulate", "--help"],
            ["fit", "--help"],
            ["limits", "--help"],
            ["experiment", "--help"],
            ["ingest", "--help"],
        ],
    )
    def test_help_exits_zero(self, capsys, argv):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        assert "--" in out

    def test_unknown_flag_exits_two(self, capsys):
        code, _, _ = run(capsys, "simulate", "--model", "bo", "--bogus", "1")
        assert code == 2

    def test_missing_model_param_exits_two(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--model", "bo", "--n", "10", "--seed", "1",
            "--out", "/tmp/unused.csv",
        )
        assert code == 2
        assert "needs --a" in err


class TestSimulate:
    def test_bo_writes_history(self, capsys, tmp_path):
        out = tmp_path / "h.csv"
        code, stdout, _ = run(
            capsys, "simulate", "--model", "bo", "--a", "1.0", "--n", "100",
            "--seed", "7", "--out", str(out),
        )
        assert code == 0
        history = read_history_csv(out)
        assert history.n == 100
        assert last_json(stdout)["n"] == 100
        assert last_json(stdout)["edges"] == 100

    def test_hpam_writes_labeled_history(self, capsys, tmp_path):
        out = tmp_path / "h.csv"
        code, _, _ = run(
            capsys, "simulate", "--model", "hpam", "--pi", "0.3,0.7",
            "--gamma", "1,0.5,0.5,1.5", "--n", "100", "--seed", "7",
            "--out", str(out),
        )
        assert code == 0
        history = read_history_csv(out)
        assert history.labeled and history.num_communities == 2

    def test_repeat_run_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--model", "lcd", "--n", "200", "--seed", "3"]
        assert run(capsys, *args, "--out", str(a))[0] == 0
        assert run(capsys, *args, "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_gamma_shape_checked(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "simulate", "--model", "hpam", "--pi", "0.3,0.7",
            "--gamma", "1,0.5,0.5", "--n", "10", "--seed", "1",
            "--out", str(tmp_path / "h.csv"),
        )
        assert code == 2
        assert "row-major" in err


class TestFit:
    def test_bo_fit_near_one_on_lcd_data(self, capsys, tmp_path):
        path = tmp_path / "h.csv"
        write_history_csv(simulate_lcd(1000, 11), path)
        code, out, _ = run(capsys, "fit", "--model", "bo", "--input", str(path))
        assert code == 0
        report = last_json(out)
        assert abs(report["a_hat"] - 1.0) < 0.35
        assert report["converged"] and not report["boundary"]
        assert report["stderr_plugin"] > 0

    def test_hpam_fit_requires_labels(self, capsys, tmp_path):
        path = tmp_path / "h.csv"
        write_history_csv(simulate_lcd(50, 1), path)
        code, _, err = run(capsys, "fit", "--model", "hpam", "--input", str(path))
        assert code == 3
        assert "labels" in err

    def test_narrow_domain_sets_boundary_flag(self, capsys, tmp_path):
        path = tmp_path / "h.csv"
        from pafit.simulate import simulate_bo

        write_history_csv(simulate_bo(500, 2.0, 5), path)
        code, out, _ = run(
            capsys, "fit", "--model", "bo", "--input", str(path),
            "--eps", "0.5", "--max", "0.6",
        )
        assert code == 0
        assert last_json(out)["boundary"] is True

    def test_missing_input_exits_three(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "fit", "--model", "bo", "--input", str(tmp_path / "nope.csv")
        )
        assert code == 3


class TestLimits:
    def test_bo_p1_closed_form(self, capsys):
        code, out, _ = run(capsys, "limits", "--model", "bo", "--a0", "1")
        assert code == 0
        report = last_json(out)
        assert report["p"][0] == pytest.approx(2 / 3, rel=1e-12)

    def test_hpam_uniform_gamma(self, capsys):
        code, out, _ = run(
            capsys, "limits", "--model", "hpam", "--pi", "0.25,0.75",
            "--gamma", "1,1,1,1",
        )
        assert code == 0
        report = last_json(out)
        np.testing.assert_allclose(report["p0"], [0.5, 1.5], atol=1e-10)

    def test_pure_computation_stable_across_runs(self, capsys):
        first = run(capsys, "limits", "--model", "bo", "--a0", "0.5")
        second = run(capsys, "limits", "--model", "bo", "--a0", "0.5")
        assert first == second

    def test_invalid_params_exit_two(self, capsys):
        code, _, _ = run(capsys, "limits", "--model", "bo", "--a0", "-1")
        assert code == 2
        code, _, _ = run(capsys, "limits", "--model", "hpam", "--pi", "0.3,0.7")
        assert code == 2


class TestExperiment:
    def test_tiny_config_runs(self, capsys, tmp_path):
        config = {
            "model": "bo",
            "true_params": {"a0": 1.0},
            "sample_sizes": [40],
            "replications": 3,
            "base_seed": 5,
            "output_path": str(tmp_path / "results"),
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        code, out, _ = run(capsys, "experiment", "--config", str(path))
        assert code == 0
        assert (tmp_path / "results" / "summary.csv").exists()
        assert (tmp_path / "results" / "raw_estimates.csv").exists()

    def test_schema_violation_names_field(self, capsys, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"model": "bo"}))
        code, _, err = run(capsys, "experiment", "--config", str(path))
        assert code == 2
        assert "true_params" in err or "sample_sizes" in err

    def test_shipped_table1_config_yields_twelve_rows(self, capsys, tmp_path):
        # the full Table-1 layout: 3 parameter values x 4 sample sizes
        with open(os.path.join(os.path.dirname(__file__), "..", "configs", "table1_bo.json")) as f:
            config = json.load(f)
        config["output_path"] = str(tmp_path / "t1")
        path = tmp_path / "table1.json"
        path.write_text(json.dumps(config))
        code, _, _ = run(capsys, "experiment", "--config", str(path))
        assert code == 0
        with open(tmp_path / "t1" / "summary.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 12


class TestIngest:
    def _fixture(self, tmp_path):
        rows = ["receiver,sender,timestamp"]
        rng = np.random.default_rng(2)
        ids = [f"addr{i}" for i in range(12)] + ["1DiceAbc"]
        for t in range(60):
            a, b = rng.choice(13, size=2)
            rows.append(f"{ids[a]},{ids[b]},{t}")
        path = tmp_path / "tx.csv"
        path.write_text("\n".join(rows) + "\n")
        return path

    def test_ingest_outputs(self, capsys, tmp_path):
        path = self._fixture(tmp_path)
        out = tmp_path / "h.csv"
        report_path = tmp_path / "report.json"
        code, stdout, _ = run(
            capsys, "ingest", "--input", str(path), "--n-limit", "50",
            "--top-fraction", "0.2", "--blocklist", "1Dice",
            "--out", str(out), "--report", str(report_path),
        )
        assert code == 0
        history = read_history_csv(out)
        assert history.labeled
        report = json.loads(report_path.read_text())
        assert set(report) == {"dropped_existing_pair", "dropped_blocked", "reordered"}
        assert report["dropped_blocked"] > 0

    def test_bad_top_fraction_exits_two(self, capsys, tmp_path):
        path = self._fixture(tmp_path)
        code, _, _ = run(
            capsys, "ingest", "--input", str(path), "--top-fraction", "1.5",
            "--out", str(tmp_path / "h.csv"), "--report", str(tmp_path / "r.json"),
        )
        assert code == 2

    def test_malformed_input_exits_three(self, capsys, tmp_path):
        path = tmp_path / "tx.csv"
        path.write_text("receiver,sender,timestamp\nonly,two\n")
        code, _, _ = run(
            capsys, "ingest", "--input", str(path),
            "--out", str(tmp_path / "h.csv"), "--report", str(tmp_path / "r.json"),
        )
        assert code == 3
