import csv
import json

import numpy as np
import pytest

from ovbgen.cli import main
from ovbgen.simulate import Dgp1Config, gen_dgp1


def _write_dgp1_csvs(tmp_path, n_trial=250, n_target=400, seed=11, site_col=False):
    trial, target, _ = gen_dgp1(Dgp1Config(n_trial=n_trial, n_target=n_target), seed)
    rng = np.random.default_rng(1)
    trial_path = tmp_path / "trial.csv"
    target_path = tmp_path / "target.csv"
    with open(trial_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [*trial.covariate_names, "a", "y"]
        if site_col:
            header.append("site")
        writer.writerow(header)
        for i in range(trial.n):
            row = [*trial.covariates[i], int(trial.treatment[i]), trial.outcome[i]]
            if site_col:
                row.append(["north", "south", "east"][int(rng.integers(3))])
            writer.writerow(row)
    with open(target_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = list(target.covariate_names)
        if site_col:
            header.append("site")
        writer.writerow(header)
        for i in range(target.n):
            row = list(target.covariates[i])
            if site_col:
                row.append(["north", "south", "east"][int(rng.integers(3))])
            writer.writerow(row)
    return trial_path, target_path


def _analyze(tmp_path, out, *extra):
    trial_path, target_path = _write_dgp1_csvs(tmp_path)
    return main([
        "analyze", "--trial", str(trial_path), "--target", str(target_path),
        "--outcome", "y", "--treatment", "a", "--boot", "150", "--seed", "4",
        "--out", str(tmp_path / out), *extra,
    ])


class TestAnalyze:
    def test_raw_params_oracle_product(self, tmp_path):
        code = _analyze(tmp_path, "run", "--gamma", "0.5", "--lambda", "0.25")
        assert code == 0
        report = json.loads((tmp_path / "run" / "report.json").read_text())
        assert report["bias_bound"] == pytest.approx(0.125)
        assert report["rv_sign_reversal"] > 0
        assert len(report["benchmark"]) == 5
        assert report["sigma_tau"]["mode"] == "upper-bound"

    def test_zero_gamma_full_equals_base(self, tmp_path):
        assert _analyze(tmp_path, "run", "--gamma", "0", "--lambda", "0.25") == 0
        report = json.loads((tmp_path / "run" / "report.json").read_text())
        est = report["estimate"]
        assert report["full_interval"] == [est["ci_lower"], est["ci_upper"]]
        assert report["envelope"] == [est["tau_x_hat"], est["tau_x_hat"]]

    def test_r2_mode(self, tmp_path):
        code = _analyze(tmp_path, "run", "--r2-tau", "0.1", "--r2-s", "0.1",
                        "--sigma-tau", "1.0")
        assert code == 0
        report = json.loads((tmp_path / "run" / "report.json").read_text())
        var_s = report["var_s"]
        r2_s_x = report["r2_s_x"]
        expected = 1.0 * (0.01 / (var_s * (1 - r2_s_x))) ** 0.5
        assert report["bias_bound"] == pytest.approx(expected, rel=1e-9)
        assert report["sigma_tau"]["mode"] == "user-supplied"

    def test_missing_outcome_flag(self, tmp_path, capsys):
        trial_path, target_path = _write_dgp1_csvs(tmp_path)
        code = main([
            "analyze", "--trial", str(trial_path), "--target", str(target_path),
            "--treatment", "a", "--gamma", "0.5", "--lambda", "0.25",
            "--out", str(tmp_path / "x"),
        ])
        assert code == 2
        assert "MissingColumn" in capsys.readouterr().err

    def test_both_modes_rejected(self, tmp_path, capsys):
        code = _analyze(tmp_path, "run", "--gamma", "1", "--lambda", "1",
                        "--r2-tau", "0.1", "--r2-s", "0.1")
        assert code == 2

    def test_rerun_byte_identical(self, tmp_path):
        _analyze(tmp_path, "run1", "--gamma", "0.5", "--lambda", "0.25")
        _analyze(tmp_path, "run2", "--gamma", "0.5", "--lambda", "0.25")
        a = (tmp_path / "run1" / "report.json").read_bytes()
        b = (tmp_path / "run2" / "report.json").read_bytes()
        assert a == b

    def test_sigma_grid_writes_envelope(self, tmp_path):
        code = _analyze(tmp_path, "run", "--r2-tau", "0.1", "--r2-s", "0.1",
                        "--sigma-tau", "0.5,1.0,1.5")
        assert code == 0
        rows = (tmp_path / "run" / "envelope.csv").read_text().splitlines()
        assert rows[0] == "r2_tau,r2_s,sigma_tau,bias_bound,envelope_lower,envelope_upper,full_lower,full_upper"
        assert len(rows) == 1 + 3

    def test_one_hot_expansion(self, tmp_path):
        trial_path, target_path = _write_dgp1_csvs(tmp_path, site_col=True)
        code = main([
            "analyze", "--trial", str(trial_path), "--target", str(target_path),
            "--outcome", "y", "--treatment", "a", "--one-hot", "site",
            "--gamma", "0.5", "--lambda", "0.25", "--boot", "150",
            "--out", str(tmp_path / "oh"),
        ])
        assert code == 0
        report = json.loads((tmp_path / "oh" / "report.json").read_text())
        covs = report["manifest"]["covariates"]
        assert "site=north" in covs and "site=south" in covs
        assert "site=east" not in covs  # first sorted level dropped

    def test_ipw_estimator(self, tmp_path):
        code = _analyze(tmp_path, "run", "--gamma", "0.5", "--lambda", "0.25",
                        "--estimator", "ipw")
        assert code == 0
        report = json.loads((tmp_path / "run" / "report.json").read_text())
        assert report["estimate"]["method"] == "ipw"

    def test_duplicate_covariate_is_numeric_failure(self, tmp_path, capsys):
        trial_path, target_path = _write_dgp1_csvs(tmp_path)
        # duplicate x1 under a second name in both files
        for path in (trial_path, target_path):
            rows = list(csv.reader(open(path)))
            rows[0].append("x1_copy")
            idx = rows[0].index("x1")
            for row in rows[1:]:
                row.append(row[idx])
            with open(path, "w", newline="") as fh:
                csv.writer(fh).writerows(rows)
        code = main([
            "analyze", "--trial", str(trial_path), "--target", str(target_path),
            "--outcome", "y", "--treatment", "a", "--gamma", "0.5",
            "--lambda", "0.25", "--boot", "150", "--out", str(tmp_path / "dup"),
        ])
        assert code == 3
        assert "RankDeficient" in capsys.readouterr().err

    def test_contour_emitted_on_request(self, tmp_path):
        code = _analyze(tmp_path, "run", "--gamma", "0.5", "--lambda", "0.25",
                        "--contour-resolution", "5")
        assert code == 0
        rows = (tmp_path / "run" / "contour.csv").read_text().splitlines()
        assert rows[0] == "r2_tau,r2_s,bound,reversal"
        assert len(rows) == 1 + 25


class TestSimulate:
    def _run(self, tmp_path, out, threads="1", seed="5"):
        return main([
            "simulate", "--dgp", "1", "--reps", "20", "--boot", "120",
            "--seed", seed, "--n-trial", "250", "--n-target", "400",
            "--threads", threads, "--out", str(tmp_path / out),
        ])

    def test_deterministic_across_runs_and_threads(self, tmp_path, capsys):
        assert self._run(tmp_path, "s1", threads="1") == 0
        assert self._run(tmp_path, "s2", threads="2") == 0
        assert "below the 100-rep" in capsys.readouterr().err
        a = (tmp_path / "s1" / "coverage.csv").read_bytes()
        b = (tmp_path / "s2" / "coverage.csv").read_bytes()
        assert a == b
        ma = (tmp_path / "s1" / "manifest.json").read_bytes()
        mb = (tmp_path / "s2" / "manifest.json").read_bytes()
        assert ma == mb

    def test_seed_changes_output(self, tmp_path):
        self._run(tmp_path, "s1", seed="5")
        self._run(tmp_path, "s3", seed="6")
        assert (tmp_path / "s1" / "coverage.csv").read_bytes() != \
            (tmp_path / "s3" / "coverage.csv").read_bytes()

    def test_long_format_schema(self, tmp_path):
        self._run(tmp_path, "s1")
        rows = (tmp_path / "s1" / "coverage.csv").read_text().splitlines()
        assert rows[0] == "gamma,metric,value"
        metrics = {line.split(",")[1] for line in rows[1:]}
        assert metrics == {"coverage_envelope", "coverage_full_ci"}
        manifest = json.loads((tmp_path / "s1" / "manifest.json").read_text())
        assert manifest["oracle"]["bias"] == pytest.approx(0.125)
        assert manifest["failures"] == 0

    def test_override_rejected_for_wrong_dgp(self, tmp_path, capsys):
        code = main([
            "simulate", "--dgp", "1", "--reps", "5", "--beta-base", "0.5",
            "--out", str(tmp_path / "bad"),
        ])
        assert code == 2
        assert "InvalidConfig" in capsys.readouterr().err


class TestBenchmarkCommand:
    def test_table_and_hide_report(self, tmp_path):
        trial_path, target_path = _write_dgp1_csvs(tmp_path)
        out = tmp_path / "bench"
        code = main([
            "benchmark", "--trial", str(trial_path), "--target", str(target_path),
            "--outcome", "y", "--treatment", "a", "--hide", "x1",
            "--out", str(out),
        ])
        assert code == 0
        rows = (out / "benchmark.csv").read_text().splitlines()
        assert rows[0] == "covariate,r2_s_z,r2_tau_z,product,exceeds_rv,rv_reference"
        assert len(rows) == 1 + 5
        hide = json.loads((out / "hide_report.json").read_text())
        assert hide["hidden_covariate"] == "x1"
        assert hide["bias_bound"] >= 0

    def test_single_covariate_exits_2(self, tmp_path, capsys):
        trial = tmp_path / "t.csv"
        target = tmp_path / "o.csv"
        trial.write_text("x,a,y\n0.1,0,1.0\n0.2,1,2.0\n0.3,1,1.5\n0.4,0,0.5\n")
        target.write_text("x\n0.5\n0.6\n")
        code = main([
            "benchmark", "--trial", str(trial), "--target", str(target),
            "--outcome", "y", "--treatment", "a", "--hide", "x",
            "--out", str(tmp_path / "b"),
        ])
        assert code == 2
        assert "SingleCovariate" in capsys.readouterr().err


class TestContourCommand:
    def test_resolution_two_gives_four_rows(self, tmp_path):
        code = main([
            "contour", "--sigma-tau", "1.0", "--var-s", "0.25", "--r2-s-x", "0",
            "--tau-x", "0.2", "--resolution", "2", "--out", str(tmp_path),
        ])
        assert code == 0
        rows = (tmp_path / "contour.csv").read_text().splitlines()
        assert len(rows) == 1 + 4
        assert rows[1] == "0,0,0,false"
        assert rows[4] == "1,1,2,true"

    def test_zero_sigma_all_zero(self, tmp_path):
        main(["contour", "--sigma-tau", "0", "--var-s", "0.25", "--r2-s-x", "0",
              "--tau-x", "0.5", "--resolution", "3", "--out", str(tmp_path)])
        rows = (tmp_path / "contour.csv").read_text().splitlines()[1:]
        assert all(line.split(",")[2] == "0" for line in rows)

    def test_deterministic(self, tmp_path):
        args = ["contour", "--sigma-tau", "1.3", "--var-s", "0.2",
                "--r2-s-x", "0.4", "--tau-x", "0.9", "--resolution", "31"]
        main([*args, "--out", str(tmp_path / "c1")])
        main([*args, "--out", str(tmp_path / "c2")])
        assert (tmp_path / "c1" / "contour.csv").read_bytes() == \
            (tmp_path / "c2" / "contour.csv").read_bytes()
