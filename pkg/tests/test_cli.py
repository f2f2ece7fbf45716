"""Command-line interface: exit codes, report grammar, determinism."""

import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from torsionlab import formats

DATA = Path(__file__).resolve().parents[1] / "demos" / "data"


def run_cli(*args, env_extra=None, cwd=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "torsionlab", *args],
        capture_output=True, text=True, env=env, cwd=cwd)


def run_json(*args, **kwargs):
    proc = run_cli(*args, "--json", **kwargs)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout), proc


class TestHappyPaths:
    def test_torsion_of_circle_with_holonomy(self):
        report, _ = run_json("torsion", str(DATA / "circle_lambda_-1.json"))
        assert abs(report["torsion"] - math.log(2.0)) < 1e-12
        assert abs(report["torsion_via_laplacians"] - math.log(2.0)) < 1e-12
        assert report["passed"] is True

    def test_torsion_of_empty_interval_model(self):
        report, _ = run_json("torsion", str(DATA / "interval_tau1.json"))
        assert report["torsion"] == 0.0
        assert report["euler_characteristic"] == 0.0

    def test_torsion_of_plain_complex(self):
        report, _ = run_json("torsion", str(DATA / "acyclic_complex.json"))
        assert abs(report["torsion"] - math.log(2.0)) < 1e-12

    def test_hodge_reports_harmonic_dimensions(self):
        report, _ = run_json("hodge", str(DATA / "interval_tau2.json"))
        assert report["is_acyclic"] is False
        by_degree = {row["degree"]: row for row in report["degrees"]}
        assert by_degree[0]["harmonic_vn_dim"] == 1.0
        assert by_degree[1]["vn_dim"] == 0.0

    def test_hodge_degree_filter(self):
        report, _ = run_json("hodge", str(DATA / "interval_tau2.json"),
                             "--degree", "0")
        assert [row["degree"] for row in report["degrees"]] == [0]

    def test_glue_check(self):
        report, _ = run_json("glue-check", str(DATA / "glue_circle.json"))
        assert report["passed"] is True
        assert abs(report["t_comb"] - math.log(2.0)) < 1e-12
        assert abs(report["t_h"] - math.log(2.0)) < 1e-12

    def test_ses_check(self):
        report, _ = run_json("ses-check", str(DATA / "ses_split.json"))
        assert report["passed"] is True
        assert abs(report["lhs"] - math.log(6.0)) < 1e-12
        assert report["residual"] < 1e-12

    def test_duality_check(self):
        report, _ = run_json("duality-check", str(DATA / "circle_z3.json"))
        assert report["passed"] is True
        assert abs(report["torsion"] - math.log(3.0) / 3.0) < 1e-12
        assert report["sign"] == 1.0

    def test_product(self):
        report, _ = run_json("product", str(DATA / "acyclic_complex.json"),
                             str(DATA / "interval_tau2.json"))
        assert report["passed"] is True
        assert abs(report["torsion_product"] - math.log(2.0)) < 1e-12

    def test_lueck_expression(self):
        report, _ = run_json("lueck", "--op", "2 - t - t^-1",
                             "--levels", "2..64")
        assert [row["m"] for row in report["levels"]] == [2, 4, 8, 16, 32, 64]
        for row in report["levels"]:
            assert abs(row["log_det"] - 2.0 * math.log(row["m"]) / row["m"]) < 1e-9
        assert abs(report["fourier_log_det"]) < 1e-6
        assert report["norm_bound"] == 4.0

    def test_lueck_file_input(self):
        report, _ = run_json("lueck", str(DATA / "laurent_flagship.json"),
                             "--levels", "2,4,8")
        assert abs(report["fourier_log_det"]) < 1e-6

    def test_text_mode_prints_fifteen_digit_values(self):
        proc = run_cli("torsion", str(DATA / "circle_lambda_-1.json"))
        assert proc.returncode == 0
        assert "0.693147180559945" in proc.stdout

    def test_thread_cap_accepted(self):
        proc = run_cli("torsion", str(DATA / "interval_tau1.json"),
                       env_extra={"TORSIONLAB_THREADS": "1"})
        assert proc.returncode == 0


class TestDeterminismAndRoundTrip:
    def test_identical_jobs_identical_bytes(self):
        a = run_cli("torsion", str(DATA / "circle_lambda_-1.json"),
                    "--json", "--seed", "7")
        b = run_cli("torsion", str(DATA / "circle_lambda_-1.json"),
                    "--json", "--seed", "7")
        assert a.returncode == b.returncode == 0
        assert a.stdout == b.stdout
        assert json.loads(a.stdout)["job"]["seed"] == 7

    @pytest.mark.parametrize("args", [
        ("torsion", str(DATA / "circle_z3.json")),
        ("glue-check", str(DATA / "glue_circle.json")),
        ("ses-check", str(DATA / "ses_split.json")),
        ("lueck", "--op", "2 - t - t^-1", "--levels", "2..16"),
    ])
    def test_emitted_json_round_trips(self, args):
        proc = run_cli(*args, "--json")
        assert proc.returncode == 0, proc.stderr
        parsed = json.loads(proc.stdout)
        assert formats.canonical_json(parsed) == proc.stdout

    def test_quantize_is_idempotent(self):
        for value in (1.0 / 3.0, math.log(2.0), 1e-300, -0.0, 12345.6789,
                      2.0 ** 52 + 1.0):
            once = formats.quantize(value)
            assert formats.quantize(once) == once
            assert float(format(once, ".15g")) == once


class TestFailureModes:
    def test_missing_file_is_validation_error(self):
        proc = run_cli("torsion", "no_such_file.json")
        assert proc.returncode == 2
        assert "validation error" in proc.stderr
        assert "no_such_file.json" in proc.stderr

    def test_wrong_kind_is_validation_error(self):
        proc = run_cli("glue-check", str(DATA / "circle_z3.json"))
        assert proc.returncode == 2
        assert "gluing" in proc.stderr

    def test_broken_differential_names_location(self, tmp_path):
        bad = {
            "kind": "complex",
            "modules": [1, 1, 1],
            "differentials": [[[[1, 0]]], [[[1, 0]]]],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        proc = run_cli("torsion", str(path))
        assert proc.returncode == 2
        assert "compose" in proc.stderr or "degree" in proc.stderr

    def test_malformed_json_is_validation_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        proc = run_cli("torsion", str(path))
        assert proc.returncode == 2
        assert "JSON" in proc.stderr

    def test_bad_levels_flag(self):
        proc = run_cli("lueck", "--op", "1", "--levels", "three..4")
        assert proc.returncode == 2
        assert "--levels" in proc.stderr

    def test_lueck_needs_exactly_one_operator(self):
        assert run_cli("lueck").returncode == 2
        assert run_cli("lueck", str(DATA / "laurent_flagship.json"),
                       "--op", "1").returncode == 2

    def test_non_nested_levels_rejected(self):
        proc = run_cli("lueck", "--op", "2 - t - t^-1", "--levels", "2,3")
        assert proc.returncode == 2
        assert "nested" in proc.stderr

    def test_invalid_thread_cap(self):
        proc = run_cli("torsion", str(DATA / "interval_tau1.json"),
                       env_extra={"TORSIONLAB_THREADS": "zero"})
        assert proc.returncode == 2
        assert "TORSIONLAB_THREADS" in proc.stderr

    def test_degree_outside_window(self):
        proc = run_cli("hodge", str(DATA / "interval_tau2.json"),
                       "--degree", "5")
        assert proc.returncode == 2
        assert "--degree" in proc.stderr

    def test_nonconvergent_quadrature_is_numerical_failure(self):
        proc = run_cli("lueck", "--op", "4t^-2 + 4t^-1 + 9 + 4t + 4t^2",
                       "--levels", "2..8")
        assert proc.returncode == 1
        assert "numerical failure" in proc.stderr
        assert "converge" in proc.stderr
