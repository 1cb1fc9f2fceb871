#!/usr/bin/env python3
"""
Tests for the command line: exit codes, outputs and the matrix file format
"""

import json

import numpy as np
import pytest
import yaml

from szegolab.ensembles import instance_rng, uniform_spectrum
from szegolab.exceptions import InvalidParameterError, ShapeMismatchError
from szegolab.main import EXIT_USAGE, parse_and_dispatch
from szegolab.matrix_io import read_matrix, write_matrix


def test_help_exits_cleanly(capsys):
    assert parse_and_dispatch(["--help"]) == 0
    assert "coeffs" in capsys.readouterr().out


def test_unknown_subcommand_is_usage_error():
    assert parse_and_dispatch(["no-such-command"]) == EXIT_USAGE


def test_missing_config_file_is_usage_error(tmp_path):
    argv = ["szego", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]
    assert parse_and_dispatch(argv) == EXIT_USAGE


def test_missing_required_option_is_usage_error(tmp_path):
    assert parse_and_dispatch(["coeffs", "--out", str(tmp_path)]) == EXIT_USAGE


def test_coeffs_of_entropy_function(tmp_path):
    assert parse_and_dispatch(["coeffs", "--g", "eta:1", "--s", "1.0", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "coeffs.json").read_text())
    assert report["GA"]["1"]["value"] == pytest.approx(1.0 / 12.0, rel=1e-7)
    resolved = yaml.safe_load((tmp_path / "resolved_config.yaml").read_text())
    assert resolved["run"]["subcommand"] == "coeffs"
    assert resolved["coeffs"]["g"] == "eta:1"


def test_coeffs_with_symbol_and_jump(tmp_path):
    domains = tmp_path / "domains.yaml"
    domains.write_text(yaml.safe_dump({"sweep": {"w1_nodes": 128}}))
    argv = ["coeffs", "--g", "poly:2", "--s", "1.0", "--s1", "0.5", "--symbol", "const:1",
            "--domains", str(domains), "--out", str(tmp_path), "--threads", "1"]
    assert parse_and_dispatch(argv) == 0
    report = json.loads((tmp_path / "coeffs.json").read_text())
    assert report["GD"]["1,0.5"]["value"] == pytest.approx(-1.0 / (16.0 * np.pi ** 2), rel=1e-8)
    assert report["W0"]["value"] == pytest.approx(0.25, rel=1e-10)
    assert report["W1"]["value"] == pytest.approx(-1.0 / np.pi ** 2, rel=1e-5)


def test_constraint_violation_writes_error_report(tmp_path):
    assert parse_and_dispatch(["coeffs", "--g", "nope", "--s", "1.0", "--out", str(tmp_path)]) == 1
    error = json.loads((tmp_path / "error.json").read_text())
    assert error["error"] == "InvalidParameterError"
    assert error["exit_code"] == 1


def test_invalid_config_values_are_constraint_errors(tmp_path):
    config = tmp_path / "bad.yaml"
    config.write_text(yaml.safe_dump({"alphas": [8, 4]}))
    assert parse_and_dispatch(["szego", "--config", str(config), "--out", str(tmp_path)]) == 1
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "ConstraintError"


def test_bound_sweep_outputs(tmp_path):
    config = tmp_path / "small.yaml"
    config.write_text(yaml.safe_dump({"sweep": {"dims": [4, 6]}}))
    argv = ["bound-sweep", "--theorem", "bks", "--trials", "6", "--config", str(config),
            "--out", str(tmp_path), "--seed", "7", "--threads", "2"]
    assert parse_and_dispatch(argv) == 0
    rows = (tmp_path / "bound-sweep.csv").read_text().strip().splitlines()
    assert len(rows) == 7
    assert rows[0].split(",")[:2] == ["instance", "dimension"]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["theorem"] == "bks"
    assert summary["trials"] == 6
    resolved = yaml.safe_load((tmp_path / "resolved_config.yaml").read_text())
    assert resolved["run"]["seed"] == 7
    assert resolved["bound-sweep"]["dims"] == [4, 6]


def test_hs_apply_on_matrix_file(tmp_path):
    A = uniform_spectrum(6, -0.5, 0.5, instance_rng(9))
    path = tmp_path / "A.txt"
    write_matrix(path, A)
    argv = ["hs-apply", "--function", "gauss_bump", "--matrix", str(path), "--tol", "1e-7", "--n", "6",
            "--out", str(tmp_path), "--threads", "1"]
    assert parse_and_dispatch(argv) == 0
    result = read_matrix(tmp_path / "result.txt")
    lam, U = np.linalg.eigh(A)
    exact = (U * np.exp(-4.0 * lam ** 2)[None, :]) @ U.conj().T
    assert np.linalg.norm(result - exact, 2) <= 1e-6
    certificate = json.loads((tmp_path / "certificate.json").read_text())
    assert certificate["dimension"] == 6
    assert certificate["error_estimate"] <= 1e-7


def test_hs_apply_rejects_non_hermitian_matrix(tmp_path):
    path = tmp_path / "B.txt"
    write_matrix(path, np.array([[0.0, 1.0], [0.0, 0.0]]))
    argv = ["hs-apply", "--function", "gauss_bump", "--matrix", str(path), "--out", str(tmp_path)]
    assert parse_and_dispatch(argv) == 1
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "DomainError"


def test_qa_extension_profile(tmp_path):
    assert parse_and_dispatch(["qa-extension", "--function", "abs_pow:0.5", "--out", str(tmp_path)]) == 0
    header = (tmp_path / "qa-extension.csv").read_text().splitlines()[0]
    assert header == "x,y,abs_omega,majorant"


def test_matrix_file_format(tmp_path):
    path = tmp_path / "M.txt"
    path.write_text("# two by two\n2 2\n1+0i 0.5-2i\n0.5+2i -3\n")
    np.testing.assert_array_equal(read_matrix(path), np.array([[1.0, 0.5 - 2j], [0.5 + 2j, -3.0]]))
    path.write_text("2 2\n1 2 3\n")
    with pytest.raises(ShapeMismatchError):
        read_matrix(path)
    path.write_text("2 2\n1 2 x 4\n")
    with pytest.raises(InvalidParameterError):
        read_matrix(path)


def test_tolerance_override_reaches_quadrature(tmp_path):
    A = uniform_spectrum(4, -0.5, 0.5, instance_rng(3))
    path = tmp_path / "A.txt"
    write_matrix(path, A)
    config = tmp_path / "tol.yaml"
    config.write_text(yaml.safe_dump({"run": {"tolerance_overrides": {"target_tolerance": 1e-5}}}))
    argv = ["hs-apply", "--function", "gauss_bump", "--matrix", str(path), "--n", "6", "--config", str(config),
            "--out", str(tmp_path), "--threads", "1"]
    assert parse_and_dispatch(argv) == 0
    assert json.loads((tmp_path / "certificate.json").read_text())["target_tolerance"] == 1e-5
    resolved = yaml.safe_load((tmp_path / "resolved_config.yaml").read_text())
    assert resolved["run"]["tolerance_overrides"] == {"target_tolerance": 1e-5}
    assert resolved["hs-apply"]["target_tolerance"] == 1e-5


def test_command_line_tolerance_wins_over_override(tmp_path):
    A = uniform_spectrum(4, -0.5, 0.5, instance_rng(3))
    path = tmp_path / "A.txt"
    write_matrix(path, A)
    config = tmp_path / "tol.yaml"
    config.write_text(yaml.safe_dump({"run": {"tolerance_overrides": {"target_tolerance": 1e-5}}}))
    argv = ["hs-apply", "--function", "gauss_bump", "--matrix", str(path), "--n", "6", "--tol", "1e-7",
            "--config", str(config), "--out", str(tmp_path), "--threads", "1"]
    assert parse_and_dispatch(argv) == 0
    assert json.loads((tmp_path / "certificate.json").read_text())["target_tolerance"] == 1e-7


def test_tolerance_overrides_reach_bound_sweep(tmp_path):
    config = tmp_path / "tol.yaml"
    config.write_text(yaml.safe_dump({
        "run": {"tolerance_overrides": {"inequality_slack": 1e-6, "projection_tol": 1e-8}},
        "sweep": {"dims": [4]},
    }))
    argv = ["bound-sweep", "--theorem", "bks", "--trials", "2", "--config", str(config), "--out", str(tmp_path)]
    assert parse_and_dispatch(argv) == 0
    resolved = yaml.safe_load((tmp_path / "resolved_config.yaml").read_text())
    assert resolved["bound-sweep"]["inequality_slack"] == 1e-6
    assert resolved["bound-sweep"]["projection_tol"] == 1e-8


def test_unknown_tolerance_override_is_rejected(tmp_path):
    config = tmp_path / "tol.yaml"
    config.write_text(yaml.safe_dump({"run": {"tolerance_overrides": {"nyquist_margin": 0.1}}}))
    assert parse_and_dispatch(["szego", "--config", str(config), "--out", str(tmp_path)]) == 1
