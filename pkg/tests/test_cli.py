import csv
import json

import pytest
from click.testing import CliRunner

from wickfield.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_partition_stats(runner, tmp_path):
    out = tmp_path / "ps"
    result = runner.invoke(main, ["partition-stats", "--n-max", "4",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    with open(out / "partition_stats.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "lhs", "rhs", "ratio", "flag"]
    assert len(rows) == 5
    assert rows[1][1] == "3"
    assert rows[2][1] == "73"
    reports = json.loads((out / "partition_stats.json").read_text())
    assert all(r["flag"] for r in reports)
    assert all(r["manifest"] == "manifest.json" for r in reports)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "partition-stats"
    assert manifest["tool_version"]


def test_verify_bounds_default(runner, tmp_path):
    out = tmp_path / "vb"
    result = runner.invoke(main, ["verify-bounds", "--max-order", "1",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    reports = json.loads((out / "bound_reports.json").read_text())
    assert reports
    assert all(r["flag"] for r in reports)
    assert all(r["schema_version"] == 1 for r in reports)


def test_verify_bounds_corrupted_rhs_fails(runner, tmp_path):
    result = runner.invoke(main, ["verify-bounds", "--max-order", "1",
                                  "--rhs-scale", "1e-6",
                                  "--out", str(tmp_path / "vbf")])
    assert result.exit_code != 0


def test_verify_bounds_custom_config(runner, tmp_path):
    cfg = tmp_path / "field.json"
    cfg.write_text(json.dumps({
        "model": "spectral",
        "f1": {"name": "flat"},
        "f2": {"name": "flat"},
        "g": {"name": "band", "halfwidth": 0.25},
        "grid": 4096,
    }))
    result = runner.invoke(main, ["verify-bounds", "--max-order", "1",
                                  "--config", str(cfg),
                                  "--out", str(tmp_path / "vbc")])
    assert result.exit_code == 0, result.output


def test_verify_bounds_rerun_bit_identical(runner, tmp_path):
    for name in ("a", "b"):
        result = runner.invoke(main, ["verify-bounds", "--max-order", "1",
                                      "--out", str(tmp_path / name)])
        assert result.exit_code == 0
    assert (tmp_path / "a" / "bound_reports.json").read_bytes() == \
        (tmp_path / "b" / "bound_reports.json").read_bytes()


def test_example_gaussian(runner, tmp_path):
    out = tmp_path / "eg"
    result = runner.invoke(main, ["example-gaussian", "--out", str(out)])
    assert result.exit_code == 0, result.output
    record = json.loads((out / "gaussian_example.json").read_text())
    assert record["psd_check"] is True
    assert abs(record["l2_limit_estimate"] - 0.5) < 1e-3
    with open(out / "partial_sums.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["radius", "l1_partial_sum", "l2_partial_sum"]
    sums = [float(r[1]) for r in rows[1:]]
    assert sums == sorted(sums)


def test_dnls_demo(runner, tmp_path):
    cfg = tmp_path / "dnls.json"
    cfg.write_text(json.dumps({"length": 16, "n_samples": 300,
                               "couplings": [0.0, 0.05]}))
    out = tmp_path / "dd"
    result = runner.invoke(main, ["dnls-demo", "--config", str(cfg),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    sidecar = json.loads((out / "dnls_run.json").read_text())
    assert sidecar["config"]["length"] == 16
    assert "0.05" in sidecar["fitted_constants"]
    assert len(sidecar["run_hash"]) == 16
    with open(out / "duhamel_residuals.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "coupling", "residual", "noise_scale"]


def test_dnls_demo_rerun_bit_identical(runner, tmp_path):
    cfg = tmp_path / "dnls.json"
    cfg.write_text(json.dumps({"length": 16, "n_samples": 200,
                               "couplings": [0.05]}))
    for name in ("a", "b"):
        result = runner.invoke(main, ["dnls-demo", "--config", str(cfg),
                                      "--out", str(tmp_path / name)])
        assert result.exit_code == 0
    for fname in ("duhamel_residuals.csv", "dnls_run.json"):
        assert (tmp_path / "a" / fname).read_bytes() == \
            (tmp_path / "b" / fname).read_bytes()


def test_env_var_override(runner, tmp_path):
    out = tmp_path / "env"
    result = runner.invoke(main, ["partition-stats", "--out", str(out)],
                           env={"WICKFIELD_PARTITION_STATS_N_MAX": "2"})
    assert result.exit_code == 0, result.output
    with open(out / "partition_stats.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3  # header + n = 1, 2
