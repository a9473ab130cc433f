"""Tests for the gbm-lab CLI."""

import json
import logging
import math

import pytest
from click.testing import CliRunner

from src.bodies import ball, box, halfspace
from src.bodies.serialization import body_to_spec
from src.checks.corpus import load_corpus, save_corpus
from src.gbm_lab import cli
from src.models.check_case import CheckCase


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def exact_corpus(tmp_path):
    """Closed-form cases only, with one expected violation of an over-strong exponent."""
    cases = [
        CheckCase(
            name="balls",
            first=body_to_spec(ball(2, 1.0)),
            second=body_to_spec(ball(2, 2.0)),
            checks=["dim-bm", "ehrhard", "ball-second-moment"],
        ),
        CheckCase(
            name="halfspaces",
            first=body_to_spec(halfspace((0.0, 1.0), 0.5)),
            second=body_to_spec(halfspace((0.0, 1.0), -0.3)),
            checks=["ehrhard"],
        ),
        CheckCase(
            name="tiny-boxes",
            first=body_to_spec(box(0.01, 0.01)),
            second=body_to_spec(box(0.02, 0.02)),
            delta=2.0,
            checks=["dim-bm"],
        ),
    ]
    path = tmp_path / "corpus.json"
    save_corpus(cases, path)
    return path


def test_cli_group_exists(runner):
    """Test that the CLI group is properly defined."""
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    assert "Gaussian Brunn-Minkowski numerical laboratory." in result.output
    assert "Exit codes:" in result.output
    for command in ("measure", "sigma", "pde", "slab", "check", "corpus", "schema", "config"):
        assert command in result.output


def test_measure_exact_ball(runner, body_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(cli, ["measure", "--body", str(body_file(ball(2, 1.0))), "--out", str(out)])
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert report["probability"]["value"] == pytest.approx(1.0 - math.exp(-0.5))
    assert report["probability"]["method"] == "exact-closed-form"
    assert report["probability"]["seed"] is None
    assert report["second_moment"]["quantity"] == "second-moment"


def test_measure_csv(runner, body_file, tmp_path):
    out = tmp_path / "report.csv"
    args = ["measure", "--body", str(body_file(box(1.0, 2.0))), "--no-moments"]
    result = runner.invoke(cli, args + ["--format", "csv", "--out", str(out)])
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "quantity,value,std_error,method,samples,seed"
    assert lines[1].startswith("probability,")
    assert len(lines) == 2


def test_measure_by_sampling(runner, body_file, tmp_path):
    out = tmp_path / "report.json"
    args = ["measure", "--body", str(body_file(box(1.0, 1.0))), "--force-sampling"]
    args += ["--seed", "7", "--samples", "20000", "--no-moments", "--out", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0
    estimate = json.loads(out.read_text())["probability"]
    assert estimate["method"] == "monte-carlo"
    assert estimate["seed"] == 7
    assert estimate["samples"] == 20000


@pytest.mark.parametrize(
    "document, args, code",
    [
        (None, [], 3),
        ('{"kind": "teapot", "dim": 2, "params": {}}', [], 4),
        ('{"kind": "ball", "dim": 2, "params": {"radius": 1.0}}', ["--n", "3"], 5),
        ('{"kind": "ball", "dim": 2, "params": {"radius": 0.0}}', [], 6),
        ('{"kind": "ball", "dim": 2, "params": {"radius": 1.0}}', ["--force-sampling"], 7),
    ],
)
def test_measure_exit_codes(runner, tmp_path, document, args, code):
    path = tmp_path / "body.json"
    if document is not None:
        path.write_text(document)
    result = runner.invoke(cli, ["measure", "--body", str(path)] + args)
    assert result.exit_code == code


def test_sample_counts_accept_float_notation(runner, body_file, tmp_path):
    square = str(body_file(box(1.0, 1.0)))
    result = runner.invoke(cli, ["measure", "--body", square, "--samples", "1e6", "--seed", "7"])
    assert result.exit_code == 0

    out = tmp_path / "report.json"
    args = ["measure", "--body", square, "--force-sampling", "--no-moments"]
    args += ["--seed", "7", "--samples", "2e4", "--out", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0
    assert json.loads(out.read_text())["probability"]["samples"] == 20000


@pytest.mark.parametrize("value", ["2.5", "-3", "1e400", "many"])
def test_sample_counts_must_be_whole_numbers(runner, body_file, value):
    args = ["measure", "--body", str(body_file(box(1.0, 1.0))), "--samples", value]
    result = runner.invoke(cli, args)
    assert result.exit_code == 2
    assert "--samples" in result.output


def test_missing_required_flag_is_a_usage_error(runner):
    result = runner.invoke(cli, ["measure"])
    assert result.exit_code == 2


def test_invalid_parameter_value_exits_with_two(runner):
    result = runner.invoke(cli, ["sigma", "--n", "2", "--nodes", "1000", "--r-max", "10"])
    assert result.exit_code == 2


def test_sigma_table_csv(runner, tmp_path):
    out = tmp_path / "sigma.csv"
    args = ["sigma", "--n", "2", "--nodes", "1000", "--format", "csv", "--out", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,psi,sigma,sigma_prime"
    assert len(lines) == 1001


def test_sigma_report(runner, tmp_path):
    out = tmp_path / "sigma.json"
    result = runner.invoke(cli, ["sigma", "--n", "3", "--nodes", "1000", "--out", str(out)])
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert report["certificate"]["passed"] is True
    assert report["certificate"]["margins"] == []


def test_pde_report(runner, body_file, tmp_path):
    out = tmp_path / "pde.json"
    args = ["pde", "--body", str(body_file(box(0.8, 0.8))), "--h", "0.1", "--out", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert report["theorem_bound"] == 0.5
    assert report["functional"]["total"] > 0.0


def test_pde_csv_needs_a_ladder(runner, body_file):
    args = ["pde", "--body", str(body_file(box(0.8, 0.8))), "--h", "0.1", "--format", "csv"]
    assert runner.invoke(cli, args).exit_code == 2


def test_run_file_supplies_missing_flags(runner, body_file, tmp_path):
    out = tmp_path / "report.json"
    run_file = tmp_path / "run.yaml"
    run_file.write_text(f"command: measure\nbody: {body_file(ball(3, 1.0))}\nout: {out}\n")
    result = runner.invoke(cli, ["--config", str(run_file), "measure"])
    assert result.exit_code == 0
    assert json.loads(out.read_text())["body"]["dim"] == 3


def test_broken_run_file_is_a_configuration_error(runner, tmp_path):
    run_file = tmp_path / "run.yaml"
    run_file.write_text("colour: red\n")
    assert runner.invoke(cli, ["--config", str(run_file), "config"]).exit_code == 7


def test_check_on_an_exact_corpus(runner, exact_corpus, tmp_path):
    results_path = tmp_path / "results.jsonl"
    summary_path = tmp_path / "summary.csv"
    args = ["check", "--corpus", str(exact_corpus), "--seed", "1"]
    args += ["--out", str(results_path), "--summary", str(summary_path)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0

    records = [json.loads(line) for line in results_path.read_text().splitlines()]
    assert len(records) == 5
    verdicts = {(r["case"], r["check"]): r["verdict"] for r in records}
    assert verdicts[("tiny-boxes", "dim-bm")] == "violated"
    assert verdicts[("balls", "dim-bm")] == "holds"
    assert verdicts[("halfspaces", "ehrhard")] == "holds"

    lines = summary_path.read_text().splitlines()
    assert lines[0] == "name,check,lhs,rhs,margin,sigmas,verdict"
    assert len(lines) == 6


def test_check_requires_a_seed(runner, exact_corpus):
    result = runner.invoke(cli, ["check", "--corpus", str(exact_corpus)])
    assert result.exit_code == 7


def test_check_rejects_unknown_check_names(runner, tmp_path):
    path = tmp_path / "corpus.json"
    path.write_text(
        json.dumps(
            [
                {
                    "name": "typo",
                    "first": {"kind": "ball", "dim": 2, "params": {"radius": 1.0}},
                    "checks": ["dim-bn"],
                }
            ]
        )
    )
    result = runner.invoke(cli, ["check", "--corpus", str(path), "--seed", "1"])
    assert result.exit_code == 4


def test_corpus_command(runner, tmp_path):
    out = tmp_path / "corpus.json"
    args = ["corpus", "--seed", "5", "--count", "12", "--dims", "2,3", "--out", str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0
    cases = load_corpus(out)
    assert len(cases) == 12
    assert {case.dim for case in cases} == {2, 3}


def test_corpus_command_rejects_bad_lists(runner, tmp_path):
    args = ["corpus", "--seed", "5", "--dims", "two", "--out", str(tmp_path / "c.json")]
    assert runner.invoke(cli, args).exit_code == 2


def test_schema_command(runner, tmp_path):
    out = tmp_path / "schemas"
    result = runner.invoke(cli, ["schema", "--out", str(out)])
    assert result.exit_code == 0
    files = sorted(p.name for p in out.iterdir())
    assert len(files) == 16
    assert "body.schema.json" in files
    assert json.loads((out / "check-case.schema.json").read_text())["title"] == "CheckCase"


def test_config_command(runner, monkeypatch):
    monkeypatch.setenv("GBM_SEED", "7")
    result = runner.invoke(cli, ["config"])
    assert result.exit_code == 0
    assert "Laboratory Configuration" in result.output
    assert "Seed: 7" in result.output


@pytest.fixture
def root_level():
    """Restore the root logger level that the cli group sets."""
    level = logging.getLogger().level
    yield
    logging.getLogger().setLevel(level)


@pytest.mark.parametrize(
    "env, level, code",
    [
        ({"GBM_LOG_LEVEL": "warning"}, logging.WARNING, 0),
        ({"GBM_DEBUG": "true"}, logging.DEBUG, 0),
        ({"GBM_LOG_LEVEL": "loud"}, logging.INFO, 7),
    ],
)
def test_log_level_comes_from_settings(runner, monkeypatch, root_level, env, level, code):
    for key, value in env.items():
        monkeypatch.setenv(key, value)
    result = runner.invoke(cli, ["config"])
    assert logging.getLogger().level == level
    assert result.exit_code == code
