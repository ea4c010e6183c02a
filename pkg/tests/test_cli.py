import json

import pytest
from click.testing import CliRunner
from loguru import logger

from abiam import config as settings
from abiam.main import cli

from conftest import SMALL_POPULATION

SMALL = [arg for item in SMALL_POPULATION for arg in ("--set", item)]


@pytest.fixture
def invoke(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "LOG_FILE", str(tmp_path / "abiam.log"))
    runner = CliRunner()

    def call(*args):
        return runner.invoke(cli, list(args))

    return call


def test_presets_are_listed(invoke):
    result = invoke("presets")
    assert result.exit_code == 0
    names = [line.split()[0] for line in result.output.splitlines()]
    assert "dsk" in names
    assert "grsw-fines-a" in names


def test_run_writes_series_and_summary(invoke, tmp_path):
    out = tmp_path / "out"
    result = invoke("run", "--preset", "dsk", "--horizon", "3", "--out", str(out), *SMALL)
    assert result.exit_code == 0, result.output
    assert result.output.startswith("dsk: 1 replication(s)")
    assert (out / "dsk-seed0.csv").exists()
    assert json.loads((out / "dsk-summary.json").read_text())["steps"] == 3
    logger.complete()
    assert "Batch 'dsk'" in (tmp_path / "abiam.log").read_text()


@pytest.mark.parametrize(
    "args",
    [
        ("--preset", "atlantis"),
        ("--preset", "dsk", "--experiment", "grsw-fines-a"),
        ("--experiment", "moon-shot"),
        ("--emit", "series-csv,pdf"),
        ("--set", "mystery=1"),
    ],
)
def test_bad_requests_exit_with_usage_code(invoke, tmp_path, args):
    result = invoke("run", "--horizon", "1", "--out", str(tmp_path), *args)
    assert result.exit_code == 2
    assert result.stderr.startswith("Error:")


def test_policy_experiment_runs_as_a_preset(invoke, tmp_path):
    result = invoke("run", "--experiment", "grsw-fines-a", "--horizon", "2", "--out", str(tmp_path), *SMALL)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "grsw-fines-a-seed0.csv").exists()


def test_config_document(invoke, tmp_path):
    document = tmp_path / "scenario.yaml"
    document.write_text(
        "preset: grsw\nhorizon: 2\npopulation:\n  households: 40\n  consumer_firms: 10\n  capital_firms: 4\n"
    )
    result = invoke("run", "--config", str(document), "--out", str(tmp_path), "--emit", "summary-json")
    assert result.exit_code == 0, result.output
    summary = json.loads((tmp_path / "grsw-summary.json").read_text())
    assert summary["steps"] == 2


def test_damage_comparison_writes_a_report(invoke, tmp_path):
    result = invoke(
        "run",
        "--experiment",
        "compare-damage-regimes",
        "--horizon",
        "4",
        "--replications",
        "2",
        "--out",
        str(tmp_path),
        *SMALL,
    )
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "compare-damage-regimes.json").read_text())
    assert report["seeds"] == [0, 1]
    assert len(report["ratios"]) == 2


def test_registry_needs_a_database(invoke):
    result = invoke("runs")
    assert result.exit_code == 2
    assert "no registry" in result.stderr


def test_registry_lists_batches(invoke, tmp_path):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    run = invoke("run", "--horizon", "2", "--replications", "2", "--out", str(tmp_path), "--db", url, *SMALL)
    assert run.exit_code == 0, run.output
    result = invoke("runs", "--db", url)
    assert result.exit_code == 0
    assert "dsk" in result.output
    assert "seeds [0, 1]" in result.output
