import json

import pandas as pd
import pytest

from abiam.commands.batch import (
    EMIT_FLAGS,
    resolve_config,
    run_batch,
    series_path,
    summary_from_csv,
    summary_path,
)
from abiam.commands.compare import compare_damage_regimes, output_ratios, write_report
from abiam.commands.plotdata import MANIFEST, emit_plotdata
from abiam.commands.presets import MODEL_FAMILIES, POLICY_EXPERIMENTS, describe, list_presets
from abiam.commands.runs import list_batches
from abiam.exceptions import ConfigError, InvalidArgumentError, UnknownObservableError
from abiam.kernel.results import COLUMNS, SERIES_HEADER
from abiam.kernel.scenario import config_digest
from abiam.schemas import ComparisonReport, RunRequest

from conftest import SMALL_POPULATION


def request(tmp_path, **kwargs):
    kwargs.setdefault("preset", "dsk")
    kwargs.setdefault("horizon", 4)
    return RunRequest(overrides=list(SMALL_POPULATION), output_dir=str(tmp_path), **kwargs)


def test_batch_writes_every_requested_file(tmp_path):
    outcome = run_batch(request(tmp_path, emit=list(EMIT_FLAGS), plot=["gdp", "temperature"]))
    assert series_path(tmp_path, "dsk", 0) in outcome.files
    assert summary_path(tmp_path, "dsk") in outcome.files
    assert (tmp_path / "dsk-seed0-damage.csv").exists()
    assert (tmp_path / "dsk-seed0-dispatch.csv").exists()
    plot_dir = tmp_path / "plotdata" / "dsk-seed0"
    assert sorted(p.name for p in plot_dir.iterdir()) == ["gdp.dat", MANIFEST, "temperature.dat"]
    assert all(path.exists() for path in outcome.files)


def test_series_file_layout(tmp_path):
    run_batch(request(tmp_path))
    lines = series_path(tmp_path, "dsk", 0).read_text().splitlines()
    assert lines[0] == SERIES_HEADER
    assert lines[1].split(",") == list(COLUMNS)
    assert len(lines) == 2 + 4
    summary = json.loads(summary_path(tmp_path, "dsk").read_text())
    assert summary["seeds"] == [0]
    assert summary["steps"] == 4


def test_batches_are_byte_identical(tmp_path):
    run_batch(request(tmp_path / "a", seed=3))
    run_batch(request(tmp_path / "b", seed=3))
    for name in ("dsk-seed3.csv", "dsk-summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_replications_use_consecutive_seeds(tmp_path):
    outcome = run_batch(request(tmp_path, seed=10, replications=3))
    assert [r.seed for r in outcome.results] == [10, 11, 12]
    assert outcome.summary["seeds"] == [10, 11, 12]
    assert all(series_path(tmp_path, "dsk", seed).exists() for seed in (10, 11, 12))


def test_zero_horizon_writes_headers_only(tmp_path):
    outcome = run_batch(request(tmp_path, horizon=0, emit=["series-csv", "summary-json", "plotdata"]))
    lines = series_path(tmp_path, "dsk", 0).read_text().splitlines()
    assert len(lines) == 2
    assert outcome.summary["steps"] == 0
    assert outcome.summary["final_gdp"] == 0.0
    assert (tmp_path / "plotdata" / "dsk-seed0" / "gdp.dat").read_text() == "# step gdp\n"


def test_summary_can_be_rebuilt_from_the_series_files(tmp_path):
    outcome = run_batch(request(tmp_path, replications=2))
    digest = config_digest(outcome.config)
    paths = [series_path(tmp_path, "dsk", seed) for seed in (0, 1)]
    rebuilt = summary_from_csv(paths, "dsk", digest)
    assert rebuilt["seeds"] == [0, 1]
    assert rebuilt["steps"] == outcome.summary["steps"]
    for column, stats in outcome.summary["observables"].items():
        for kind in ("final", "time_mean"):
            assert rebuilt["observables"][column][kind]["mean"] == pytest.approx(stats[kind]["mean"], abs=1e-9)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"emit": ["series-csv", "pdf"]},
        {"preset": "no-such-preset"},
        {"overrides": ["mystery=1"]},
    ],
)
def test_batch_configuration_errors(tmp_path, kwargs):
    with pytest.raises(ConfigError):
        run_batch(RunRequest(output_dir=str(tmp_path), horizon=1, **kwargs))


def test_preset_and_document_are_exclusive(tmp_path):
    document = tmp_path / "scenario.yaml"
    document.write_text("preset: dsk\n")
    with pytest.raises(ConfigError):
        resolve_config(RunRequest(config_path=str(document), preset="dsk"))


def test_document_and_horizon_flag(tmp_path):
    document = tmp_path / "scenario.yaml"
    document.write_text("preset: grsw\nhorizon: 50\n")
    config = resolve_config(RunRequest(config_path=str(document), horizon=7))
    assert config.preset == "grsw"
    assert config.horizon == 7


def test_unwritable_output_directory(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(ConfigError):
        run_batch(request(blocker / "out", horizon=1))


@pytest.fixture
def frame():
    return pd.DataFrame({column: [float(i) for i in range(3)] for column in COLUMNS})


def test_plotdata_tables(tmp_path, frame):
    files = emit_plotdata(frame, ["gdp", "unemployment"], tmp_path)
    assert [f.name for f in files] == ["gdp.dat", "unemployment.dat", MANIFEST]
    assert (tmp_path / "gdp.dat").read_text().splitlines() == ["# step gdp", "0 0", "1 1", "2 2"]
    assert (tmp_path / MANIFEST).read_text() == "gdp.dat: step gdp\nunemployment.dat: step unemployment\n"


def test_plotdata_rejects_unknown_observables(tmp_path, frame):
    with pytest.raises(UnknownObservableError):
        emit_plotdata(frame, ["gdp", "happiness"], tmp_path)
    assert not (tmp_path / "gdp.dat").exists()


def test_plotdata_on_an_empty_series(tmp_path):
    empty = pd.DataFrame(columns=list(COLUMNS))
    with pytest.raises(InvalidArgumentError):
        emit_plotdata(empty, ["gdp"], tmp_path)
    files = emit_plotdata(empty, ["gdp"], tmp_path, allow_empty=True)
    assert files[0].read_text() == "# step gdp\n"


def test_without_damage_both_regimes_agree(small_config, tmp_path):
    config = small_config("dsk", horizon=8, overrides=["damage_mu1=0"])
    report = compare_damage_regimes(config, 8, [0, 1])
    assert report.zeta1 == 0.0
    assert report.ratios == pytest.approx([1.0, 1.0])
    assert report.median_ratio == pytest.approx(1.0)
    path = write_report(report, tmp_path)
    assert ComparisonReport.model_validate_json(path.read_text()) == report


def test_comparison_needs_beta_shocks(small_config):
    with pytest.raises(ConfigError):
        compare_damage_regimes(small_config("abmiam"), 4, [0])


def test_seeds_without_aggregate_output_have_no_ratio(tmp_path):
    ratios, median = output_ratios([2.0, 3.0, 1.0], [4.0, 0.0, 1.0])
    assert ratios == [0.5, None, 1.0]
    assert median == pytest.approx(0.75)
    assert output_ratios([2.0], [0.0]) == ([None], None)
    report = ComparisonReport(
        seeds=[0, 1],
        micro_final_output=[2.0, 3.0],
        aggregate_final_output=[4.0, 0.0],
        ratios=[0.5, None],
        micro_mean_shock=0.0,
        aggregate_mean_shock=0.0,
        zeta1=0.0,
        zeta2=2.0,
        fit_residual=0.0,
        fraction_micro_below=0.5,
        median_ratio=0.5,
    )
    assert json.loads(write_report(report, tmp_path).read_text())["ratios"] == [0.5, None]


def test_registry_keeps_batches_newest_first(tmp_path):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    run_batch(request(tmp_path / "first", replications=2), database_url=url)
    run_batch(request(tmp_path / "second", preset="grsw", horizon=2, emit=["summary-json"]), database_url=url)
    batches = list_batches(url)
    assert [b.preset for b in batches] == ["grsw", "dsk"]
    assert [r.seed for r in batches[1].replication_runs] == [0, 1]
    assert batches[1].replication_runs[0].series_path.endswith("dsk-seed0.csv")
    assert batches[0].replication_runs[0].series_path is None
    assert list_batches(url, limit=1)[0].preset == "grsw"


def test_preset_listing():
    names = [name for name, _ in list_presets()]
    assert set(MODEL_FAMILIES) | set(POLICY_EXPERIMENTS) == set(names)
    assert "base" not in names
    assert all(describe(name) for name in names)
