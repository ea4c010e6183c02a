"""Replications of one scenario and the files they leave behind."""

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import NamedTuple, Sequence

from loguru import logger

from abiam.commands.plotdata import emit_plotdata
from abiam.commands.runs import register_batch
from abiam.exceptions import ConfigError
from abiam.kernel.engine import run_scenario
from abiam.kernel.results import (
    read_series_csv,
    series_frame,
    summarize,
    write_records_csv,
    write_series_csv,
    write_summary,
)
from abiam.kernel.scenario import config_digest, load_config_file, load_preset
from abiam.schemas import RunRequest, RunResult, ScenarioConfig

EMIT_FLAGS = ("series-csv", "summary-json", "damage-log", "dispatch-trace", "plotdata")
DEFAULT_PRESET = "dsk"
DAMAGE_COLUMNS = ("step", "target", "channel", "magnitude")
DISPATCH_COLUMNS = ("step", "plant", "fuel", "production", "price")


class BatchOutcome(NamedTuple):
    config: ScenarioConfig
    results: list[RunResult]
    summary: dict
    files: list[Path]


def resolve_config(request: RunRequest) -> ScenarioConfig:
    """Scenario of a request: a document or a preset, overrides, then the horizon flag."""
    if request.config_path is not None and request.preset is not None:
        raise ConfigError("Give either a config document or a preset, not both")
    if request.config_path is not None:
        config = load_config_file(request.config_path, request.overrides)
    else:
        config = load_preset(request.preset or DEFAULT_PRESET, request.overrides)
    if request.horizon is not None:
        config = config.model_copy(update={"horizon": request.horizon})
    return config


def run_replications(config: ScenarioConfig, seeds: Sequence[int], workers: int = 1) -> list[RunResult]:
    """Results in seed order whatever the number of worker processes."""
    if workers <= 1 or len(seeds) <= 1:
        return [run_scenario(config, seed) for seed in seeds]
    with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
        return list(pool.map(run_scenario, [config] * len(seeds), seeds))


def _check_emit(emit: Sequence[str]) -> None:
    for flag in emit:
        if flag not in EMIT_FLAGS:
            raise ConfigError(f"Unknown emit flag '{flag}', expected one of {', '.join(EMIT_FLAGS)}")


def series_path(out_dir: Path, preset: str, seed: int) -> Path:
    return out_dir / f"{preset}-seed{seed}.csv"


def summary_path(out_dir: Path, preset: str) -> Path:
    return out_dir / f"{preset}-summary.json"


def write_outputs(results: Sequence[RunResult], config: ScenarioConfig, request: RunRequest) -> tuple[dict, list[Path]]:
    out_dir = Path(request.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"Output directory {out_dir} is not writable: {e.strerror}") from e

    files: list[Path] = []
    preset = config.preset
    for result in results:
        if "series-csv" in request.emit:
            files.append(write_series_csv(result, series_path(out_dir, preset, result.seed)))
        if "damage-log" in request.emit:
            path = out_dir / f"{preset}-seed{result.seed}-damage.csv"
            files.append(write_records_csv(result.damage_log, DAMAGE_COLUMNS, path))
        if "dispatch-trace" in request.emit:
            path = out_dir / f"{preset}-seed{result.seed}-dispatch.csv"
            files.append(write_records_csv(result.dispatch_trace, DISPATCH_COLUMNS, path))
        if "plotdata" in request.emit:
            plot_dir = out_dir / "plotdata" / f"{preset}-seed{result.seed}"
            files.extend(emit_plotdata(series_frame(result), request.plot, plot_dir, allow_empty=True))

    summary = summarize(results, config_digest(config))
    if "summary-json" in request.emit:
        files.append(write_summary(summary, summary_path(out_dir, preset)))
    return summary, files


def run_batch(request: RunRequest, config: ScenarioConfig | None = None, database_url: str = "") -> BatchOutcome:
    """Run `replications` seeds starting at `seed` and write the requested files."""
    _check_emit(request.emit)
    config = config or resolve_config(request)
    seeds = [request.seed + i for i in range(request.replications)]
    logger.info(
        f"Batch '{config.preset}' with seeds {seeds[0]}..{seeds[-1]}, horizon {config.horizon}, "
        f"{request.workers} worker(s)"
    )
    results = run_replications(config, seeds, request.workers)
    summary, files = write_outputs(results, config, request)
    if database_url:
        register_batch(database_url, config, request, results)
    logger.info(f"Batch '{config.preset}' finished, {len(files)} file(s) in {request.output_dir}")
    return BatchOutcome(config=config, results=results, summary=summary, files=files)


def summary_from_csv(paths: Sequence[Path], preset: str, digest: str) -> dict:
    """Rebuild the summary from series files already on disk."""
    results = []
    for path in paths:
        frame = read_series_csv(path)
        seed = int(path.stem.rsplit("seed", 1)[-1])
        results.append(
            RunResult(
                preset=preset,
                seed=seed,
                series={column: frame[column].tolist() for column in frame.columns},
                residuals=frame["stock_flow_residual"].tolist(),
            )
        )
    return summarize(results, digest)
