from pathlib import Path

import click
from loguru import logger

from abiam import config as settings
from abiam.commands.batch import DEFAULT_PRESET, EMIT_FLAGS, resolve_config, run_batch
from abiam.commands.compare import EXPERIMENT as COMPARE_EXPERIMENT
from abiam.commands.compare import compare_damage_regimes, write_report
from abiam.commands.presets import POLICY_EXPERIMENTS, list_presets
from abiam.commands.runs import list_batches
from abiam.exceptions import AbiamError, ConfigError
from abiam.schemas import RunRequest

LOG_FORMAT = "Log: [{extra[run_id]}:{time} - {level} - {message}]"


def setup_logging(log_file: str | None = None, level: str | None = None) -> None:
    logger.remove()
    logger.configure(extra={"run_id": "cli"})
    logger.add(log_file or settings.LOG_FILE, format=LOG_FORMAT, level=level or settings.LOG_LEVEL, enqueue=True)


def _split(values: str) -> list[str]:
    return [v.strip() for v in values.split(",") if v.strip()]


@click.group()
def cli() -> None:
    """Agent-based integrated assessment runs from presets or scenario documents."""
    setup_logging()


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Scenario document (YAML).")
@click.option("--preset", help=f"Shipped preset; defaults to {DEFAULT_PRESET}.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override a key; repeatable.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--replications", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--horizon", type=click.IntRange(min=0), help="Steps to simulate.")
@click.option("--out", "output_dir", default=settings.OUTPUT_DIR, show_default=True)
@click.option("--emit", default="series-csv,summary-json", show_default=True, help=f"Any of {','.join(EMIT_FLAGS)}.")
@click.option("--plot", default="gdp,temperature,unemployment,emissions", show_default=True)
@click.option("--experiment", help=f"Policy experiment preset or {COMPARE_EXPERIMENT}.")
@click.option("--workers", type=click.IntRange(min=1), default=settings.WORKERS, show_default=True)
@click.option("--db", "database_url", default=settings.DATABASE_URL, help="Run registry URL.")
@click.pass_context
def run(
    ctx: click.Context,
    config_path: str | None,
    preset: str | None,
    overrides: tuple[str, ...],
    seed: int,
    replications: int,
    horizon: int | None,
    output_dir: str,
    emit: str,
    plot: str,
    experiment: str | None,
    workers: int,
    database_url: str,
) -> None:
    """Run replications and write series, summary and plot data."""
    try:
        if experiment is not None and experiment != COMPARE_EXPERIMENT:
            if experiment not in POLICY_EXPERIMENTS:
                raise ConfigError(f"Unknown experiment '{experiment}'")
            if preset is not None or config_path is not None:
                raise ConfigError("A policy experiment is a preset; drop --preset and --config")
            preset = experiment
        request = RunRequest(
            config_path=config_path,
            preset=preset,
            overrides=list(overrides),
            seed=seed,
            replications=replications,
            horizon=horizon,
            output_dir=output_dir,
            emit=_split(emit),
            plot=_split(plot),
            workers=workers,
        )
        if experiment == COMPARE_EXPERIMENT:
            config = resolve_config(request)
            seeds = [seed + i for i in range(replications)]
            report = compare_damage_regimes(config, config.horizon, seeds, workers)
            path = write_report(report, Path(output_dir))
            median = "n/a" if report.median_ratio is None else f"{report.median_ratio:.4f}"
            click.echo(
                f"{len(seeds)} seed(s): micro <= aggregate in {report.fraction_micro_below:.0%}, "
                f"median ratio {median} -> {path}"
            )
            return
        outcome = run_batch(request, database_url=database_url)
        click.echo(
            f"{outcome.config.preset}: {len(outcome.results)} replication(s), "
            f"final temperature {outcome.summary['final_temperature']:.4f}, "
            f"final gdp {outcome.summary['final_gdp']:.4f}"
        )
        for path in outcome.files:
            click.echo(f"  {path}")
    except AbiamError as e:
        logger.error(e.detail)
        click.echo(f"Error: {e.detail}", err=True)
        ctx.exit(e.exit_code)


@cli.command()
def presets() -> None:
    """List shipped presets."""
    for name, description in list_presets():
        click.echo(f"{name:<22}{description}")


@cli.command()
@click.option("--db", "database_url", default=settings.DATABASE_URL, help="Run registry URL.")
@click.option("--limit", type=click.IntRange(min=1), default=20, show_default=True)
@click.pass_context
def runs(ctx: click.Context, database_url: str, limit: int) -> None:
    """List registered batches, newest first."""
    if not database_url:
        click.echo("Error: no registry configured; set ABIAM_DATABASE_URL or pass --db", err=True)
        ctx.exit(2)
    for batch in list_batches(database_url, limit):
        seeds = ", ".join(str(r.seed) for r in batch.replication_runs)
        click.echo(
            f"{batch.id:>4}  {batch.created_at:%Y-%m-%d %H:%M}  {batch.preset:<20} "
            f"horizon {batch.horizon:<5} seeds [{seeds}]  {batch.output_dir}"
        )


if __name__ == "__main__":
    cli()
