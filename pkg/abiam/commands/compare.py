"""Stochastic micro shocks against an aggregate damage function with the same mean.

Arm A runs beta-distributed shocks on individual firms. The mean damage it
applied at each climate step, paired with the temperature of that step, is
pooled over seeds and fitted with the aggregate schedule 1 - 1/(1 + z1 T^z2).
Arm B reruns the same seeds with that schedule applied to every firm alike.
Only the damage stream differs between the arms.
"""

from pathlib import Path
from typing import Sequence

import numpy as np
from loguru import logger

from abiam.commands.batch import run_replications
from abiam.damages.schedules import fit_quadratic
from abiam.exceptions import ConfigError
from abiam.schemas import ComparisonReport, RunResult, ScenarioConfig

EXPERIMENT = "compare-damage-regimes"
SCHEDULE_TOLERANCE = 0.01


def _final_output(result: RunResult) -> float:
    gdp = result.series.get("gdp", [])
    return float(gdp[-1]) if gdp else 0.0


def _mean_shock(results: Sequence[RunResult]) -> float:
    shocks = [row["mean_damage"] for r in results for row in r.damage_schedule]
    return float(np.mean(shocks)) if shocks else 0.0


def output_ratios(micro: Sequence[float], aggregate: Sequence[float]) -> tuple[list[float | None], float | None]:
    """Per-seed micro over aggregate output and their median.

    A seed whose aggregate arm ends without output has no ratio and is left
    out of the median.
    """
    ratios = [x / y if y > 0 else None for x, y in zip(micro, aggregate)]
    defined = [r for r in ratios if r is not None]
    if len(defined) < len(ratios):
        logger.warning(f"Aggregate arm ended without output in {len(ratios) - len(defined)} seed(s); no ratio for them")
    return ratios, float(np.median(defined)) if defined else None


def aggregate_arm(config: ScenarioConfig, zeta1: float, zeta2: float) -> ScenarioConfig:
    variants = config.variants.model_copy(update={"damage": "deterministic-quadratic"})
    parameters = {**config.parameters, "zeta1": zeta1, "zeta2": zeta2, "damage_noise": 0.0}
    return config.model_copy(update={"variants": variants, "parameters": parameters})


def compare_damage_regimes(
    config: ScenarioConfig,
    horizon: int,
    seeds: Sequence[int],
    workers: int = 1,
) -> ComparisonReport:
    if config.variants.damage != "beta-stochastic":
        raise ConfigError(f"{EXPERIMENT} needs the beta-stochastic damage variant, got '{config.variants.damage}'")
    base = config.model_copy(update={"horizon": horizon})
    logger.info(f"Damage comparison on '{config.preset}': {len(seeds)} seed(s), horizon {horizon}")

    micro = run_replications(base, seeds, workers)
    schedule = [row for r in micro for row in r.damage_schedule]
    fit = fit_quadratic(
        [row["temperature"] for row in schedule],
        [row["mean_damage"] for row in schedule],
        tolerance=SCHEDULE_TOLERANCE,
    )
    logger.info(f"Aggregate schedule fitted: zeta1 {fit.zeta1:.6g}, zeta2 {fit.zeta2:.4f}, gap {fit.residual:.2e}")
    aggregate = run_replications(aggregate_arm(base, fit.zeta1, fit.zeta2), seeds, workers)

    a = [_final_output(r) for r in micro]
    b = [_final_output(r) for r in aggregate]
    ratios, median = output_ratios(a, b)
    return ComparisonReport(
        seeds=list(seeds),
        micro_final_output=a,
        aggregate_final_output=b,
        ratios=ratios,
        micro_mean_shock=_mean_shock(micro),
        aggregate_mean_shock=_mean_shock(aggregate),
        zeta1=fit.zeta1,
        zeta2=fit.zeta2,
        fit_residual=fit.residual,
        fraction_micro_below=sum(1 for x, y in zip(a, b) if x <= y) / len(seeds) if seeds else 0.0,
        median_ratio=median,
    )


def write_report(report: ComparisonReport, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{EXPERIMENT}.json"
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
