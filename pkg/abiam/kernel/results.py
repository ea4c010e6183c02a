"""Observables of a step and the files a run leaves behind."""

import json
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from abiam.kernel.world import World
from abiam.schemas import RunResult

SERIES_HEADER = "# abiam-series v1"
SUMMARY_FORMAT = "abiam-summary v1"
FLOAT_FORMAT = "%.17g"

# Column order is part of the file format; append only, and bump the header.
COLUMNS = (
    "step",
    "months",
    "gdp",
    "consumption",
    "investment",
    "emissions",
    "cumulative_emissions",
    "temperature",
    "concentration",
    "unemployment",
    "price_index",
    "wage",
    "bank_failures",
    "firm_exits",
    "energy_price",
    "energy_demand",
    "green_share",
    "gov_balance",
    "bond_stock",
    "base_rate",
    "households_wealth",
    "c_firms_cash",
    "k_firms_cash",
    "banks_equity",
    "damage_events",
    "mean_damage",
    "stock_flow_residual",
)
OBSERVABLES = COLUMNS[2:]


def observe(world: World, residual: float) -> dict[str, float]:
    stats = world.stats
    wages = list(world.market_wage.values())
    return {
        "step": float(world.clock.step),
        "months": float(world.months),
        "gdp": stats.output + stats.machines,
        "consumption": stats.consumption,
        "investment": stats.investment,
        "emissions": world.emissions.annual,
        "cumulative_emissions": world.emissions.cumulative,
        "temperature": world.climate.temperature,
        "concentration": world.climate.concentration,
        "unemployment": world.unemployment(),
        "price_index": world.price_index_history[-1],
        "wage": sum(wages) / len(wages) if wages else 0.0,
        "bank_failures": float(stats.bank_failures),
        "firm_exits": float(stats.firm_exits),
        "energy_price": world.energy_price,
        "energy_demand": stats.energy_demand,
        "green_share": stats.green_share,
        "gov_balance": world.government.cash,
        "bond_stock": world.government.bond_stock,
        "base_rate": world.central_bank.base_rate,
        "households_wealth": sum(h.cash for h in world.households),
        "c_firms_cash": sum(f.cash for f in world.c_firms),
        "k_firms_cash": sum(k.cash for k in world.k_firms),
        "banks_equity": sum(b.equity for b in world.banks),
        "damage_events": float(stats.damage_events),
        "mean_damage": world.mean_damage,
        "stock_flow_residual": residual,
    }


def series_frame(result: RunResult) -> pd.DataFrame:
    return pd.DataFrame({column: result.series.get(column, []) for column in COLUMNS}, columns=list(COLUMNS))


def write_series_csv(result: RunResult, path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"{SERIES_HEADER}\n")
        series_frame(result).to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_series_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, skiprows=1, dtype=float)


def write_records_csv(records: Sequence[dict], columns: Sequence[str], path: Path) -> Path:
    frame = pd.DataFrame(list(records), columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def _stats(values: Sequence[float]) -> dict[str, float]:
    if not values:
        return {"mean": 0.0, "std": 0.0}
    array = np.asarray(values, dtype=float)
    return {"mean": float(array.mean()), "std": float(array.std())}


def summarize(results: Sequence[RunResult], config_digest: str) -> dict:
    """Mean and spread over replications of final values and time means."""
    observables = {}
    for column in OBSERVABLES:
        paths = [r.series.get(column, []) for r in results]
        finals = [path[-1] for path in paths if path]
        time_means = [float(np.mean(path)) for path in paths if path]
        observables[column] = {"final": _stats(finals), "time_mean": _stats(time_means)}
    return {
        "format": SUMMARY_FORMAT,
        "preset": results[0].preset if results else "",
        "config_digest": config_digest,
        "seeds": [r.seed for r in results],
        "steps": max((r.steps for r in results), default=0),
        "crises": {
            "bank_failures": int(sum(sum(r.series.get("bank_failures", [])) for r in results)),
            "firm_exits": int(sum(sum(r.series.get("firm_exits", [])) for r in results)),
        },
        "final_temperature": observables["temperature"]["final"]["mean"],
        "final_gdp": observables["gdp"]["final"]["mean"],
        "observables": observables,
    }


def write_summary(summary: dict, path: Path) -> Path:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
