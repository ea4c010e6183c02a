"""Step loop of one replication.

Phases run in a fixed order every step; each one mutates the world and
moves money only through the ledger, which is checked at the end of the
step.
"""

from typing import Callable

from loguru import logger

from abiam.climate.phases import climate_phase, emissions_phase
from abiam.damages.phases import damage_phase
from abiam.exceptions import StockFlowViolation
from abiam.finance.phases import bank_resolution, credit_phase, service_loans
from abiam.kernel.clock import advance_clock
from abiam.kernel.ledger import check_stock_flow
from abiam.kernel.results import COLUMNS, observe
from abiam.kernel.world import StepStats, World, build_world
from abiam.macro.phases import (
    entry_exit_phase,
    expectations_phase,
    labor_phase,
    markets_phase,
    planning_phase,
    reset_accounts,
)
from abiam.policy.phases import policy_phase
from abiam.schemas import RunResult, ScenarioConfig

STOCK_FLOW_TOLERANCE = 1e-9


def finance_phase(world: World) -> None:
    service_loans(world)
    credit_phase(world)
    bank_resolution(world)


PHASES: tuple[tuple[str, Callable[[World], None]], ...] = (
    ("labor", labor_phase),
    ("planning", planning_phase),
    ("credit", finance_phase),
    ("markets", markets_phase),
    ("emissions", emissions_phase),
    ("climate", climate_phase),
    ("damages", damage_phase),
    ("policy", policy_phase),
    ("entry-exit", entry_exit_phase),
    ("expectations", expectations_phase),
)


def step_world(world: World) -> float:
    """Advance one step; returns the stock-flow residual of the step."""
    world.ledger.clear()
    before = world.ledger.balances()
    world.clock = advance_clock(world.clock)
    world.stats = StepStats()
    reset_accounts(world)
    for _, phase in PHASES:
        phase(world)
    residual = check_stock_flow(world.ledger, before, world.ledger.balances())
    tolerance = STOCK_FLOW_TOLERANCE * world.ledger.gross_volume()
    if residual > tolerance:
        logger.error(f"Stock-flow residual {residual:.3e} above {tolerance:.3e} at step {world.clock.step}")
        raise StockFlowViolation(world.clock.step, residual, tolerance)
    return residual


def run_scenario(config: ScenarioConfig, seed: int) -> RunResult:
    with logger.contextualize(run_id=f"{config.preset}-{seed}"):
        logger.info(f"Replication started, horizon {config.horizon} steps")
        world = build_world(config, seed)
        rows = []
        residuals = []
        for _ in range(config.horizon):
            residual = step_world(world)
            residuals.append(residual)
            row = observe(world, residual)
            rows.append(row)
            if world.clock.annual:
                logger.debug(
                    f"Year {world.months // 12}: gdp {row['gdp']:.4f}, unemployment {row['unemployment']:.4f}, "
                    f"temperature {row['temperature']:.4f}"
                )
        logger.info(f"Replication finished after {len(rows)} steps")
    return RunResult(
        preset=config.preset,
        seed=seed,
        series={column: [row[column] for row in rows] for column in COLUMNS},
        residuals=residuals,
        damage_log=world.damage_log,
        damage_schedule=world.damage_schedule,
        dispatch_trace=world.dispatch_trace,
    )
