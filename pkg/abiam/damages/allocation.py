"""Turning damage schedules into events on agents and applying them."""

from typing import Mapping, Sequence

import numpy as np

from abiam.exceptions import InvalidArgumentError
from abiam.kernel.ledger import split_exact
from abiam.kernel.rng import RngStream
from abiam.schemas import BetaParams, ConsumerFirm, DamageChannel, DamageEvent, Firm, Household

MIN_PRODUCTIVITY = 1.0 / 3.0


def draw_firm_shocks(
    firm_ids: Sequence[str],
    params: BetaParams,
    channel: str,
    rng: RngStream,
) -> list[DamageEvent]:
    """One Beta draw per firm, in id order.

    `channel` names a damage channel, or "mixed" to pick capital or labor
    productivity at random for each firm.
    """
    events = []
    for firm_id in sorted(firm_ids):
        if channel == "mixed":
            target_channel = DamageChannel.CAPITAL if rng.random() < 0.5 else DamageChannel.LABOR_PRODUCTIVITY
        else:
            target_channel = DamageChannel(channel)
        magnitude = 0.0 if params.degenerate else rng.beta(params.alpha, params.beta)
        events.append(DamageEvent(target=firm_id, channel=target_channel, magnitude=min(1.0, max(0.0, magnitude))))
    return events


def allocate_wealth_elastic(total: float, wealths: Sequence[float], elasticity: float) -> list[float]:
    """Split `total` damage in proportion to wealth ** elasticity.

    A negative elasticity puts more of the damage on poorer agents. All-zero
    wealth splits evenly.
    """
    w = np.asarray(wealths, dtype=float)
    if np.any(w < 0):
        raise InvalidArgumentError("Wealth must be non-negative")
    if len(w) == 0:
        return []
    if not np.any(w > 0):
        return split_exact(total, [1.0] * len(w))
    if elasticity == 0:
        weights = np.ones_like(w)
    elif elasticity < 0:
        weights = np.maximum(w, 1e-12 * w.max()) ** elasticity
    else:
        weights = w**elasticity
    return split_exact(total, weights.tolist())


def expected_hits(emissions: float, baseline: float, base_rate: float, acceleration: float) -> float:
    if baseline <= 0:
        raise InvalidArgumentError(f"Baseline emissions must be positive, got {baseline}")
    if emissions <= 0:
        return 0.0
    return base_rate * (emissions / baseline) ** acceleration


def disaster_hits(
    emissions: float,
    baseline: float,
    base_rate: float,
    acceleration: float,
    fraction: float,
    targets: Sequence[str],
    rng: RngStream,
) -> list[DamageEvent]:
    """Poisson number of disasters, each destroying `fraction` of a random firm's capital.

    The same firm may be hit more than once.
    """
    lam = expected_hits(emissions, baseline, base_rate, acceleration)
    count = rng.poisson(lam) if lam > 0 else 0
    if not targets:
        return []
    ordered = sorted(targets)
    return [
        DamageEvent(target=ordered[rng.integers(0, len(ordered))], channel=DamageChannel.CAPITAL, magnitude=fraction)
        for _ in range(count)
    ]


def mine_health_decay(
    productivity: float,
    pollution: float,
    tenure: int,
    decay: float,
    replacement_months: int = 360,
) -> tuple[float, int]:
    """(productivity, tenure) of a mine worker after one month of exposure.

    Exposure weighs more the longer the worker has been at the mine. A worker
    reaching `replacement_months` is replaced by a fresh one in the same job.
    """
    if tenure >= replacement_months:
        return 1.0, 0
    weight = tenure / replacement_months
    return max(MIN_PRODUCTIVITY, productivity - decay * max(0.0, pollution) * weight), tenure


def _compose(current: float, magnitude: float) -> float:
    return 1.0 - (1.0 - current) * (1.0 - magnitude)


def apply_damage(agents: Mapping[str, Firm | Household], events: Sequence[DamageEvent]) -> None:
    """Apply events in place; repeated hits compose multiplicatively."""
    for event in events:
        agent = agents.get(event.target)
        if agent is None:
            raise InvalidArgumentError(f"Damage event for unknown agent '{event.target}'")
        keep = 1.0 - event.magnitude
        match event.channel:
            case DamageChannel.CAPITAL:
                for holding in agent.capital:
                    holding.units *= keep
            case DamageChannel.LABOR_PRODUCTIVITY:
                if isinstance(agent, Household):
                    agent.labor_productivity = max(MIN_PRODUCTIVITY, agent.labor_productivity * keep)
                else:
                    agent.productivity_factor *= keep
            case DamageChannel.INVENTORY:
                agent.inventory *= keep
            case DamageChannel.ENERGY_EFFICIENCY:
                if not isinstance(agent, ConsumerFirm):
                    raise InvalidArgumentError(f"Agent '{event.target}' has no energy efficiency to damage")
                agent.energy_factor *= keep
            case DamageChannel.BUDGET:
                if not isinstance(agent, Household):
                    raise InvalidArgumentError(f"Agent '{event.target}' has no consumption budget")
                agent.budget_damage = _compose(agent.budget_damage, event.magnitude)
            case DamageChannel.OUTPUT:
                agent.output_damage = _compose(agent.output_damage, event.magnitude)
