"""Turn the climate state into shocks on firms, households and mine workers."""

from typing import Sequence

from abiam.damages.allocation import (
    allocate_wealth_elastic,
    apply_damage,
    disaster_hits,
    draw_firm_shocks,
    expected_hits,
    mine_health_decay,
)
from abiam.damages.schedules import (
    LABOR_OPTIMUM,
    beta_damage_params,
    quadratic_damage,
    quadratic_multiplier,
    regional_damage,
    temperature_variability,
)
from abiam.kernel.world import World
from abiam.schemas import DamageChannel, DamageEvent

TINY = 1e-9


def _apply(world: World, events: Sequence[DamageEvent]) -> None:
    hits = [e for e in events if e.magnitude > 0]
    apply_damage(world.agents(), hits)
    step = world.clock.step
    for event in hits:
        world.damage_log.append(
            {"step": step, "target": event.target, "channel": event.channel.value, "magnitude": event.magnitude}
        )
    world.stats.damage_events += len(hits)


def _beta(world: World) -> None:
    climate = world.climate
    variability = temperature_variability(climate.temperature_history, int(world.p("variability_window")))
    params = beta_damage_params(
        climate.temperature,
        variability,
        world.p("damage_mu0"),
        world.p("damage_mu1"),
        world.p("damage_c0"),
        world.p("damage_c1"),
    )
    channel = world.variants.damage_channel
    targets = [f.id for f in world.active_c_firms]
    if channel != DamageChannel.ENERGY_EFFICIENCY.value:
        targets += [k.id for k in world.k_firms]
    _apply(world, draw_firm_shocks(targets, params, channel, world.streams["damages"]))
    world.mean_damage = params.mean


def _quadratic(world: World) -> None:
    """Aggregate schedule: every firm loses the same share of output up to noise."""
    rng = world.streams["damages"]
    kept = quadratic_multiplier(world.climate.temperature, world.p("zeta1"), world.p("zeta2"))
    noise = world.p("damage_noise")
    for firm in [*world.active_c_firms, *world.k_firms]:
        shock = rng.uniform(-noise, noise) if noise > 0 else 0.0
        firm.output_damage = 1.0 - min(1.0, max(TINY, kept * (1.0 + shock)))
    world.mean_damage = 1.0 - kept


def _wealth_elastic(world: World) -> None:
    households = world.households
    for household in households:
        household.budget_damage = 0.0
    damage = quadratic_damage(world.climate.temperature, world.p("zeta1"), world.p("zeta2"))
    total = damage * sum(max(0.0, h.permanent_income) for h in households)
    shares = allocate_wealth_elastic(total, [max(0.0, h.cash) for h in households], world.p("wealth_elasticity"))
    events = [
        DamageEvent(
            target=h.id,
            channel=DamageChannel.BUDGET,
            magnitude=min(1.0, share / h.permanent_income) if h.permanent_income > 0 else 0.0,
        )
        for h, share in zip(households, shares)
    ]
    _apply(world, events)
    world.mean_damage = damage


def _regional(world: World) -> None:
    climate = world.climate
    baselines = climate.regional_baselines
    temperatures = climate.regional_temperatures
    events = []
    labor_losses = []
    for region in range(world.config.regions):
        baseline = baselines[region] if region < len(baselines) else LABOR_OPTIMUM
        temperature = temperatures[region] if region < len(temperatures) else baseline + climate.temperature
        damage = regional_damage(
            temperature,
            baseline,
            world.p("labor_damage_kappa"),
            world.p("agri_damage"),
            world.p("disaster_loss"),
        )
        labor_losses.append(damage.labor)
        for firm in world.active_c_firms:
            if firm.region != region:
                continue
            lost = damage.labor
            if firm.sector == 0:
                lost = 1.0 - (1.0 - lost) * (1.0 - damage.agriculture)
            firm.output_damage = lost
            events.append(DamageEvent(target=firm.id, channel=DamageChannel.CAPITAL, magnitude=damage.disaster))
        for k in world.k_firms:
            if k.region == region:
                k.output_damage = damage.labor
    _apply(world, events)
    world.mean_damage = sum(labor_losses) / len(labor_losses) if labor_losses else 0.0


def _disasters(world: World) -> None:
    targets = [f.id for f in world.active_c_firms]
    emissions = world.emissions.annual
    baseline = world.p("baseline_emissions")
    base_rate, acceleration = world.p("disaster_base_rate"), world.p("disaster_acceleration")
    fraction = world.p("disaster_fraction")
    events = disaster_hits(emissions, baseline, base_rate, acceleration, fraction, targets, world.streams["damages"])
    _apply(world, events)
    expected = expected_hits(emissions, baseline, base_rate, acceleration)
    world.mean_damage = fraction * expected / len(targets) if targets else 0.0


def _mine_health(world: World) -> None:
    decay = world.p("health_decay")
    replacement = int(world.p("replacement_months"))
    households = {h.id: h for h in world.households}
    for mine in world.mines:
        pollution = world.pollution.stocks.get(mine.id, 0.0)
        for worker in mine.workers:
            household = households.get(worker)
            if household is None:
                continue
            for _ in range(world.clock.months_per_step):
                household.labor_productivity, household.tenure = mine_health_decay(
                    household.labor_productivity, pollution, household.tenure, decay, replacement
                )


def damage_phase(world: World) -> None:
    variant = world.variants.damage
    if variant == "disaster-count":
        _disasters(world)
        if world.mines:
            _mine_health(world)
    elif world.climate_stepped:
        if variant == "beta-stochastic":
            _beta(world)
        elif variant == "deterministic-quadratic":
            _quadratic(world)
        elif variant == "wealth-elastic":
            _wealth_elastic(world)
        elif variant == "regional-deterministic":
            _regional(world)
    if world.climate_stepped:
        world.damage_schedule.append(
            {"step": world.clock.step, "temperature": world.climate.temperature, "mean_damage": world.mean_damage}
        )
