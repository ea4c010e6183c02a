from loguru import logger

from abiam.climate.carbon import step_climate
from abiam.climate.emissions import EMITTING_SECTORS, account_emissions
from abiam.kernel.world import World


def emissions_phase(world: World) -> None:
    """Book the step's CO2 by sector and queue it for the next climate step."""
    scale = world.p("emission_scale")
    firms = world.active_c_firms
    raw = {
        "consumption": sum(f.emissions for f in firms),
        "capital": sum(k.emissions for k in world.k_firms),
        "energy": world.dispatch.emissions,
    }
    scaled = {sector: amount * scale for sector, amount in raw.items()}
    world.stats.sector_emissions = scaled
    sources = world.variants.emission_sources
    world.emissions = account_emissions(world.emissions, scaled, sources)
    world.pending_emissions += world.emissions.annual

    counted = EMITTING_SECTORS[sources]
    emitters: dict[str, float] = {}
    if "consumption" in counted:
        emitters.update({f.id: f.emissions * scale for f in firms})
    if "capital" in counted:
        emitters.update({k.id: k.emissions * scale for k in world.k_firms})
    if "energy" in counted and world.energy is not None:
        emitters[world.energy.id] = world.dispatch.emissions * scale
    world.stats.emitters = {e: amount for e, amount in emitters.items() if amount > 0}


def climate_phase(world: World) -> None:
    world.climate_stepped = False
    if not world.clock.fires_every(int(world.p("climate_period_months"))):
        return
    world.climate = step_climate(world.climate, world.pending_emissions)
    world.pending_emissions = 0.0
    world.climate_stepped = True
    logger.debug(
        f"Climate step at month {world.months}: concentration {world.climate.concentration:.4f}, "
        f"temperature {world.climate.temperature:.4f}"
    )
