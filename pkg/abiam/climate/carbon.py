"""Carbon-cycle and temperature variants.

Every step function takes the state and the emissions of one climate step
(in carbon units) and returns a new state. None of them draws random numbers.
"""

import math

from abiam.exceptions import InvalidArgumentError
from abiam.schemas import CarbonCycleState

MIN_STOCK = 1e-9


def temp_log_concentration(stock: float, reference: float, omega: float) -> float:
    """Temperature anomaly from a log-concentration law; each doubling adds omega."""
    if stock <= 0 or reference <= 0:
        raise InvalidArgumentError(f"Stocks must be positive, got {stock} and {reference}")
    return omega * math.log2(stock / reference)


def step_two_box(state: CarbonCycleState, emissions: float) -> CarbonCycleState:
    """Atmosphere/ocean boxes with two feedback loops and lagged temperature.

    The natural source is s0 (C / C_pre - 1): it counts only the excess over
    the pre-industrial stock, which keeps that stock a rest state with no
    emissions. The ocean uptake rate falls as concentration rises.
    Temperature relaxes exactly towards F / feedback within each internal
    sub-step.
    """
    p = state.parameters
    pre = p["atmosphere_pre"]
    substeps = max(1, int(p.get("climate_substeps", 1)))
    h = 1.0 / substeps
    relax = 1.0 - math.exp(-h / p["temperature_timescale"])
    atmosphere, ocean, temperature = state.atmosphere, state.ocean, state.temperature
    for _ in range(substeps):
        x = atmosphere / pre
        natural = p["natural_source"] * (x - 1.0)
        rate = p["uptake_rate"] / (1.0 + p["uptake_saturation"] * (x - 1.0)) if x > 0 else 0.0
        uptake = max(0.0, rate) * (atmosphere - pre)
        atmosphere = max(MIN_STOCK, atmosphere + h * (emissions + natural - uptake))
        ocean += h * uptake
        forcing = p["forcing_2x"] * math.log2(atmosphere / pre)
        temperature += (forcing / p["climate_feedback"] - temperature) * relax
    return state.model_copy(
        update={
            "atmosphere": atmosphere,
            "ocean": ocean,
            "concentration": atmosphere,
            "temperature": temperature,
            "cumulative": state.cumulative + emissions,
        }
    )


def equilibrium_temperature(state: CarbonCycleState) -> float:
    p = state.parameters
    return p["forcing_2x"] * math.log2(state.atmosphere / p["atmosphere_pre"]) / p["climate_feedback"]


def step_tcre(state: CarbonCycleState, emissions: float) -> CarbonCycleState:
    return state.model_copy(
        update={
            "temperature": state.temperature + state.parameters["tcre"] * emissions,
            "cumulative": state.cumulative + emissions,
        }
    )


def step_carbon_stock_abmiam(
    permanent: float, transient: float, emissions: float, permanent_fraction: float, transient_decay: float
) -> tuple[float, float]:
    """Split new emissions into a permanent and a geometrically decaying box."""
    if not 0 <= permanent_fraction <= 1 or not 0 <= transient_decay <= 1:
        raise InvalidArgumentError("Carbon box fractions must lie in [0, 1]")
    return (
        permanent + permanent_fraction * emissions,
        transient_decay * transient + (1.0 - permanent_fraction) * emissions,
    )


def step_permanent_transient(state: CarbonCycleState, emissions: float) -> CarbonCycleState:
    p = state.parameters
    permanent, transient = step_carbon_stock_abmiam(
        state.permanent, state.transient, emissions, p["permanent_fraction"], p["transient_decay"]
    )
    stock = p["atmosphere_pre"] + permanent + transient
    return state.model_copy(
        update={
            "permanent": permanent,
            "transient": transient,
            "atmosphere": stock,
            "concentration": stock,
            "temperature": temp_log_concentration(max(stock, MIN_STOCK), p["atmosphere_pre"], p["climate_sensitivity"]),
            "cumulative": state.cumulative + emissions,
        }
    )


def step_three_eq(state: CarbonCycleState, emissions: float) -> CarbonCycleState:
    """Cumulative emissions, concentration, then temperature; regions shift together."""
    p = state.parameters
    pre = p["concentration_pre"]
    cumulative = state.cumulative + emissions
    concentration = (
        pre
        + p["kappa_cumulative"] * cumulative
        + p["kappa_annual"] * emissions
        - p["kappa_relax"] * (state.concentration - pre)
    )
    concentration = max(MIN_STOCK, concentration)
    temperature = state.temperature + p["psi_concentration"] * math.log(concentration / pre) - p["psi_temperature"] * state.temperature
    return state.model_copy(
        update={
            "cumulative": cumulative,
            "concentration": concentration,
            "atmosphere": concentration,
            "temperature": temperature,
            "regional_temperatures": [b + temperature for b in state.regional_baselines],
        }
    )


def step_decay(concentration: float, emissions: float, decay_rate: float, initial: float) -> float:
    if not 0 <= decay_rate <= 1:
        raise InvalidArgumentError(f"Decay rate must lie in [0, 1], got {decay_rate}")
    return max(0.0, concentration + emissions - decay_rate * initial)


def step_decay_state(state: CarbonCycleState, emissions: float) -> CarbonCycleState:
    p = state.parameters
    concentration = step_decay(state.concentration, emissions, p["decay_rate"], p["initial_concentration"])
    temperature = state.temperature
    if concentration > 0:
        temperature = temp_log_concentration(concentration, p["initial_concentration"], p["climate_sensitivity"])
    return state.model_copy(
        update={
            "concentration": concentration,
            "atmosphere": concentration,
            "temperature": temperature,
            "cumulative": state.cumulative + emissions,
            "regional_temperatures": [b + temperature for b in state.regional_baselines],
        }
    )


STEPPERS = {
    "two-box": step_two_box,
    "tcre": step_tcre,
    "permanent-transient": step_permanent_transient,
    "three-eq": step_three_eq,
    "decay": step_decay_state,
}


def step_climate(state: CarbonCycleState, emissions: float) -> CarbonCycleState:
    stepped = STEPPERS[state.variant](state, emissions)
    history = [*state.temperature_history, stepped.temperature]
    if not stepped.regional_temperatures and state.regional_baselines:
        stepped.regional_temperatures = [b + stepped.temperature for b in state.regional_baselines]
    return stepped.model_copy(update={"temperature_history": history})


def initial_state(variant: str, parameters: dict[str, float], baselines: list[float]) -> CarbonCycleState:
    if variant in ("two-box", "permanent-transient"):
        stock = parameters["atmosphere_pre"]
    elif variant == "three-eq":
        stock = parameters["concentration_pre"]
    elif variant == "decay":
        stock = parameters["initial_concentration"]
    else:
        stock = 0.0
    return CarbonCycleState(
        variant=variant,
        atmosphere=stock,
        concentration=stock,
        parameters=parameters,
        regional_baselines=baselines,
        regional_temperatures=list(baselines),
    )
