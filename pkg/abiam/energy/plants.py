"""Fleet investment, depreciation and energy-technology change."""

import math
from typing import Sequence

import numpy as np

from abiam.exceptions import InvalidArgumentError
from abiam.kernel.rng import RngStream
from abiam.macro.innovation import access_probability
from abiam.schemas import ConstructionOrder, EnergyTechnology, FuelType, PowerPlant


def present_value_cost(cost_per_step: float, discount_rate: float, lifetime: int) -> float:
    """Discounted cost of running one capacity unit over its lifetime."""
    if discount_rate <= 0:
        raise InvalidArgumentError(f"Discount rate must be positive, got {discount_rate}")
    annuity = (1.0 - (1.0 + discount_rate) ** (-lifetime)) / discount_rate
    return cost_per_step * annuity


def choose_dsk_technology(green_fixed_cost: float, brown_present_value: float) -> str:
    """Green wins while its fixed cost is below the brown plant's discounted running cost."""
    return "green" if green_fixed_cost < brown_present_value else "brown"


def surviving_capacity(fleet: Sequence[PowerPlant]) -> float:
    return sum(p.capacity for p in fleet if p.age + 1 < p.lifetime)


def price_volatility(prices: Sequence[float], window: int = 12) -> float:
    recent = np.asarray(prices[-window:], dtype=float)
    if len(recent) < 2 or recent.mean() <= 0:
        return 0.0
    return float(recent.std() / recent.mean())


def plan_plant_investment(
    variant: str,
    expected_demand: float,
    fleet: Sequence[PowerPlant],
    technology: EnergyTechnology,
    brown_fuel_price: float,
    electricity_price: float,
    discount_rate: float,
    lifetime: int,
    params: dict[str, float],
    price_history: Sequence[float] = (),
    green_choice: str | None = None,
) -> list[ConstructionOrder]:
    """Capacity to order when expected demand exceeds what survives depreciation.

    dsk: green if its fixed cost is below the present value of brown fuel.
    abmiam: the fuel with the higher expected discounted profit.
    cfhs: growth is bounded by a share of the fleet, and storage comes with
    new renewables when electricity prices are volatile.
    `green_choice` ("green"/"brown") overrides the technology rule.
    """
    surviving = surviving_capacity(fleet)
    if expected_demand <= surviving:
        return []
    needed = expected_demand * (1.0 + params["capacity_margin"]) - surviving
    brown_cost = brown_fuel_price / technology.brown_thermal_efficiency + params.get("plant_operating_cost", 0.0)
    brown_pv = present_value_cost(brown_cost, discount_rate, lifetime)
    green_cost = technology.green_fixed_cost

    if variant == "dsk":
        choice = choose_dsk_technology(green_cost, brown_pv)
    elif variant == "abmiam":
        revenue_pv = present_value_cost(electricity_price, discount_rate, lifetime)
        choice = "green" if revenue_pv - green_cost > revenue_pv - brown_pv else "brown"
    elif variant == "cfhs":
        current = sum(p.capacity for p in fleet)
        if current > 0:
            needed = min(needed, params["capacity_growth_cap"] * current)
        choice = choose_dsk_technology(green_cost, brown_pv)
    else:
        raise InvalidArgumentError(f"Unknown plant investment variant '{variant}'")
    if green_choice is not None:
        choice = green_choice
    if needed <= 0:
        return []

    if choice == "brown":
        return [ConstructionOrder(fuel=FuelType.GENERIC_BROWN if variant != "cfhs" else FuelType.GAS, capacity=needed)]
    if variant != "cfhs":
        return [ConstructionOrder(fuel=FuelType.GENERIC_GREEN, capacity=needed, fixed_cost=green_cost * needed)]
    storage = 0.0
    if price_volatility(price_history) > params["storage_volatility_threshold"]:
        storage = params["storage_ratio"] * needed / 2.0
    return [
        ConstructionOrder(fuel=fuel, capacity=needed / 2.0, fixed_cost=green_cost * needed / 2.0, storage_capacity=storage)
        for fuel in (FuelType.SOLAR, FuelType.WIND)
    ]


def depreciate_fleet(fleet: Sequence[PowerPlant], variant: str = "lifetime") -> list[PowerPlant]:
    """Age the fleet one step and retire what reached its lifetime.

    In the tranche variant a plant loses its oldest capacity tranche once
    that tranche reaches the lifetime; the plant goes when no tranche is left.
    """
    survivors = []
    for plant in sorted(fleet, key=lambda p: p.id):
        plant.age += 1
        if variant == "tranche" and plant.tranches:
            for tranche in plant.tranches:
                tranche.age += 1
            oldest = max(plant.tranches, key=lambda t: t.age)
            if oldest.age >= plant.lifetime:
                plant.tranches.remove(oldest)
            if not plant.tranches:
                continue
            plant.capacity = sum(t.capacity for t in plant.tranches)
            plant.age = max(t.age for t in plant.tranches)
            survivors.append(plant)
        elif plant.age < plant.lifetime:
            survivors.append(plant)
    return survivors


def energy_innovation(
    technology: EnergyTechnology,
    green_revenue: float,
    brown_revenue: float,
    rd_share: float,
    zeta: float,
    alpha: float,
    beta: float,
    low: float,
    high: float,
    rng: RngStream,
) -> EnergyTechnology:
    """R&D out of past sales, split between green and brown by revenue."""
    sales = max(0.0, green_revenue) + max(0.0, brown_revenue)
    budget = rd_share * sales
    green_budget = budget * max(0.0, green_revenue) / sales if sales > 0 else 0.0
    brown_budget = budget - green_budget
    fixed_cost = technology.green_fixed_cost
    intensity = technology.brown_emission_intensity
    efficiency = technology.brown_thermal_efficiency
    if rng.random() < access_probability(zeta, green_budget):
        x = low + (high - low) * rng.beta(alpha, beta)
        fixed_cost = min(fixed_cost, fixed_cost * (1.0 - x))
    if rng.random() < access_probability(zeta, brown_budget):
        x_m = low + (high - low) * rng.beta(alpha, beta)
        x_e = low + (high - low) * rng.beta(alpha, beta)
        intensity = min(intensity, intensity * (1.0 - x_m))
        efficiency = min(1.0, max(efficiency, efficiency * (1.0 + x_e)))
    return EnergyTechnology(
        green_fixed_cost=max(fixed_cost, 1e-12),
        brown_emission_intensity=max(intensity, 0.0),
        brown_thermal_efficiency=efficiency,
    )


def exogenous_cost_decline(cost: float, floor: float, rate: float, noise_amplitude: float, rng: RngStream) -> float:
    noise = rng.uniform(-noise_amplitude, noise_amplitude) if noise_amplitude > 0 else 0.0
    if cost <= floor:
        return floor
    return max(floor, cost * (1.0 - rate + noise))


def cobb_douglas_output(
    capital: float, labor: float, fuel: float, capital_exp: float, labor_exp: float, fuel_exp: float, tfp: float = 1.0
) -> float:
    if min(capital, labor, fuel) < 0:
        raise InvalidArgumentError("Cobb-Douglas inputs must be non-negative")
    if (capital == 0 and capital_exp > 0) or (labor == 0 and labor_exp > 0) or (fuel == 0 and fuel_exp > 0):
        return 0.0
    return tfp * math.prod(
        x**e for x, e in ((capital, capital_exp), (labor, labor_exp), (fuel, fuel_exp)) if e > 0
    )


def staffed_capacity(capacity: float, staffing: float, params: dict[str, float]) -> float:
    """Capacity a plant fleet can run with `staffing` (workers over workers needed)."""
    factor = cobb_douglas_output(
        1.0,
        max(0.0, min(1.0, staffing)),
        1.0,
        params["plant_capital_exponent"],
        params["plant_labor_exponent"],
        params["plant_fuel_exponent"],
    )
    return capacity * factor
