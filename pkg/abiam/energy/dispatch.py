"""Electricity dispatch: merit order, Cournot and day/night sub-step clearing."""

from typing import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import brentq

from abiam.exceptions import ConvergenceError, InvalidArgumentError
from abiam.kernel.rng import RngStream
from abiam.schemas import DispatchResult, FuelType, PowerPlant, STORAGE_FUELS

COURNOT_TOLERANCE = 1e-10
COURNOT_MAX_ITERATIONS = 10_000


def marginal_cost(plant: PowerPlant, fuel_prices: Mapping[str, float]) -> float:
    if plant.is_green:
        return 0.0
    try:
        fuel_price = fuel_prices[plant.fuel.value]
    except KeyError:
        raise InvalidArgumentError(f"No price for fuel '{plant.fuel.value}' of plant {plant.id}") from None
    efficiency = plant.thermal_efficiency if plant.thermal_efficiency > 0 else 1.0
    return fuel_price / efficiency + plant.operating_cost


def deliverable(plant: PowerPlant, capacity: float | None = None) -> float:
    """Energy the plant can deliver after supply-side transmission loss."""
    return (plant.capacity if capacity is None else capacity) * (1.0 - plant.transmission_loss)


def _account(plants: Sequence[PowerPlant], production: dict[str, float], result: DispatchResult) -> None:
    for plant in plants:
        delivered = production.get(plant.id, 0.0)
        if delivered <= 0:
            continue
        generated = delivered / (1.0 - plant.transmission_loss)
        result.emissions += generated * plant.emission_intensity
        if not plant.is_green:
            efficiency = plant.thermal_efficiency if plant.thermal_efficiency > 0 else 1.0
            fuel = plant.fuel.value
            result.fuel_consumed[fuel] = result.fuel_consumed.get(fuel, 0.0) + generated / efficiency


def merit_order_dispatch(
    plants: Sequence[PowerPlant],
    demand: float,
    markup: float,
    fuel_prices: Mapping[str, float],
    available: Mapping[str, float] | None = None,
) -> DispatchResult:
    """Activate plants in ascending marginal cost until demand is met.

    Green plants cost nothing at the margin and win ties. The price is the
    marked-up marginal cost of the last plant that runs, or of the cheapest
    plant when nothing runs.
    """
    if demand < 0:
        raise InvalidArgumentError(f"Demand must be non-negative, got {demand}")
    costs = {p.id: marginal_cost(p, fuel_prices) for p in plants}
    order = sorted(plants, key=lambda p: (costs[p.id], not p.is_green, p.id))
    production = {p.id: 0.0 for p in plants}
    remaining = float(demand)
    last = None
    for plant in order:
        if remaining <= 0:
            break
        capacity = deliverable(plant, None if available is None else available.get(plant.id, 0.0))
        take = min(capacity, remaining)
        if take > 0:
            production[plant.id] = take
            remaining -= take
            last = plant
    if last is not None:
        price = (1.0 + markup) * costs[last.id]
    elif order:
        price = (1.0 + markup) * costs[order[0].id]
    else:
        price = 0.0
    result = DispatchResult(production=production, price=price, unmet=max(0.0, remaining), demand=demand)
    _account(plants, production, result)
    return result


def cournot_quantities(
    costs: Sequence[float],
    capacities: Sequence[float],
    intercept: float,
    slope: float,
    tolerance: float = COURNOT_TOLERANCE,
    max_iterations: int = COURNOT_MAX_ITERATIONS,
) -> np.ndarray:
    """Cournot equilibrium under inverse demand P(Q) = intercept - slope * Q.

    The interior closed form is used when it respects the capacity bounds;
    otherwise projected best responses are iterated plant by plant.
    """
    if intercept <= 0 or slope <= 0:
        raise InvalidArgumentError("Inverse demand needs a positive intercept and slope")
    c = np.asarray(costs, dtype=float)
    cap = np.asarray(capacities, dtype=float)
    n = len(c)
    if n == 0:
        return np.zeros(0)
    q = (intercept - (n + 1) * c + c.sum()) / (slope * (n + 1))
    if np.all(q >= 0) and np.all(q <= cap):
        return q
    q = np.clip(q, 0.0, cap)
    for _ in range(max_iterations):
        change = 0.0
        for i in range(n):
            others = q.sum() - q[i]
            best = min(max((intercept - c[i] - slope * others) / (2.0 * slope), 0.0), cap[i])
            change = max(change, abs(best - q[i]))
            q[i] = best
        if change <= tolerance:
            return q
    raise ConvergenceError(
        f"Cournot best responses did not settle for {n} plants (a={intercept}, b={slope}) "
        f"after {max_iterations} rounds"
    )


def cournot_dispatch(
    plants: Sequence[PowerPlant],
    intercept: float,
    slope: float,
    fuel_prices: Mapping[str, float],
) -> DispatchResult:
    ordered = sorted(plants, key=lambda p: p.id)
    costs = [marginal_cost(p, fuel_prices) for p in ordered]
    capacities = [deliverable(p) for p in ordered]
    q = cournot_quantities(costs, capacities, intercept, slope)
    production = {p.id: float(x) for p, x in zip(ordered, q)}
    total = float(q.sum())
    result = DispatchResult(production=production, price=max(0.0, intercept - slope * total), demand=total)
    _account(ordered, production, result)
    return result


def calibrate_intercept(
    plants: Sequence[PowerPlant],
    demand: float,
    slope: float,
    fuel_prices: Mapping[str, float],
) -> float:
    """Intercept at which the Cournot fleet supplies `demand`.

    Capped at the intercept that saturates every plant when demand exceeds
    the fleet.
    """
    ordered = sorted(plants, key=lambda p: p.id)
    costs = [marginal_cost(p, fuel_prices) for p in ordered]
    capacities = [deliverable(p) for p in ordered]
    low = max(max(costs, default=0.0), 1e-9)

    def excess(a: float) -> float:
        return float(cournot_quantities(costs, capacities, a, slope).sum()) - demand

    if demand <= 0 or excess(low) >= 0:
        return low
    high = low + 2.0 * slope * max(demand, sum(capacities)) + 1.0
    while excess(high) < 0:
        if float(cournot_quantities(costs, capacities, high, slope).sum()) >= sum(capacities) - 1e-12:
            return high
        high *= 2.0
    return brentq(excess, low, high, xtol=1e-12)


class SubstepOutcome(BaseModel):
    price: float = Field(ge=0)
    result: DispatchResult
    prices: list[float] = Field(default_factory=list)


def _availability(plant: PowerPlant, concentration: float, rng: RngStream) -> float:
    cf = plant.capacity_factor
    if plant.fuel == FuelType.NUCLEAR or cf >= 1.0 or cf <= 0.0:
        return min(max(cf, 0.0), 1.0)
    return rng.beta(concentration * cf, concentration * (1.0 - cf))


def substep_clearing(
    plants: Sequence[PowerPlant],
    demand: float,
    substeps: int,
    rng: RngStream,
    markup: float,
    fuel_prices: Mapping[str, float],
    night_demand_share: float = 0.5,
    concentration: float = 20.0,
    stress_multiplier: float = 2.0,
) -> SubstepOutcome:
    """Clear the step as alternating night and day sub-steps.

    Solar delivers nothing at night and twice its capacity by day. Other
    plants draw a Beta availability centred on their capacity factor,
    nuclear runs at its capacity factor. Wind and solar storage charges on
    unused output and discharges to cover a shortfall. Storage levels on the
    passed plants are updated in place.
    """
    if substeps < 2 or substeps % 2:
        raise InvalidArgumentError(f"Sub-step count must be even and at least 2, got {substeps}")
    half = substeps // 2
    plants = sorted(plants, key=lambda p: p.id)
    total = DispatchResult(production={p.id: 0.0 for p in plants}, demand=demand)
    prices = []
    for k in range(substeps):
        night = k < half
        share = night_demand_share if night else 1.0 - night_demand_share
        load = demand * share / half
        available = {}
        for plant in plants:
            factor = _availability(plant, concentration, rng)
            if plant.fuel == FuelType.SOLAR:
                factor *= 0.0 if night else 2.0
            available[plant.id] = plant.capacity / substeps * factor
        offered = dict(available)
        for plant in plants:
            if plant.fuel in STORAGE_FUELS and plant.storage_level > 0:
                offered[plant.id] += plant.storage_level / (1.0 - plant.transmission_loss)
        result = merit_order_dispatch(plants, load, markup, fuel_prices, available=offered)
        for plant in plants:
            if plant.fuel not in STORAGE_FUELS or plant.storage_capacity <= 0:
                continue
            delivered = result.production[plant.id]
            own = deliverable(plant, available[plant.id])
            if delivered > own:
                plant.storage_level = max(0.0, plant.storage_level - (delivered - own))
            else:
                room = plant.storage_capacity - plant.storage_level
                plant.storage_level += min(own - delivered, max(0.0, room))
        price = result.price * (stress_multiplier if result.unmet > 0 else 1.0)
        prices.append(price)
        for plant_id, amount in result.production.items():
            total.production[plant_id] += amount
        total.unmet += result.unmet
        total.emissions += result.emissions
        for fuel, amount in result.fuel_consumed.items():
            total.fuel_consumed[fuel] = total.fuel_consumed.get(fuel, 0.0) + amount
    total.price = float(np.mean(prices))
    return SubstepOutcome(price=total.price, result=total, prices=prices)
