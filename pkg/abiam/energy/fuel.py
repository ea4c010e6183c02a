import math
from typing import Mapping, Sequence

from pydantic import BaseModel, Field

from abiam.exceptions import InvalidArgumentError
from abiam.kernel.rng import RngStream
from abiam.schemas import FuelMarketState, FuelReserve, PriceProcess


class FuelSupplier(BaseModel):
    id: str
    marginal_cost: float = Field(ge=0)
    max_extraction: float = Field(ge=0)
    planned: float | None = Field(None, ge=0, description="Planned extraction, defaults to the maximum")

    @property
    def plan(self) -> float:
        return self.max_extraction if self.planned is None else min(self.planned, self.max_extraction)


class FuelClearing(BaseModel):
    price: float = Field(ge=0)
    allocations: dict[str, float] = Field(default_factory=dict, description="Supplier -> quantity sold")
    deliveries: dict[str, float] = Field(default_factory=dict, description="Bidder -> quantity received")


def rogner_marginal_cost(cumulative: float, reserve: FuelReserve) -> float:
    """Extraction cost c0 * (1 + gamma * (x / X) ** kappa); cheapest deposits go first."""
    if cumulative < 0 or cumulative > reserve.initial_stock * (1.0 + 1e-12):
        raise InvalidArgumentError(
            f"Cumulative extraction {cumulative} outside [0, {reserve.initial_stock}]"
        )
    depletion = min(cumulative / reserve.initial_stock, 1.0)
    return reserve.base_cost * (1.0 + reserve.curvature * depletion**reserve.exponent)


def planned_extraction(reserve: FuelReserve) -> float:
    """Extraction plan shrinking with regional depletion."""
    return reserve.max_extraction * reserve.remaining / reserve.initial_stock


def clear_fuel_market(suppliers: Sequence[FuelSupplier], bids: Mapping[str, float]) -> FuelClearing:
    """Central clearing of one fuel against vertical demand.

    Suppliers run in cost order up to their plans and the price is the cost
    of the last one needed. Demand above the plans goes at the highest cost
    to suppliers with spare room, in proportion to that room. Demand above
    total maximum extraction is rationed in proportion to the bids.
    """
    if any(b < 0 for b in bids.values()):
        raise InvalidArgumentError("Fuel bids must be non-negative")
    order = sorted(suppliers, key=lambda s: (s.marginal_cost, s.id))
    demand = sum(bids.values())
    allocations = {s.id: 0.0 for s in order}
    if not order:
        return FuelClearing(price=0.0, allocations={}, deliveries={b: 0.0 for b in bids})
    if demand <= 0:
        return FuelClearing(price=order[0].marginal_cost, allocations=allocations, deliveries={b: 0.0 for b in bids})

    planned_total = sum(s.plan for s in order)
    max_total = sum(s.max_extraction for s in order)
    if demand <= planned_total:
        remaining = demand
        price = order[0].marginal_cost
        for supplier in order:
            if remaining <= 0:
                break
            take = min(supplier.plan, remaining)
            if take > 0:
                allocations[supplier.id] = take
                remaining -= take
                price = supplier.marginal_cost
        supplied = demand
    else:
        price = max(s.marginal_cost for s in order)
        for supplier in order:
            allocations[supplier.id] = supplier.plan
        excess = min(demand, max_total) - planned_total
        room = {s.id: s.max_extraction - s.plan for s in order}
        room_total = sum(room.values())
        if excess > 0 and room_total > 0:
            for supplier in order:
                allocations[supplier.id] += excess * room[supplier.id] / room_total
        supplied = min(demand, max_total)
    ratio = supplied / demand
    deliveries = {bidder: bid * ratio for bidder, bid in bids.items()}
    return FuelClearing(price=price, allocations=allocations, deliveries=deliveries)


def fuel_price_step(state: FuelMarketState, rng: RngStream, step: int = 0, dt: float = 1.0) -> FuelMarketState:
    if state.price <= 0:
        raise InvalidArgumentError(f"Fuel price must be positive, got {state.price}")
    if state.process == PriceProcess.GBM:
        z = rng.normal()
        growth = (state.drift - 0.5 * state.volatility**2) * dt + state.volatility * math.sqrt(dt) * z
        return state.model_copy(update={"price": state.price * math.exp(growth)})
    if state.process == PriceProcess.EXOGENOUS and state.path:
        return state.model_copy(update={"price": state.path[min(step, len(state.path) - 1)]})
    return state
