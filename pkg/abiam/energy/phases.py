"""Energy-sector steps inside the market phase: dispatch, fuel and fleet investment."""

from loguru import logger

from abiam.climate.emissions import local_pollution_step
from abiam.energy.dispatch import calibrate_intercept, cournot_dispatch, merit_order_dispatch, substep_clearing
from abiam.energy.fuel import FuelSupplier, clear_fuel_market, fuel_price_step, planned_extraction, rogner_marginal_cost
from abiam.energy.plants import (
    depreciate_fleet,
    energy_innovation,
    exogenous_cost_decline,
    plan_plant_investment,
    staffed_capacity,
)
from abiam.kernel.ledger import split_exact
from abiam.kernel.world import CAPACITY_FACTORS, World
from abiam.policy.instruments import renewable_mandate
from abiam.schemas import RENEWABLE_FUELS, CapacityTranche, DispatchResult, FlowTag, Household, Loan, PowerPlant

PLANT_EXPONENTS = ("plant_capital_exponent", "plant_labor_exponent", "plant_fuel_exponent")
INVESTMENT_PARAMS = (
    "capacity_margin",
    "plant_operating_cost",
    "capacity_growth_cap",
    "storage_volatility_threshold",
    "storage_ratio",
)


def _staffed_availability(world: World) -> dict[str, float] | None:
    energy = world.energy
    if world.variants.plant_investment != "abmiam":
        return None
    needed = energy.capacity * world.p("plant_labor_per_capacity")
    staffing = len(energy.workers) / needed if needed > 0 else 1.0
    params = {name: world.p(name) for name in PLANT_EXPONENTS}
    return {plant.id: staffed_capacity(plant.capacity, staffing, params) for plant in energy.plants}


def _clear(world: World, demand: float) -> DispatchResult:
    energy = world.energy
    prices = world.fuel_prices()
    variant = world.variants.dispatch
    if variant == "merit-order":
        return merit_order_dispatch(
            energy.plants, demand, world.p("energy_markup"), prices, available=_staffed_availability(world)
        )
    if variant == "cournot":
        slope = world.p("cournot_slope")
        intercept = calibrate_intercept(energy.plants, demand, slope, prices)
        result = cournot_dispatch(energy.plants, intercept, slope, prices)
        total = result.total_production
        if total > demand:
            scale = demand / total
            result.production = {k: v * scale for k, v in result.production.items()}
            result.fuel_consumed = {k: v * scale for k, v in result.fuel_consumed.items()}
            result.emissions *= scale
        result.demand = demand
        result.unmet = max(0.0, demand - result.total_production)
        return result
    outcome = substep_clearing(
        energy.plants,
        demand,
        int(world.p("substeps")),
        world.streams["energy"],
        world.p("energy_markup"),
        prices,
        world.p("night_demand_share"),
        world.p("availability_concentration"),
        world.p("stress_multiplier", 2.0),
    )
    return outcome.result


def dispatch_phase(world: World) -> None:
    """Serve the consumer firms' electricity demand and bill them.

    Firms short of electricity scale output, use and emissions down by the
    share they were served.
    """
    firms = world.active_c_firms
    demand = sum(f.energy_use for f in firms)
    world.stats.energy_demand = demand
    energy = world.energy
    if energy is None or world.variants.dispatch == "none":
        world.dispatch = DispatchResult(demand=demand)
        return
    result = _clear(world, demand)
    served = result.total_production
    share = min(1.0, served / demand) if demand > 0 else 1.0
    for firm in firms:
        firm.output *= share
        firm.energy_use *= share
        firm.emissions *= share
        world.pay(firm.id, energy.id, firm.energy_use * result.price, FlowTag.ELECTRICITY)

    green = 0.0
    step = world.clock.step
    for plant in sorted(energy.plants, key=lambda p: p.id):
        produced = result.production.get(plant.id, 0.0)
        if plant.is_green:
            green += produced
            energy.green_revenue += produced * result.price
        else:
            energy.brown_revenue += produced * result.price
        world.dispatch_trace.append(
            {"step": step, "plant": plant.id, "fuel": plant.fuel.value, "production": produced, "price": result.price}
        )
    if result.unmet > 0:
        logger.debug(f"Unmet electricity demand {result.unmet:.4f} at step {step}")
    world.dispatch = result
    world.energy_price = result.price
    world.stats.green_share = green / served if served > 0 else 0.0


def _lay_off(world: World, employer) -> None:
    for household in world.households:
        if household.employed_by == employer.id:
            household.employed_by = None
            household.tenure = 0
    employer.workers = []


def _suppliers(world: World, households: dict[str, Household]) -> list[FuelSupplier]:
    per_worker = world.p("initial_labor_productivity")
    suppliers = []
    for mine in world.mines:
        reserve = mine.reserve
        if mine.bankrupt or reserve is None or reserve.remaining <= 0:
            continue
        staffed = sum(households[w].labor_productivity for w in mine.workers if w in households) * per_worker
        ceiling = min(reserve.max_extraction, reserve.remaining, staffed)
        suppliers.append(
            FuelSupplier(
                id=mine.id,
                marginal_cost=rogner_marginal_cost(reserve.cumulative_extracted, reserve),
                max_extraction=max(0.0, ceiling),
                planned=min(planned_extraction(reserve), max(0.0, ceiling)),
            )
        )
    return suppliers


def fuel_market_phase(world: World, households: dict[str, Household]) -> None:
    """Fossil fuel for power plants and raw resource for machine makers.

    Without mines fuel is imported at the going price. With mines the
    regional suppliers clear against all bids and any shortfall of the
    power sector is imported.
    """
    bids: dict[str, float] = {}
    energy = world.energy
    if energy is not None:
        fossil = sum(world.dispatch.fuel_consumed.values())
        if fossil > 0:
            bids[energy.id] = fossil
    if not world.mines:
        if energy is not None:
            world.pay(energy.id, world.rest_of_world.id, bids.get(energy.id, 0.0) * world.fossil_price(), FlowTag.FUEL)
        return
    if world.has("leontief_resource"):
        need = world.p("leontief_resource")
        for k in world.k_firms:
            wanted = max(0.0, k.order_book * need - k.resource_stock)
            if wanted > 0:
                bids[k.id] = wanted

    clearing = clear_fuel_market(_suppliers(world, households), bids)
    mines = {m.id: m for m in world.mines}
    sellers = sorted(m for m, q in clearing.allocations.items() if q > 0)
    weights = [clearing.allocations[m] for m in sellers]
    for bidder in sorted(bids):
        delivered = clearing.deliveries.get(bidder, 0.0)
        bill = delivered * clearing.price
        if bill > 0 and sellers:
            for seller, part in zip(sellers, split_exact(bill, weights)):
                world.pay(bidder, seller, part, FlowTag.FUEL)
        if energy is not None and bidder == energy.id:
            shortfall = bids[bidder] - delivered
            world.pay(bidder, world.rest_of_world.id, shortfall * world.fossil_price(), FlowTag.FUEL)
        else:
            k = next(k for k in world.k_firms if k.id == bidder)
            k.resource_stock += delivered

    extracted = {}
    for mine_id, amount in clearing.allocations.items():
        mine = mines[mine_id]
        reserve = mine.reserve
        reserve.cumulative_extracted = min(reserve.initial_stock, reserve.cumulative_extracted + amount)
        mine.output = amount
        mine.sales = amount
        extracted[mine_id] = amount
        world.stats.extraction[str(mine.region)] = world.stats.extraction.get(str(mine.region), 0.0) + amount
        world.stats.pollution_added[mine_id] = mine.pollution_coefficient * amount
        mine.planned_extraction = planned_extraction(reserve)
        if reserve.remaining <= 1e-12 and not mine.bankrupt:
            mine.bankrupt = True
            mine.labor_demand = 0
            _lay_off(world, mine)
            logger.info(f"Mine {mine.id} exhausted its reserve")
    world.pollution = local_pollution_step(world.pollution, extracted)
    if clearing.price > 0:
        world.fuel.price = clearing.price


def _fund_plant(world: World, cost: float) -> None:
    energy = world.energy
    shortfall = cost - max(0.0, energy.cash)
    if shortfall > 0 and world.banks:
        lender = max(world.banks, key=lambda b: (b.equity, b.id))
        rate = world.central_bank.base_rate * (1.0 + world.vector("loan_markups")[0])
        world.pay(lender.id, energy.id, shortfall, FlowTag.LOAN)
        lender.loans.append(
            Loan(borrower=energy.id, principal=shortfall, rate=rate, remaining_term=int(world.p("loan_term")), green=True)
        )
    makers = sorted(k.id for k in world.k_firms)
    if not makers:
        world.pay(energy.id, world.rest_of_world.id, cost, FlowTag.INVESTMENT)
        return
    for maker, part in zip(makers, split_exact(cost, [1.0] * len(makers))):
        world.pay(energy.id, maker, part, FlowTag.INVESTMENT, revenue=True)


def energy_investment_phase(world: World) -> None:
    energy = world.energy
    if energy is None:
        return
    rng = world.streams["energy"]
    variant = world.variants.plant_investment
    energy.plants = depreciate_fleet(energy.plants, world.variants.depreciation)
    demand = world.stats.energy_demand
    energy.demand_history.append(demand)

    override = world.policy.renewable_override
    choice = renewable_mandate(override, rng) if override is not None else None
    params = {name: world.p(name) for name in INVESTMENT_PARAMS if world.has(name)}
    lifetime = int(world.p("plant_lifetime"))
    orders = plan_plant_investment(
        variant,
        demand,
        energy.plants,
        energy.technology,
        world.fossil_price(),
        world.energy_price,
        world.p("discount_rate"),
        lifetime,
        params,
        energy.price_history,
        choice,
    )
    technology = energy.technology
    for order in orders:
        green = order.fuel in RENEWABLE_FUELS
        plant = PowerPlant(
            id=f"p{energy.next_plant}",
            fuel=order.fuel,
            capacity=order.capacity,
            lifetime=lifetime,
            thermal_efficiency=1.0 if green else technology.brown_thermal_efficiency,
            emission_intensity=0.0 if green else technology.brown_emission_intensity,
            fixed_cost=order.fixed_cost,
            operating_cost=world.p("plant_operating_cost", 0.0),
            capacity_factor=CAPACITY_FACTORS.get(order.fuel, 1.0) if world.variants.dispatch == "substeps" else 1.0,
            storage_capacity=order.storage_capacity,
            transmission_loss=world.p("transmission_loss", 0.0),
            tranches=[CapacityTranche(capacity=order.capacity)] if world.variants.depreciation == "tranche" else [],
        )
        energy.plants.append(plant)
        energy.next_plant += 1
        if order.fixed_cost > 0:
            _fund_plant(world, order.fixed_cost)
        logger.debug(f"Ordered plant {plant.id} ({plant.fuel.value}, capacity {plant.capacity:.4f})")

    if variant == "dsk":
        energy.technology = energy_innovation(
            technology,
            energy.green_revenue,
            energy.brown_revenue,
            world.p("energy_rd_share", 0.01),
            world.p("energy_zeta", 0.3),
            world.p("improvement_alpha", 3.0),
            world.p("improvement_beta", 3.0),
            world.p("improvement_low", -0.15),
            world.p("improvement_high", 0.15),
            rng,
        )
    elif variant == "cfhs":
        energy.technology = technology.model_copy(
            update={
                "green_fixed_cost": exogenous_cost_decline(
                    technology.green_fixed_cost,
                    world.p("cost_floor"),
                    world.p("cost_decline_rate"),
                    world.p("cost_decline_noise"),
                    rng,
                )
            }
        )

    world.fuel = fuel_price_step(world.fuel, rng, world.clock.step, world.clock.months_per_step / 12.0)
    if world.has("fuel_price_floor"):
        world.fuel.price = max(world.fuel.price, world.p("fuel_price_floor"))
    energy.price_history.append(world.energy_price)
