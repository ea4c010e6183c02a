from typing import Sequence

from pydantic import BaseModel, Field

from abiam.exceptions import InvalidArgumentError
from abiam.kernel.ledger import split_exact
from abiam.kernel.rng import RngStream
from abiam.macro.production import technology_cost
from abiam.schemas import ConsumerFirm, Household, Loan, VintageHolding, average_vintage


class ProductionPlan(BaseModel):
    expected_demand: float = Field(ge=0)
    target: float = Field(ge=0)


def plan_production(
    variant: str,
    expected_demand: float,
    inventory: float,
    inventory_target: float,
    sales: float = 0.0,
    demand: float = 0.0,
    previous_target: float = 0.0,
    price: float = 0.0,
    market_price: float = 0.0,
    demand_weight: float = 0.5,
    supply_adjustment: float = 0.1,
) -> ProductionPlan:
    """Production target for the coming step.

    dsk: expected demand plus the gap to the desired inventory.
    abmiam: expectation is a weighted average of sales and demand.
    cfhs: the previous target moves up on excess demand at a price above
    the market average and down on unsold stock.
    """
    if variant == "dsk":
        expected = expected_demand
        target = expected + (inventory_target * expected - inventory)
    elif variant == "abmiam":
        expected = demand_weight * sales + (1.0 - demand_weight) * demand
        target = expected + (inventory_target * expected - inventory)
    elif variant == "cfhs":
        expected = demand
        if demand > sales and price >= market_price:
            target = previous_target * (1.0 + supply_adjustment)
        elif inventory > inventory_target * max(demand, 0.0):
            target = previous_target * (1.0 - supply_adjustment)
        else:
            target = previous_target
        if previous_target <= 0:
            target = expected
    else:
        raise InvalidArgumentError(f"Unknown planning variant '{variant}'")
    return ProductionPlan(expected_demand=max(0.0, expected), target=max(0.0, target))


def replicator_shares(shares: Sequence[float], prices: Sequence[float], chi: float) -> list[float]:
    """Market shares after one round of competitive selection on price."""
    competitiveness = [1.0 / p for p in prices]
    mean = sum(s * e for s, e in zip(shares, competitiveness))
    if mean <= 0:
        return [1.0 / len(shares)] * len(shares) if shares else []
    updated = [max(0.0, s * (1.0 + chi * (e - mean) / mean)) for s, e in zip(shares, competitiveness)]
    total = sum(updated)
    if total <= 0:
        return [1.0 / len(shares)] * len(shares)
    return [s / total for s in updated]


def sales_shares(sales: Sequence[float]) -> list[float]:
    total = sum(sales)
    if total <= 0:
        return [1.0 / len(sales)] * len(sales) if sales else []
    return [s / total for s in sales]


def firm_unit_cost(firm: ConsumerFirm, wage: float, energy_price: float, carbon_price: float = 0.0) -> float:
    return technology_cost(firm.mean_vintage, wage, energy_price, carbon_price) / firm.tfp


class ExitDecision(BaseModel):
    exits: list[str] = Field(default_factory=list)
    dormant: list[str] = Field(default_factory=list)
    reactivated: list[str] = Field(default_factory=list)
    entrants: list[ConsumerFirm] = Field(default_factory=list)


def clone_industry_average(firms: Sequence[ConsumerFirm], new_id: str) -> ConsumerFirm:
    """Entrant holding the industry-average state, without money or debt."""
    n = len(firms)
    units = sum(f.capital_units for f in firms) / n
    vintage = average_vintage([h for f in firms for h in f.capital])
    template = firms[0]
    return ConsumerFirm(
        id=new_id,
        region=template.region,
        sector=template.sector,
        technology=template.technology,
        capital=[VintageHolding(vintage=vintage, units=units)] if units > 0 else [],
        price=sum(f.price for f in firms) / n,
        markup=sum(f.markup for f in firms) / n,
        wage=sum(f.wage for f in firms) / n,
        market_share=1.0 / n,
        quality=sum(f.quality for f in firms) / n,
        tfp=sum(f.tfp for f in firms) / n,
        expected_demand=sum(f.expected_demand for f in firms) / n,
        planned_output=sum(f.planned_output for f in firms) / n,
    )


def firm_exit_entry(
    firms: Sequence[ConsumerFirm],
    variant: str,
    rng: RngStream,
    month: int,
    next_id: int,
    params: dict[str, float],
) -> ExitDecision:
    """Who leaves, who sleeps and who enters; money is settled by the caller.

    dsk: firms with negative liquidity or no market share are replaced by
    clones of the industry average.
    abmiam: insolvent firms leave; with a fixed probability a firm enters
    with a technology strictly above the best incumbent.
    grsw: insolvent firms stop producing for a dormancy period and then
    reactivate with an empty store.
    """
    firms = sorted(firms, key=lambda f: f.id)
    decision = ExitDecision()
    active = [f for f in firms if f.active]
    if variant == "dsk":
        leaving = [f for f in active if f.cash < 0 or f.market_share <= 0]
        leaving_ids = {f.id for f in leaving}
        survivors = [f for f in active if f.id not in leaving_ids] or active
        decision.exits = [f.id for f in leaving]
        for i, _ in enumerate(leaving):
            decision.entrants.append(clone_industry_average(survivors, f"c{next_id + i}"))
    elif variant == "abmiam":
        decision.exits = [f.id for f in active if f.cash < 0]
        survivors = [f for f in active if f.cash >= 0] or active
        if survivors and rng.random() < params["entry_probability"]:
            best = min(survivors, key=lambda f: firm_unit_cost(f, 1.0, 1.0))
            premium = 1.0 + params["entry_premium"] * (1.0 - rng.random())
            entrant = clone_industry_average(survivors, f"c{next_id}")
            entrant.capital = [VintageHolding(vintage=best.mean_vintage, units=entrant.capital_units or 1.0)]
            entrant.tfp = best.tfp * premium
            entrant.quality = entrant.quality * rng.uniform(0.8, 1.2)
            decision.entrants.append(entrant)
    elif variant == "grsw":
        for firm in firms:
            if firm.dormant_until is not None and month >= firm.dormant_until:
                decision.reactivated.append(firm.id)
            elif firm.active and firm.cash < 0:
                decision.dormant.append(firm.id)
    else:
        raise InvalidArgumentError(f"Unknown exit variant '{variant}'")
    return decision


def distribute_profits(amount: float, households: Sequence[Household]) -> list[tuple[str, float]]:
    """Split a payout over households in proportion to their savings."""
    if amount <= 0 or not households:
        return []
    ordered = sorted(households, key=lambda h: h.id)
    parts = split_exact(amount, [max(0.0, h.cash) for h in ordered])
    return [(h.id, part) for h, part in zip(ordered, parts) if part > 0]


def dividend(firm_cash: float, profit: float, revenue: float, buffer: float, payout: float = 1.0) -> float:
    """Positive after-tax profit beyond the liquidity buffer, times the payout share."""
    if profit <= 0:
        return 0.0
    free_cash = firm_cash - buffer * revenue
    return max(0.0, min(payout * profit, free_cash))


def loan_extension(market_share: float, loans: list[Loan], threshold: float, steps: int) -> int:
    """Extend the payback of a high-share firm's loans once; returns loans extended."""
    if market_share <= threshold:
        return 0
    extended = 0
    for loan in loans:
        if not loan.extended:
            loan.remaining_term += int(steps)
            loan.extended = True
            extended += 1
    return extended
