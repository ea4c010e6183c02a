"""Policy phase: carbon tax, fines and subsidies, the fiscal step and the policy rate."""

from loguru import logger

from abiam.finance.government import government_step, taylor_rate
from abiam.kernel.world import World
from abiam.policy.instruments import FineTarget, carbon_tax_and_recycle, fines_and_subsidies, retrofit
from abiam.schemas import Household


def _accounts(world: World) -> dict:
    return world.ledger.accounts


def _book_cost(world: World, agent_id: str, amount: float) -> None:
    agent = _accounts(world).get(agent_id)
    if hasattr(agent, "costs"):
        agent.costs += amount
    elif isinstance(agent, Household):
        agent.income = max(0.0, agent.income - amount)


def _book_receipt(world: World, agent_id: str, amount: float) -> None:
    agent = _accounts(world).get(agent_id)
    if isinstance(agent, Household):
        agent.income += amount
    elif hasattr(agent, "revenue"):
        agent.revenue += amount


def carbon_tax_phase(world: World) -> None:
    rate = world.carbon_tax()
    emitters = world.stats.emitters
    if rate <= 0 or not emitters:
        return
    households = [h.id for h in world.households]
    record = carbon_tax_and_recycle(emitters, rate, households, world.ledger, world.government.id)
    for emitter, amount in emitters.items():
        _book_cost(world, emitter, rate * amount)
    if households and record.lump_sums > 0:
        lump = record.lump_sums / len(households)
        for household in households:
            _book_receipt(world, household, lump)
    transfers = world.stats.transfers
    transfers.tax_revenue += record.tax_revenue
    transfers.lump_sums += record.lump_sums


def fines_phase(world: World) -> None:
    """Fine CO2 of machine makers and pollution of mines; recycle as retrofit subsidies."""
    policy = world.policy
    if policy.emission_fine <= 0 and policy.pollution_fine <= 0:
        return
    scale = world.p("emission_scale")
    targets = [
        FineTarget(
            id=k.id,
            region=k.region,
            emissions=k.emissions * scale,
            capacity=len(k.workers) * k.process_productivity,
        )
        for k in world.k_firms
    ]
    targets += [
        FineTarget(
            id=m.id,
            region=m.region,
            pollution=world.stats.pollution_added.get(m.id, 0.0),
            capacity=m.reserve.max_extraction if m.reserve is not None and not m.bankrupt else 0.0,
        )
        for m in world.mines
    ]
    outcome = fines_and_subsidies(
        targets,
        policy.subsidy_scheme,
        policy.emission_fine,
        policy.pollution_fine,
        world.ledger,
        north_share=policy.north_share,
        grant_factor=policy.grant_factor,
        institution=world.government.id,
    )
    for payer, fine in outcome.fines.items():
        _book_cost(world, payer, fine)
    for recipient, subsidy in outcome.subsidies.items():
        _book_receipt(world, recipient, subsidy)

    efficiency, floor = policy.retrofit_efficiency, policy.retrofit_floor
    if efficiency > 0:
        for k in world.k_firms:
            if k.id in outcome.subsidies:
                k.emission_intensity = retrofit(k.emission_intensity, outcome.subsidies[k.id], efficiency, floor)
        coefficients = dict(world.pollution.coefficients)
        for mine in world.mines:
            if mine.id in outcome.subsidies:
                mine.pollution_coefficient = retrofit(
                    mine.pollution_coefficient, outcome.subsidies[mine.id], efficiency, floor
                )
                coefficients[mine.id] = mine.pollution_coefficient
        world.pollution = world.pollution.model_copy(update={"coefficients": coefficients})

    transfers = world.stats.transfers
    transfers.fines += outcome.record.fines
    transfers.subsidies += outcome.record.subsidies
    transfers.grants += outcome.record.grants


def fiscal_phase(world: World) -> None:
    if world.variants.government == "none":
        return
    budget = world.government
    benefits = [
        (h.id, budget.benefit_fraction * world.wage_of(h.region)) for h in world.households if h.employed_by is None
    ]
    taxes = []
    payers = [*world.c_firms, *world.k_firms, *world.mines]
    if world.energy is not None:
        payers.append(world.energy)
    for payer in payers:
        profit = payer.revenue - payer.costs
        if profit > 0:
            taxes.append((payer.id, min(budget.profit_tax * profit, max(0.0, payer.cash))))
    for household in world.households:
        if household.wage_income > 0:
            taxes.append((household.id, min(budget.income_tax * household.wage_income, max(0.0, household.cash))))
    outcome = government_step(
        budget,
        world.ledger,
        benefits,
        taxes,
        world.banks,
        world.central_bank,
        world.central_bank.base_rate,
        world.p("bank_bond_share"),
    )
    for payer, amount in taxes:
        if amount > 0:
            _book_cost(world, payer, amount)
    for payee, amount in benefits:
        if amount > 0:
            _book_receipt(world, payee, amount)
    if outcome.new_bonds > 0:
        logger.debug(f"Government issued {outcome.new_bonds:.4f} of bonds at step {world.clock.step}")


def monetary_phase(world: World) -> None:
    cb = world.central_bank
    if world.variants.monetary == "taylor":
        history = world.price_index_history
        inflation = history[-1] / history[-2] - 1.0 if len(history) >= 2 and history[-2] > 0 else 0.0
        cb.base_rate = taylor_rate(inflation, world.unemployment(), cb)
    else:
        cb.base_rate = world.p("base_rate")


def policy_phase(world: World) -> None:
    carbon_tax_phase(world)
    fines_phase(world)
    fiscal_phase(world)
    monetary_phase(world)
