"""Step phases of the real economy.

Each phase takes the world and mutates it; money only moves through
`World.pay`. Agents are visited in id order so draws stay tied to ids.
"""

import math

from loguru import logger

from abiam.energy.phases import dispatch_phase, energy_investment_phase, fuel_market_phase
from abiam.finance.phases import refresh_deposits, write_off
from abiam.kernel.ledger import split_exact
from abiam.kernel.rng import RngStream
from abiam.kernel.world import World
from abiam.macro.consumption import household_budget, logit_product_choice, stone_geary_demand
from abiam.macro.firms import (
    distribute_profits,
    dividend,
    firm_exit_entry,
    firm_unit_cost,
    plan_production,
    replicator_shares,
    sales_shares,
)
from abiam.macro.innovation import access_probability, imitate, nelson_winter_innovate
from abiam.macro.labor import match_labor, wage_update
from abiam.macro.markets import Buyer, Offer, Transaction, capital_goods_market, two_round_goods_market
from abiam.macro.pricing import markup_price_update, tatonnement_update
from abiam.macro.production import (
    ces_inputs_for_output,
    emissions_for_output,
    energy_for_output,
    labor_for_output,
    produce_ces,
    produce_leontief,
    produce_vintage_crs,
    technology_cost,
    vintage_capacity,
)
from abiam.schemas import CapitalFirm, ConsumerFirm, FlowTag, Household, VintageHolding

HOUSEHOLD_PARAMS = ("wealth_target", "wealth_adjustment", "consumption_propensity", "savings_drawdown")
CES_PARAMS = ("ces_alpha_k", "ces_alpha_l", "ces_alpha_e", "ces_sigma", "ces_scale")
# steps of running cost weighed against the machine price when picking a supplier
PAYBACK_STEPS = 3.0
ORDER_SATISFACTION = 0.95


def _growth(history: list[float]) -> float:
    if len(history) < 2 or history[-2] <= 0:
        return 0.0
    return history[-1] / history[-2] - 1.0


def _effective_labor(firm, households: dict[str, Household]) -> float:
    return sum(households[w].labor_productivity for w in firm.workers if w in households)


def _firm_factor(firm) -> float:
    return firm.tfp * firm.productivity_factor * (1.0 - firm.output_damage)


def raw_target(firm: ConsumerFirm) -> float:
    """Machine output needed for the planned sales after firm-level factors."""
    factor = _firm_factor(firm)
    return firm.planned_output / factor if factor > 0 else 0.0


def _ces(world: World) -> dict[str, float]:
    return {name: world.p(name) for name in CES_PARAMS}


def _capital_input(world: World, firm: ConsumerFirm) -> float:
    return firm.capital_units * world.p("capital_per_unit")


def input_requirements(world: World, firm: ConsumerFirm, raw: float) -> tuple[float, float]:
    """(workers, energy) needed to produce `raw` on the firm's capital."""
    if raw <= 0:
        return 0.0, 0.0
    if firm.technology == "ces":
        c = _ces(world)
        return ces_inputs_for_output(
            raw,
            _capital_input(world, firm),
            firm.wage,
            max(world.energy_price, 1e-9),
            c["ces_alpha_k"],
            c["ces_alpha_l"],
            c["ces_alpha_e"],
            c["ces_sigma"],
            c["ces_scale"],
        )
    if firm.technology == "leontief":
        raw = min(raw, _capital_input(world, firm) / world.p("leontief_capital"))
        return raw * world.p("leontief_labor"), raw / firm.mean_vintage.energy_efficiency
    raw = min(raw, vintage_capacity(firm.capital))
    return labor_for_output(firm.capital, raw), energy_for_output(firm.capital, raw)


def _units_for_output(world: World, firm: ConsumerFirm, raw: float) -> float:
    if firm.technology == "leontief":
        return raw * world.p("leontief_capital") / world.p("capital_per_unit")
    return raw / firm.mean_vintage.labor_productivity


def _labor_employers(world: World) -> list:
    employers = [*world.c_firms, *world.k_firms, *world.mines]
    if world.energy is not None and world.variants.plant_investment == "abmiam":
        employers.append(world.energy)
    return employers


def reset_accounts(world: World) -> None:
    """Zero the per-step profit-and-loss counters."""
    for agent in world.firms:
        agent.revenue = 0.0
        agent.costs = 0.0
    if world.energy is not None:
        world.energy.revenue = 0.0
        world.energy.costs = 0.0
        world.energy.green_revenue = 0.0
        world.energy.brown_revenue = 0.0
    for household in world.households:
        household.wage_income = 0.0


# ---------------------------------------------------------------- labor


def labor_phase(world: World) -> None:
    rng = world.streams["macro"]
    constrained = world.variants.labor == "constrained"
    max_hires = int(world.p("max_new_hires")) if constrained else None
    max_fire = world.p("max_fire_fraction") if constrained else None
    employers = _labor_employers(world)
    for region in range(world.config.regions):
        pool = [h for h in world.households if h.region == region]
        local = [e for e in employers if getattr(e, "region", 0) == region]
        state = match_labor(local, pool, rng, max_hires, max_fire, region)
        state.market_wage = world.wage_of(region)
        world.labor[region] = state
    months = world.clock.months_per_step
    for household in world.households:
        if household.employed_by is not None:
            household.tenure += months
    world.stats.unemployment = world.unemployment()


# ---------------------------------------------------------------- planning


def _plan_consumer_firms(world: World) -> None:
    lifetime = world.p("machine_lifetime")
    for firm in world.active_c_firms:
        for holding in firm.capital:
            holding.vintage.age += 1
        firm.capital = [h for h in firm.capital if h.vintage.age < lifetime and h.units > 1e-12]
        raw = raw_target(firm)
        _, energy = input_requirements(world, firm, raw)
        firm.energy_demand = energy / firm.energy_factor if firm.energy_factor > 0 else 0.0
        firm.capital_demand = max(0.0, _units_for_output(world, firm, raw) - firm.capital_units)


def _plan_capital_firms(world: World) -> None:
    rng = world.streams["macro"]
    markup = world.p("k_markup")
    nelson_winter = world.variants.innovation == "nelson-winter"
    frontiers = {k.id: k.frontier for k in world.k_firms}
    for k in world.k_firms:
        k.price = (1.0 + markup) * k.wage / k.process_productivity
        if not nelson_winter:
            k.frontier = k.frontier.model_copy(update={"price": k.price})
            continue
        spent = min(k.rd_budget, max(0.0, k.cash)) if k.workers else 0.0
        if spent > 0:
            staff = sorted(k.workers)
            for worker, part in zip(staff, split_exact(spent, [1.0] * len(staff))):
                world.pay(k.id, worker, part, FlowTag.WAGE)
        innovation_budget = spent * world.p("innovation_share")
        frontier = nelson_winter_innovate(
            k.frontier,
            innovation_budget,
            world.p("zeta_innovation"),
            world.p("improvement_alpha"),
            world.p("improvement_beta"),
            world.p("improvement_low"),
            world.p("improvement_high"),
            rng,
        )
        others = [v for other, v in frontiers.items() if other != k.id]
        if others:
            access = access_probability(world.p("zeta_imitation"), spent - innovation_budget)
            frontier = imitate(frontier, others, access, rng)
        k.frontier = frontier.model_copy(update={"price": k.price})


def planning_phase(world: World) -> None:
    if world.variants.innovation == "exogenous":
        rng = world.streams["macro"]
        growth, noise = world.p("tfp_growth"), world.p("tfp_noise")
        for firm in world.active_c_firms:
            firm.tfp *= 1.0 + growth + rng.uniform(-noise, noise)
    _plan_capital_firms(world)
    _plan_consumer_firms(world)


# ---------------------------------------------------------------- markets


def _produce(world: World, firm: ConsumerFirm, households: dict[str, Household]) -> None:
    labor = _effective_labor(firm, households)
    target = raw_target(firm)
    vintage = firm.mean_vintage
    if firm.technology == "ces":
        c = _ces(world)
        energy = firm.energy_demand * firm.energy_factor
        raw = produce_ces(
            _capital_input(world, firm),
            labor,
            energy,
            c["ces_alpha_k"],
            c["ces_alpha_l"],
            c["ces_alpha_e"],
            c["ces_sigma"],
            c["ces_scale"],
        )
        raw = min(raw, target)
        energy_used = energy * raw / target if target > 0 else 0.0
        emissions = raw * vintage.emission_intensity
    elif firm.technology == "leontief":
        raw = min(
            target,
            produce_leontief(
                {"capital": _capital_input(world, firm), "labor": labor},
                {"capital": world.p("leontief_capital"), "labor": world.p("leontief_labor")},
            ),
        )
        energy_used = raw / vintage.energy_efficiency
        emissions = raw * vintage.emission_intensity
    else:
        raw = min(target, produce_vintage_crs(firm.capital, labor))
        energy_used = energy_for_output(firm.capital, raw)
        emissions = emissions_for_output(firm.capital, raw)
    firm.output = raw * _firm_factor(firm)
    firm.energy_use = energy_used / firm.energy_factor if firm.energy_factor > 0 else 0.0
    firm.emissions = emissions


def pay_wages(world: World) -> None:
    for employer in world.employers():
        for worker in sorted(employer.workers):
            world.pay(employer.id, worker, employer.wage, FlowTag.WAGE)


def _resource_bound(world: World) -> bool:
    return bool(world.mines) and world.has("leontief_resource")


def machine_capacity(world: World, k: CapitalFirm, households: dict[str, Household]) -> float:
    machines = _effective_labor(k, households) * k.process_productivity * k.productivity_factor * (1.0 - k.output_damage)
    if _resource_bound(world):
        machines = min(machines, k.resource_stock / world.p("leontief_resource"))
    return max(0.0, machines)


def _supplier_shortlist(world: World, firm: ConsumerFirm, suppliers: dict[str, CapitalFirm]) -> list[str]:
    listed = [s for s in firm.suppliers if s in suppliers] or sorted(suppliers)
    if world.variants.planning != "dsk":
        return listed
    wage, energy_price = firm.wage, world.energy_price

    def offer_cost(supplier_id: str) -> tuple[float, str]:
        k = suppliers[supplier_id]
        return k.price + PAYBACK_STEPS * technology_cost(k.frontier, wage, energy_price), supplier_id

    return [min(listed, key=offer_cost)]


def capital_goods_phase(world: World, households: dict[str, Household]) -> None:
    suppliers = {k.id: k for k in world.k_firms}
    if not suppliers:
        return
    stock = {k.id: machine_capacity(world, k, households) for k in world.k_firms}
    orders: dict[str, float] = {}
    shortlists: dict[str, list[str]] = {}
    for firm in world.active_c_firms:
        if firm.capital_demand <= 0:
            continue
        listed = _supplier_shortlist(world, firm, suppliers)
        price = max(suppliers[s].price for s in listed)
        affordable = max(0.0, firm.cash) / price
        units = min(firm.capital_demand, affordable)
        if units > 0:
            orders[firm.id] = units
            shortlists[firm.id] = listed
    for k in world.k_firms:
        k.order_book = 0.0
        k.output = 0.0
        k.sales = 0.0
    for buyer, units in orders.items():
        for supplier in shortlists[buyer]:
            suppliers[supplier].order_book += units / len(shortlists[buyer])

    buyers = {f.id: f for f in world.c_firms}
    for buyer_id, supplier_id, units in capital_goods_market(orders, stock, shortlists, ORDER_SATISFACTION):
        firm, k = buyers[buyer_id], suppliers[supplier_id]
        spending = world.pay(buyer_id, supplier_id, units * k.price, FlowTag.INVESTMENT, revenue=True)
        installed = firm.capital_units
        total = installed + units
        firm.productivity_factor = (firm.productivity_factor * installed + units) / total
        firm.energy_factor = (firm.energy_factor * installed + units) / total
        firm.capital.append(VintageHolding(vintage=k.frontier.model_copy(update={"price": k.price, "age": 0}), units=units))
        k.output += units
        k.sales += units
        world.stats.machines += units
        world.stats.investment += spending
    for k in world.k_firms:
        k.emissions = k.output * k.emission_intensity
        if _resource_bound(world):
            k.resource_stock = max(0.0, k.resource_stock - k.output * world.p("leontief_resource"))


def _draw_shortlist(rng: RngStream, ids: list[str], weights: list[float], size: int) -> list[str]:
    ids, weights = list(ids), list(weights)
    picked = []
    for _ in range(min(size, len(ids))):
        i = rng.choice_index(weights)
        picked.append(ids.pop(i))
        weights.pop(i)
    return picked


def _shortlists(world: World, firms: list[ConsumerFirm], rng: RngStream) -> dict[str, list[str]]:
    size = int(world.p("shortlist_size"))
    ids = [f.id for f in firms]
    variant = world.variants.goods_market
    if variant == "shortlist":
        active = set(ids)
        lists = {}
        for household in world.households:
            listed = [s for s in household.shortlist if s in active]
            missing = [s for s in ids if s not in listed]
            while len(listed) < min(size, len(ids)) and missing:
                listed.append(missing.pop(rng.integers(0, len(missing))))
            lists[household.id] = listed
        return lists
    if variant == "logit":
        first_choices = [h.shortlist[0] for h in world.households if h.shortlist]
        buyers = [first_choices.count(i) for i in ids]
        weights = logit_product_choice(
            [f.quality for f in firms],
            [f.price for f in firms],
            buyers,
            world.p("logit_intensity"),
            world.p("logit_weight_quality"),
            world.p("logit_weight_price"),
            world.p("logit_weight_buyers"),
        ).tolist()
    else:
        weights = [f.market_share for f in firms]
    return {h.id: _draw_shortlist(rng, ids, weights, size) for h in world.households}


def _foreign_buyer(world: World, firms: list[ConsumerFirm], budget: float) -> Buyer | None:
    if budget <= 0 or not firms:
        return None
    cheapest = sorted(firms, key=lambda f: (f.price, f.id))[: int(world.p("shortlist_size"))]
    return Buyer(id=world.rest_of_world.id, budget=budget, shortlist=[f.id for f in cheapest])


def _trade(world: World, buyers: list[Buyer], firms: list[ConsumerFirm], rng: RngStream):
    offers = [Offer(id=f.id, price=f.price, stock=f.inventory) for f in firms if f.inventory > 0]
    return two_round_goods_market(
        buyers,
        offers,
        rng,
        world.p("first_round_fraction"),
        world.p("churn_price_probability"),
        world.p("churn_unsatisfied_probability"),
    )


def consumer_goods_phase(world: World) -> None:
    rng = world.streams["macro"]
    firms = world.active_c_firms
    for firm in world.c_firms:
        firm.sales = 0.0
        firm.demand = 0.0
    params = {name: world.p(name) for name in HOUSEHOLD_PARAMS if world.has(name)}
    budgets = {h.id: household_budget(h, world.variants.household, params) for h in world.households}
    foreign = world.p("rest_of_world_propensity") * max(0.0, world.rest_of_world.cash)

    transactions: list[Transaction] = []
    turned_away: dict[str, float] = {}
    new_shortlists: dict[str, list[str]] = {}
    if world.variants.goods_market == "stone-geary":
        sectors = int(world.p("sectors"))
        shares, minima = world.vector("stone_geary_shares"), world.vector("stone_geary_minima")
        members = {s: [f for f in firms if f.sector == s] for s in range(sectors)}
        index = world.price_index()
        prices = [
            sum(f.price for f in members[s]) / len(members[s]) if members[s] else index for s in range(sectors)
        ]
        spending = {}
        for buyer_id, budget in [*budgets.items(), (world.rest_of_world.id, foreign)]:
            demand = stone_geary_demand(budget, prices, minima, shares)
            spending[buyer_id] = split_exact(budget, (demand.quantities * prices).tolist()) if budget > 0 else [0.0] * sectors
        size = int(world.p("shortlist_size"))
        for sector in range(sectors):
            local = members[sector]
            if not local:
                continue
            ids = [f.id for f in local]
            weights = [f.market_share for f in local]
            buyers = [
                Buyer(id=h.id, budget=spending[h.id][sector], shortlist=_draw_shortlist(rng, ids, weights, size))
                for h in world.households
                if spending[h.id][sector] > 0
            ]
            abroad = _foreign_buyer(world, local, spending[world.rest_of_world.id][sector])
            if abroad is not None:
                buyers.append(abroad)
            outcome = _trade(world, buyers, local, rng)
            transactions.extend(outcome.transactions)
            for seller, units in outcome.turned_away.items():
                turned_away[seller] = turned_away.get(seller, 0.0) + units
    else:
        lists = _shortlists(world, firms, rng)
        buyers = [
            Buyer(id=h.id, budget=budgets[h.id], shortlist=lists[h.id]) for h in world.households if budgets[h.id] > 0
        ]
        abroad = _foreign_buyer(world, firms, foreign)
        if abroad is not None:
            buyers.append(abroad)
        outcome = _trade(world, buyers, firms, rng)
        transactions = outcome.transactions
        turned_away = outcome.turned_away
        new_shortlists = {**lists, **outcome.shortlists}

    sellers = {f.id: f for f in firms}
    for trade in transactions:
        spent = world.pay(trade.buyer, trade.seller, trade.spending, FlowTag.CONSUMPTION)
        firm = sellers[trade.seller]
        firm.sales += trade.quantity
        firm.inventory = max(0.0, firm.inventory - trade.quantity)
        world.stats.consumption += spent
    for firm in firms:
        firm.demand = firm.sales + turned_away.get(firm.id, 0.0)
    for household in world.households:
        if household.id in new_shortlists:
            household.shortlist = new_shortlists[household.id]
        household.savings = household.cash
        household.income = 0.0


def markets_phase(world: World) -> None:
    households = {h.id: h for h in world.households}
    for firm in world.c_firms:
        firm.output = firm.energy_use = firm.emissions = 0.0
    for firm in world.active_c_firms:
        _produce(world, firm, households)
    pay_wages(world)
    dispatch_phase(world)
    for firm in world.active_c_firms:
        firm.inventory += firm.output
        world.stats.output += firm.output
    fuel_market_phase(world, households)
    capital_goods_phase(world, households)
    consumer_goods_phase(world)
    energy_investment_phase(world)


# ---------------------------------------------------------------- entry and exit


def pay_out(world: World, payer, amount: float, region: int | None = None) -> float:
    """Distribute `amount` of the payer's cash to households as dividends."""
    recipients = [h for h in world.households if region is None or h.region == region] or world.households
    paid = 0.0
    for household_id, part in distribute_profits(amount, recipients):
        paid += world.pay(payer.id, household_id, part, FlowTag.DIVIDEND)
    return paid


def cover_overdraft(world: World, agent) -> float:
    """A negative balance is absorbed by the agent's bank as a loss, or by the government."""
    if agent.cash >= 0:
        return 0.0
    bank = world.bank(getattr(agent, "bank_id", None))
    lender = bank.id if bank is not None else world.government.id
    tag = FlowTag.LOAN if bank is not None else FlowTag.BAILOUT
    return world.pay(lender, agent.id, -agent.cash, tag)


def _settle(world: World, firm: ConsumerFirm) -> None:
    cover_overdraft(world, firm)
    for bank in world.banks:
        for loan in bank.loans:
            if loan.borrower == firm.id and firm.cash > 0:
                repaid = world.pay(firm.id, bank.id, min(loan.principal, firm.cash), FlowTag.REPAYMENT)
                loan.principal -= repaid
    write_off(world, firm.id)
    if firm.cash > 0:
        pay_out(world, firm, firm.cash)


def _release(world: World, employer) -> None:
    for household in world.households:
        if household.employed_by == employer.id:
            household.employed_by = None
            household.tenure = 0
    employer.workers = []


def _close(world: World, firm: ConsumerFirm) -> None:
    # rounding leftovers of the payout go to the government
    if firm.cash > 0:
        world.pay(firm.id, world.government.id, firm.cash, FlowTag.TAX, cost=False)
    elif firm.cash < 0:
        world.pay(world.government.id, firm.id, -firm.cash, FlowTag.BAILOUT)
    bank = world.bank(firm.bank_id)
    if bank is not None and firm.id in bank.clients:
        bank.clients.remove(firm.id)
    world.ledger.close(firm.id)
    world.c_firms.remove(firm)


def _fund_entrant(world: World, entrant: ConsumerFirm) -> None:
    donors = [h for h in world.households if h.cash > 0]
    wealth = sum(h.cash for h in donors)
    amount = min(world.p("initial_firm_cash"), wealth)
    if amount <= 0:
        return
    for household, part in zip(donors, split_exact(amount, [h.cash for h in donors])):
        world.pay(household.id, entrant.id, min(part, household.cash), FlowTag.INVESTMENT)


def _admit(world: World, entrant: ConsumerFirm, rng: RngStream) -> None:
    entrant.wage = world.wage_of(entrant.region)
    entrant.price_history = [entrant.price]
    k_ids = sorted(k.id for k in world.k_firms)
    entrant.suppliers = rng.shuffled(k_ids)[: int(world.p("shortlist_size"))] if k_ids else []
    if world.banks:
        bank = world.banks[rng.integers(0, len(world.banks))]
        entrant.bank_id = bank.id
        bank.clients.append(entrant.id)
    labor, _ = input_requirements(world, entrant, raw_target(entrant))
    entrant.labor_demand = math.ceil(labor - 1e-9)
    world.ledger.open(entrant)
    world.c_firms.append(entrant)
    _fund_entrant(world, entrant)


def entry_exit_phase(world: World) -> None:
    rng = world.streams["macro"]
    params = {name: world.p(name) for name in ("entry_probability", "entry_premium") if world.has(name)}
    decision = firm_exit_entry(world.c_firms, world.variants.exit, rng, world.months, world.next_firm_id, params)
    by_id = {f.id: f for f in world.c_firms}

    for firm_id in decision.exits:
        firm = by_id[firm_id]
        _settle(world, firm)
        _release(world, firm)
        _close(world, firm)
        logger.info(f"Firm {firm_id} left the market at step {world.clock.step}")

    for firm_id in decision.dormant:
        firm = by_id[firm_id]
        cover_overdraft(world, firm)
        write_off(world, firm.id)
        _release(world, firm)
        firm.dormant_until = world.months + int(world.p("dormancy_months"))
        firm.labor_demand = 0
        firm.market_share = 0.0
        logger.info(f"Firm {firm_id} is dormant until month {firm.dormant_until}")

    active = world.active_c_firms
    for firm_id in decision.reactivated:
        firm = by_id[firm_id]
        firm.dormant_until = None
        firm.inventory = 0.0
        firm.price = world.price_index()
        if active:
            firm.planned_output = sum(f.planned_output for f in active) / len(active)
            firm.expected_demand = firm.planned_output
        labor, _ = input_requirements(world, firm, raw_target(firm))
        firm.labor_demand = math.ceil(labor - 1e-9)
        logger.debug(f"Firm {firm_id} resumed production")

    for entrant in decision.entrants:
        _admit(world, entrant, rng)
    world.next_firm_id += len(decision.entrants)
    world.c_firms.sort(key=lambda f: f.id)
    if decision.entrants or decision.exits:
        firms = world.active_c_firms
        shares = [f.market_share for f in firms]
        for firm, share in zip(firms, split_exact(1.0, shares) if firms else []):
            firm.market_share = share
            if not firm.share_history:
                firm.share_history = [share]
    world.stats.firm_exits = len(decision.exits) + len(decision.dormant)

    others = [*world.k_firms, *world.mines]
    if world.energy is not None:
        others.append(world.energy)
    for agent in others:
        if agent.cash < 0:
            cover_overdraft(world, agent)
            write_off(world, agent.id)


# ---------------------------------------------------------------- expectations


def _update_wages(world: World) -> None:
    variant = world.variants.wage
    regions = range(world.config.regions)
    if variant == "dsk":
        psi = (world.p("wage_psi_productivity"), world.p("wage_psi_price"), world.p("wage_psi_unemployment"))
        d_prod = _growth(world.productivity_history)
        d_price = _growth(world.price_index_history)
        history = world.unemployment_history
        d_unemp = history[-1] - history[-2] if len(history) >= 2 else 0.0
        for region in regions:
            world.market_wage[region] = wage_update(world.wage_of(region), d_prod, d_price, d_unemp, "dsk", psi)
    elif variant == "abmiam":
        for region in regions:
            pool = sum(1 for h in world.households if h.region == region)
            demand = sum(e.labor_demand for e in _labor_employers(world) if getattr(e, "region", 0) == region)
            excess = (demand - pool) / pool if pool else 0.0
            world.market_wage[region] = wage_update(
                world.wage_of(region),
                variant="abmiam",
                excess_demand=excess,
                sensitivity=world.p("wage_excess_sensitivity"),
            )
    elif variant == "grsw":
        if world.clock.annual:
            lag = 12 // world.clock.months_per_step
            history = world.price_index_history
            d_price = history[-1] / history[-1 - lag] - 1.0 if len(history) > lag and history[-1 - lag] > 0 else 0.0
            for firm in world.c_firms:
                firm.wage = wage_update(firm.wage, d_price=d_price, variant="grsw", cap=world.p("wage_cap"))
        for region in regions:
            local = [f.wage for f in world.c_firms if f.region == region]
            if local:
                world.market_wage[region] = sum(local) / len(local)
        for employer in world.employers():
            if not isinstance(employer, ConsumerFirm):
                employer.wage = world.wage_of(getattr(employer, "region", 0))
        return
    for employer in world.employers():
        employer.wage = world.wage_of(getattr(employer, "region", 0))


def _update_prices(world: World, firms: list[ConsumerFirm]) -> None:
    carbon_price = world.carbon_tax() * world.p("emission_scale")
    rng = world.streams["macro"]
    for firm in firms:
        unit_cost = firm_unit_cost(firm, firm.wage, world.energy_price, carbon_price)
        if world.variants.pricing == "markup":
            firm.markup, firm.price = markup_price_update(
                firm.markup, firm.share_history, unit_cost, world.p("markup_sensitivity")
            )
        else:
            firm.price = tatonnement_update(
                firm.price,
                firm.demand,
                firm.planned_output,
                unit_cost,
                rng,
                world.p("tatonnement_eta"),
                world.p("theta_up"),
                world.p("theta_down"),
                world.p("adopt_probability"),
            )
        firm.price = max(firm.price, 1e-9)
        firm.price_history = [*firm.price_history[-23:], firm.price]


def _update_shares(world: World, firms: list[ConsumerFirm]) -> None:
    if not firms:
        return
    if world.variants.goods_market == "share":
        shares = replicator_shares([f.market_share for f in firms], [f.price for f in firms], world.p("replicator_chi"))
    else:
        shares = sales_shares([f.sales for f in firms])
    for firm, share in zip(firms, shares):
        firm.market_share = min(1.0, max(0.0, share))
        firm.share_history = [*firm.share_history[-1:], firm.market_share]


def _plan_next_step(world: World, firms: list[ConsumerFirm]) -> None:
    index = world.price_index_history[-1]
    for firm in firms:
        plan = plan_production(
            world.variants.planning,
            firm.demand,
            firm.inventory,
            world.p("inventory_target"),
            sales=firm.sales,
            demand=firm.demand,
            previous_target=firm.planned_output,
            price=firm.price,
            market_price=index,
            demand_weight=world.p("demand_weight", 0.5),
            supply_adjustment=world.p("supply_adjustment", 0.1),
        )
        firm.expected_demand = plan.expected_demand
        firm.planned_output = plan.target
        labor, _ = input_requirements(world, firm, raw_target(firm))
        firm.labor_demand = math.ceil(labor - 1e-9)
    for k in world.k_firms:
        capacity = k.process_productivity * max(k.productivity_factor, 1e-9)
        k.labor_demand = max(1, math.ceil(k.order_book / capacity - 1e-9))
    for mine in world.mines:
        if mine.bankrupt or mine.reserve is None:
            mine.labor_demand = 0
        else:
            mine.labor_demand = math.ceil(mine.planned_extraction / world.p("initial_labor_productivity") - 1e-9)
    if world.energy is not None and world.variants.plant_investment == "abmiam":
        world.energy.labor_demand = math.ceil(world.energy.capacity * world.p("plant_labor_per_capacity") - 1e-9)


def _distribute(world: World) -> None:
    grsw = world.variants.government == "grsw"
    payout = world.p("profit_distribution") if grsw else 1.0
    buffer = world.p("liquidity_buffer")
    payers = [*world.c_firms, *world.k_firms, *world.mines]
    if world.energy is not None:
        payers.append(world.energy)
    for payer in payers:
        payer.profit = payer.revenue - payer.costs
        amount = dividend(payer.cash, payer.profit, payer.revenue, buffer, payout)
        if amount > 0:
            pay_out(world, payer, amount, getattr(payer, "region", 0) if grsw else None)
    for bank in world.banks:
        excess = min(bank.equity - world.initial_bank_equity, bank.cash)
        if excess > 0:
            pay_out(world, bank, excess)
    for k in world.k_firms:
        k.rd_budget = world.p("rd_share", 0.0) * max(0.0, k.revenue)


def expectations_phase(world: World) -> None:
    firms = world.active_c_firms
    world.price_index_history.append(world.price_index())
    world.productivity_history.append(world.mean_productivity())
    world.unemployment_history.append(world.unemployment())
    _update_wages(world)
    _update_shares(world, firms)
    _update_prices(world, firms)
    _plan_next_step(world, firms)
    _distribute(world)
    smoothing = world.p("income_smoothing", 0.1)
    for household in world.households:
        household.permanent_income = (1.0 - smoothing) * household.permanent_income + smoothing * household.wage_income
    refresh_deposits(world)
