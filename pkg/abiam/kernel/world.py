"""The simulated economy: every agent, market state and the ledger."""

import math

from pydantic import BaseModel, Field

from abiam.climate.carbon import initial_state
from abiam.kernel.clock import SimClock
from abiam.kernel.ledger import Ledger
from abiam.kernel.registry import VARIANT_PARAMETERS
from abiam.kernel.rng import make_streams
from abiam.macro.production import labor_for_output, technology_cost
from abiam.policy.instruments import fossil_price_shift
from abiam.schemas import (
    Bank,
    CapacityTranche,
    CapitalFirm,
    CarbonCycleState,
    CentralBank,
    ConsumerFirm,
    DispatchResult,
    EmissionsAccount,
    EnergySector,
    EnergyTechnology,
    FlowTag,
    FuelMarketState,
    FuelReserve,
    FuelType,
    GovernmentBudget,
    Household,
    LaborMarketState,
    MachineVintage,
    Mine,
    PollutionField,
    PowerPlant,
    PriceProcess,
    ScenarioConfig,
    SinkAccount,
    TransferRecord,
    VintageHolding,
)

GREEN_FUELS = {"dsk": (FuelType.GENERIC_GREEN,), "abmiam": (FuelType.GENERIC_GREEN,), "cfhs": (FuelType.SOLAR, FuelType.WIND)}
BROWN_FUELS = {"dsk": (FuelType.GENERIC_BROWN,), "abmiam": (FuelType.GENERIC_BROWN,), "cfhs": (FuelType.GAS, FuelType.COAL)}
CAPACITY_FACTORS = {FuelType.SOLAR: 0.5, FuelType.WIND: 0.6}
INITIAL_EMPLOYMENT = 0.9

COST_TAGS = frozenset({FlowTag.WAGE, FlowTag.ELECTRICITY, FlowTag.FUEL, FlowTag.INTEREST, FlowTag.TAX, FlowTag.FINE})
REVENUE_TAGS = frozenset({FlowTag.CONSUMPTION, FlowTag.ELECTRICITY, FlowTag.FUEL, FlowTag.SUBSIDY})
INCOME_TAGS = frozenset({FlowTag.WAGE, FlowTag.BENEFIT, FlowTag.DIVIDEND})


class StepStats(BaseModel):
    """Flows and counts gathered during one step."""

    output: float = 0.0
    machines: float = 0.0
    consumption: float = 0.0
    investment: float = 0.0
    unemployment: float = 0.0
    bank_failures: int = 0
    firm_exits: int = 0
    damage_events: int = 0
    energy_demand: float = 0.0
    green_share: float = 0.0
    sector_emissions: dict[str, float] = Field(default_factory=dict)
    emitters: dict[str, float] = Field(default_factory=dict)
    extraction: dict[str, float] = Field(default_factory=dict)
    pollution_added: dict[str, float] = Field(default_factory=dict)
    transfers: TransferRecord = Field(default_factory=TransferRecord)
    defaults: int = 0


class World:
    """Mutable state of one replication.

    Agent lists are kept sorted by id; phases iterate them in that order so
    every draw is tied to an agent id, not to a container position.
    """

    def __init__(self, config: ScenarioConfig, seed: int):
        self.config = config
        self.seed = seed
        self.variants = config.variants
        self.policy = config.policy
        self.clock = SimClock(step=0, granularity=config.granularity)
        self.streams = make_streams(seed)
        self.ledger = Ledger()
        self.households: list[Household] = []
        self.c_firms: list[ConsumerFirm] = []
        self.k_firms: list[CapitalFirm] = []
        self.mines: list[Mine] = []
        self.banks: list[Bank] = []
        self.central_bank = CentralBank()
        self.government = GovernmentBudget()
        self.rest_of_world = SinkAccount(id="rest-of-world")
        self.energy: EnergySector | None = None
        self.fuel = FuelMarketState(fuel="fossil", price=1.0)
        self.climate: CarbonCycleState | None = None
        self.emissions = EmissionsAccount()
        self.pending_emissions = 0.0
        self.climate_stepped = False
        self.pollution = PollutionField()
        self.labor: dict[int, LaborMarketState] = {}
        self.market_wage: dict[int, float] = {}
        self.energy_price = 0.0
        self.dispatch = DispatchResult()
        self.stats = StepStats()
        self.price_index_history: list[float] = []
        self.productivity_history: list[float] = []
        self.unemployment_history: list[float] = []
        self.damage_log: list[dict] = []
        self.damage_schedule: list[dict] = []
        self.mean_damage = 0.0
        self.dispatch_trace: list[dict] = []
        self.next_firm_id = 0
        self.initial_bank_equity = 0.0

    # parameters

    def p(self, name: str, default: float | None = None) -> float:
        if default is not None and name not in self.config.parameters:
            return default
        return self.config.path(name, self.clock.step)

    def has(self, name: str) -> bool:
        return name in self.config.parameters

    def vector(self, name: str) -> list[float]:
        value = self.config.parameters[name]
        return [float(v) for v in value] if isinstance(value, list) else [float(value)]

    # lookups

    @property
    def months(self) -> int:
        return self.clock.months_elapsed

    @property
    def active_c_firms(self) -> list[ConsumerFirm]:
        return [f for f in self.c_firms if f.active]

    @property
    def firms(self) -> list:
        return [*self.c_firms, *self.k_firms, *self.mines]

    def agents(self) -> dict:
        return {a.id: a for a in [*self.households, *self.firms]}

    def bank(self, bank_id: str | None) -> Bank | None:
        if bank_id is None:
            return None
        return next((b for b in self.banks if b.id == bank_id), None)

    def debt(self, borrower: str) -> float:
        return sum(loan.principal for bank in self.banks for loan in bank.loans if loan.borrower == borrower)

    def wage_of(self, region: int) -> float:
        return self.market_wage.get(region, self.p("initial_wage"))

    def employers(self) -> list:
        employers = [*self.c_firms, *self.k_firms, *self.mines]
        if self.energy is not None:
            employers.append(self.energy)
        return employers

    def fossil_price(self) -> float:
        """Fuel price after the policy shift in force this step."""
        return fossil_price_shift(self.fuel.price, self.policy.fossil_price_shift, self.clock.step)

    def fuel_prices(self) -> dict[str, float]:
        price = self.fossil_price()
        return {fuel.value: price for fuel in FuelType}

    def carbon_tax(self) -> float:
        path = self.policy.carbon_tax
        return path[min(self.clock.step, len(path) - 1)] if path else 0.0

    # money

    def pay(
        self,
        payer: str,
        payee: str,
        amount: float,
        tag: FlowTag,
        *,
        cost: bool | None = None,
        revenue: bool | None = None,
    ) -> float:
        """Post a flow and book it on the profit-and-loss of both sides.

        Whether the flow is a cost for the payer or revenue for the payee
        follows the tag unless stated.
        """
        if amount <= 0:
            return 0.0
        self.ledger.post(payer, payee, amount, tag)
        source = self.ledger.accounts[payer]
        target = self.ledger.accounts[payee]
        if (tag in COST_TAGS if cost is None else cost) and hasattr(source, "costs"):
            source.costs += amount
        if (tag in REVENUE_TAGS if revenue is None else revenue) and hasattr(target, "revenue"):
            target.revenue += amount
        if isinstance(target, Household) and tag in INCOME_TAGS:
            target.income += amount
            if tag == FlowTag.WAGE:
                target.wage_income += amount
        if isinstance(source, Household) and tag == FlowTag.TAX:
            source.income = max(0.0, source.income - amount)
        return amount

    def price_index(self) -> float:
        firms = self.active_c_firms
        weights = [f.market_share for f in firms]
        if not firms:
            return self.price_index_history[-1] if self.price_index_history else 1.0
        if sum(weights) <= 0:
            return sum(f.price for f in firms) / len(firms)
        return sum(w * f.price for w, f in zip(weights, firms)) / sum(weights)

    def mean_productivity(self) -> float:
        firms = self.active_c_firms
        if not firms:
            return 1.0
        return sum(f.mean_vintage.labor_productivity * f.tfp * f.productivity_factor for f in firms) / len(firms)

    def unemployment(self) -> float:
        if not self.households:
            return 0.0
        return sum(1 for h in self.households if h.employed_by is None) / len(self.households)


def _vintage(world: World) -> MachineVintage:
    pp = world.p("process_productivity")
    return MachineVintage(
        labor_productivity=world.p("initial_labor_productivity"),
        energy_efficiency=world.p("initial_energy_efficiency"),
        emission_intensity=world.p("initial_emission_intensity"),
        price=(1.0 + world.p("k_markup")) * world.p("initial_wage") / pp,
    )


def _initial_energy_price(world: World) -> float:
    if world.variants.dispatch == "none":
        return 0.0
    brown = world.p("fuel_price") / world.p("thermal_efficiency")
    return (1.0 + world.p("energy_markup", 0.1)) * brown


def _build_plants(world: World, demand: float) -> list[PowerPlant]:
    rng = world.streams["world"]
    variant = world.variants.plant_investment
    count = max(1, world.config.population.power_plants)
    greens = round(world.p("power_plants_green_share") * count)
    capacity = max(world.p("plant_capacity"), 1.5 * demand / count)
    lifetime = int(world.p("plant_lifetime"))
    loss = world.p("transmission_loss", 0.0)
    plants = []
    for i in range(count):
        green = i < greens
        palette = GREEN_FUELS[variant] if green else BROWN_FUELS[variant]
        fuel = palette[i % len(palette)]
        age = rng.integers(0, max(1, lifetime // 2))
        plants.append(
            PowerPlant(
                id=f"p{i}",
                fuel=fuel,
                capacity=capacity,
                age=age,
                lifetime=lifetime,
                thermal_efficiency=1.0 if green else world.p("thermal_efficiency"),
                emission_intensity=0.0 if green else world.p("plant_emission_intensity"),
                operating_cost=world.p("plant_operating_cost", 0.0),
                capacity_factor=CAPACITY_FACTORS.get(fuel, 1.0) if world.variants.dispatch == "substeps" else 1.0,
                transmission_loss=loss,
                tranches=[CapacityTranche(capacity=capacity, age=age)] if world.variants.depreciation == "tranche" else [],
            )
        )
    return plants


def _mine_region(index: int, regions: int) -> int:
    """Mines sit outside the first region whenever there is more than one."""
    if regions == 1:
        return 0
    return regions - 1 - (index % (regions - 1))


def build_world(config: ScenarioConfig, seed: int) -> World:
    world = World(config, seed)
    rng = world.streams["world"]
    pop = config.population
    regions = config.regions
    wage = world.p("initial_wage")
    world.market_wage = {r: wage for r in range(regions)}
    world.energy_price = _initial_energy_price(world)
    vintage = _vintage(world)

    propensity = world.p("consumption_propensity", 1.0)
    world.households = [
        Household(
            id=f"h{i}",
            region=i % regions,
            cash=world.p("initial_household_cash"),
            consumption_propensity=propensity,
            permanent_income=wage,
        )
        for i in range(pop.households)
    ]
    world.households.sort(key=lambda h: h.id)

    markup = world.p("markup")
    unit_cost = technology_cost(vintage, wage, world.energy_price)
    price = (1.0 + markup) * unit_cost
    demand = INITIAL_EMPLOYMENT * pop.households * wage / price / pop.consumer_firms
    sectors = int(world.p("sectors", 1.0))
    lifetime = int(world.p("machine_lifetime"))
    units = world.p("machine_units")
    for i in range(pop.consumer_firms):
        firm = ConsumerFirm(
            id=f"c{i}",
            region=i % regions,
            sector=i % sectors,
            technology=config.variants.production,
            cash=world.p("initial_firm_cash"),
            capital=[
                VintageHolding(vintage=vintage.model_copy(update={"age": rng.integers(0, lifetime)}), units=units)
            ],
            price=price,
            markup=markup,
            wage=wage,
            market_share=1.0 / pop.consumer_firms,
            share_history=[1.0 / pop.consumer_firms],
            quality=rng.uniform(0.9, 1.1),
            expected_demand=demand,
            demand=demand,
            sales=demand,
            planned_output=demand,
            price_history=[price],
        )
        firm.labor_demand = math.ceil(labor_for_output(firm.capital, demand) - 1e-9)
        world.c_firms.append(firm)
    world.next_firm_id = pop.consumer_firms

    pp = world.p("process_productivity")
    for i in range(pop.capital_firms):
        world.k_firms.append(
            CapitalFirm(
                id=f"k{i}",
                region=0,
                cash=world.p("initial_firm_cash"),
                frontier=vintage.model_copy(),
                process_productivity=pp,
                emission_intensity=world.p("k_emission_intensity"),
                price=vintage.price,
                markup=world.p("k_markup"),
                wage=wage,
                labor_demand=1,
            )
        )

    shortlist = int(world.p("shortlist_size"))
    k_ids = [k.id for k in world.k_firms]
    for firm in world.c_firms:
        firm.suppliers = rng.shuffled(k_ids)[:shortlist] if k_ids else []
    c_ids = sorted(f.id for f in world.c_firms)
    for household in world.households:
        household.shortlist = rng.shuffled(c_ids)[:shortlist]

    if config.variants.fuel_price == "market-cleared":
        for i in range(pop.mines):
            reserve = FuelReserve(
                region=_mine_region(i, regions),
                fuel="fossil",
                initial_stock=world.p("mine_initial_stock") * rng.uniform(0.5, 1.5),
                base_cost=world.p("fuel_base_cost"),
                curvature=world.p("rogner_curvature"),
                exponent=world.p("rogner_exponent"),
                max_extraction=world.p("mine_max_extraction"),
            )
            world.mines.append(
                Mine(
                    id=f"m{i}",
                    region=reserve.region,
                    cash=world.p("initial_firm_cash"),
                    reserve=reserve,
                    pollution_coefficient=world.p("mine_pollution"),
                    planned_extraction=reserve.max_extraction,
                    wage=wage,
                    labor_demand=math.ceil(reserve.max_extraction / world.p("initial_labor_productivity")),
                )
            )
        world.pollution = PollutionField(
            stocks={m.id: 0.0 for m in world.mines},
            coefficients={m.id: m.pollution_coefficient for m in world.mines},
        )

    world.initial_bank_equity = world.p("initial_bank_equity")
    world.banks = [Bank(id=f"b{i}", cash=world.initial_bank_equity) for i in range(pop.banks)]
    if world.banks:
        for agent in [*world.households, *world.firms]:
            bank = world.banks[rng.integers(0, len(world.banks))]
            agent.bank_id = bank.id
            bank.clients.append(agent.id)

    cb = world.central_bank
    world.central_bank = cb.model_copy(
        update={
            "base_rate": world.p("base_rate"),
            "neutral_rate": world.p("neutral_rate", world.p("base_rate")),
            "inflation_target": world.p("inflation_target", cb.inflation_target),
            "unemployment_target": world.p("unemployment_target", cb.unemployment_target),
            "phi_pi": world.p("taylor_phi_pi", cb.phi_pi),
            "phi_u": world.p("taylor_phi_u", cb.phi_u),
            "credit_multiplier": world.p("credit_multiplier", cb.credit_multiplier),
            "capital_adequacy_ratio": world.p("capital_adequacy", cb.capital_adequacy_ratio),
            "risk_weight": world.p("risk_weight", cb.risk_weight),
            "reserve_ratio": world.p("reserve_ratio"),
        }
    )
    if config.variants.government != "none":
        benefit = "regional_benefit_fraction" if config.variants.government == "grsw" else "benefit_fraction"
        world.government = GovernmentBudget(
            profit_tax=world.p("profit_tax"),
            income_tax=world.p("income_tax"),
            benefit_fraction=world.p(benefit),
        )

    if config.variants.dispatch != "none":
        energy_demand = demand * pop.consumer_firms / vintage.energy_efficiency
        world.energy = EnergySector(
            cash=world.p("initial_energy_cash"),
            technology=EnergyTechnology(
                green_fixed_cost=world.p("green_fixed_cost"),
                brown_emission_intensity=world.p("plant_emission_intensity"),
                brown_thermal_efficiency=world.p("thermal_efficiency"),
            ),
            wage=wage,
            price_history=[world.energy_price],
        )
        world.energy.plants = _build_plants(world, energy_demand)
        world.energy.next_plant = len(world.energy.plants)
        world.stats.energy_demand = energy_demand

    process = PriceProcess(config.variants.fuel_price)
    world.fuel = FuelMarketState(
        fuel="fossil",
        price=world.vector("fuel_price")[0],
        process=process,
        drift=world.p("fuel_drift", 0.0),
        volatility=world.p("fuel_volatility", 0.0),
        path=world.vector("fuel_price") if process == PriceProcess.EXOGENOUS else [],
    )

    climate_variant = config.variants.climate
    climate_params = {
        name: world.p(name)
        for name in VARIANT_PARAMETERS["climate"][climate_variant]
        if name != "regional_baseline_temperature"
    }
    baselines = world.vector("regional_baseline_temperature") if climate_variant == "three-eq" else []
    if baselines and len(baselines) < regions:
        baselines = baselines + [baselines[-1]] * (regions - len(baselines))
    world.climate = initial_state(climate_variant, climate_params, baselines[:regions])
    world.emissions = EmissionsAccount(pre_industrial=max(world.climate.atmosphere, 1.0))

    for account in [
        *world.households,
        *world.c_firms,
        *world.k_firms,
        *world.mines,
        *world.banks,
        world.government,
        world.central_bank,
        world.rest_of_world,
    ]:
        world.ledger.open(account)
    if world.energy is not None:
        world.ledger.open(world.energy)

    world.price_index_history = [world.price_index()]
    world.productivity_history = [world.mean_productivity()]
    world.unemployment_history = [1.0 - INITIAL_EMPLOYMENT]
    return world
