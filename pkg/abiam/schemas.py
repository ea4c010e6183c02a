from enum import Enum
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, Field


class Granularity(str, Enum):
    MONTH = "month"
    QUARTER = "quarter"
    YEAR = "year"


MONTHS_PER_STEP = {
    Granularity.MONTH: 1,
    Granularity.QUARTER: 3,
    Granularity.YEAR: 12,
}


class FlowTag(str, Enum):
    WAGE = "wage"
    CONSUMPTION = "consumption"
    INVESTMENT = "investment"
    LOAN = "loan"
    REPAYMENT = "repayment"
    INTEREST = "interest"
    TAX = "tax"
    BENEFIT = "benefit"
    DIVIDEND = "dividend"
    FINE = "fine"
    SUBSIDY = "subsidy"
    BAILOUT = "bailout"
    FUEL = "fuel"
    ELECTRICITY = "electricity"


class FuelType(str, Enum):
    COAL = "coal"
    GAS = "gas"
    OIL = "oil"
    NUCLEAR = "nuclear"
    HYDRO = "hydro"
    WIND = "wind"
    SOLAR = "solar"
    GENERIC_BROWN = "generic-brown"
    GENERIC_GREEN = "generic-green"


RENEWABLE_FUELS = frozenset(
    {FuelType.HYDRO, FuelType.WIND, FuelType.SOLAR, FuelType.GENERIC_GREEN}
)
STORAGE_FUELS = frozenset({FuelType.WIND, FuelType.SOLAR})


class DamageChannel(str, Enum):
    CAPITAL = "capital"
    LABOR_PRODUCTIVITY = "labor-productivity"
    INVENTORY = "inventory"
    ENERGY_EFFICIENCY = "energy-efficiency"
    BUDGET = "budget"
    OUTPUT = "output"


class PriceProcess(str, Enum):
    EXOGENOUS = "exogenous-path"
    GBM = "geometric-brownian"
    MARKET = "market-cleared"


class SubsidyScheme(str, Enum):
    NONE = "none"
    REGIONAL = "regional-redistribution"
    NORTH_SOUTH = "north-south-transfer"
    GRANT = "grant-multiplied"


# ---------------------------------------------------------------- macro


class MachineVintage(BaseModel):
    labor_productivity: float = Field(gt=0, description="Output per worker")
    energy_efficiency: float = Field(gt=0, description="Output per energy unit")
    emission_intensity: float = Field(ge=0, description="CO2 per unit of output")
    price: float = Field(default=0.0, ge=0, description="Acquisition price per unit")
    age: int = Field(default=0, ge=0, description="Age in steps")


class VintageHolding(BaseModel):
    vintage: MachineVintage
    units: float = Field(ge=0, description="Machine units, one worker each")


class Household(BaseModel):
    id: str
    region: int = 0
    cash: float = Field(0.0, description="Deposit wealth")
    savings: float = Field(0.0, description="Wealth carried over from the last step")
    wage_income: float = 0.0
    income: float = Field(0.0, description="Receipts since the last goods market")
    employed_by: str | None = None
    consumption_propensity: float = Field(1.0, ge=0, le=1)
    shortlist: list[str] = Field(default_factory=list)
    labor_productivity: float = Field(1.0, gt=0, le=1)
    tenure: int = Field(0, ge=0, description="Months with the current employer")
    permanent_income: float = 0.0
    budget_damage: float = Field(0.0, ge=0, le=1)
    bank_id: str | None = None

    @property
    def wealth(self) -> float:
        return self.cash


class Firm(BaseModel):
    """State shared by every producing agent."""

    id: str
    region: int = 0
    cash: float = 0.0
    capital: list[VintageHolding] = Field(default_factory=list)
    inventory: float = Field(0.0, ge=0)
    price: float = Field(1.0, gt=0)
    markup: float = Field(0.2, ge=0)
    wage: float = 1.0
    price_history: list[float] = Field(default_factory=list)
    workers: list[str] = Field(default_factory=list)
    labor_demand: int = 0
    expected_demand: float = 0.0
    demand: float = 0.0
    sales: float = 0.0
    revenue: float = 0.0
    costs: float = 0.0
    profit: float = 0.0
    output: float = 0.0
    planned_output: float = 0.0
    emissions: float = 0.0
    productivity_factor: float = 1.0
    output_damage: float = Field(0.0, ge=0, le=1)
    bank_id: str | None = None
    dormant_until: int | None = None
    defaulted: bool = False
    suppliers: list[str] = Field(default_factory=list)

    @property
    def capital_units(self) -> float:
        return sum(h.units for h in self.capital)

    @property
    def active(self) -> bool:
        return self.dormant_until is None


class ConsumerFirm(Firm):
    sector: int = 0
    market_share: float = Field(0.0, ge=0, le=1)
    share_history: list[float] = Field(default_factory=list)
    quality: float = 1.0
    technology: str = Field("vintage-crs", pattern="^(vintage-crs|ces|leontief)$")
    tfp: float = 1.0
    energy_factor: float = 1.0
    energy_use: float = 0.0
    energy_demand: float = 0.0
    capital_demand: float = 0.0
    loan_extensions: int = 0

    @property
    def mean_vintage(self) -> MachineVintage:
        return average_vintage(self.capital)


class CapitalFirm(Firm):
    frontier: MachineVintage
    rd_budget: float = Field(0.0, ge=0)
    process_productivity: float = Field(1.0, gt=0, description="Machines per worker")
    emission_intensity: float = Field(0.0, ge=0, description="CO2 per machine produced")
    order_book: float = Field(0.0, ge=0)
    orders: dict[str, float] = Field(default_factory=dict)
    resource_stock: float = Field(0.0, ge=0)


class Mine(Firm):
    fuel: str = "resource"
    reserve: "FuelReserve | None" = None
    pollution_coefficient: float = Field(0.0, ge=0)
    planned_extraction: float = 0.0
    bankrupt: bool = False


def average_vintage(capital: list[VintageHolding]) -> MachineVintage:
    units = sum(h.units for h in capital)
    if units <= 0:
        return MachineVintage(labor_productivity=1.0, energy_efficiency=1.0, emission_intensity=0.0)
    return MachineVintage(
        labor_productivity=sum(h.vintage.labor_productivity * h.units for h in capital) / units,
        energy_efficiency=sum(h.vintage.energy_efficiency * h.units for h in capital) / units,
        emission_intensity=sum(h.vintage.emission_intensity * h.units for h in capital) / units,
        price=sum(h.vintage.price * h.units for h in capital) / units,
    )


class LaborMarketState(BaseModel):
    region: int
    market_wage: float = 0.0
    unemployment_rate: float = Field(ge=0, le=1)
    matches: list[tuple[str, str]] = Field(default_factory=list)


# ---------------------------------------------------------------- finance


class Loan(BaseModel):
    borrower: str
    principal: float = Field(ge=0)
    rate: float = Field(ge=0)
    remaining_term: int = Field(ge=1)
    green: bool = False
    extended: bool = False


class Bank(BaseModel):
    id: str
    cash: float = 0.0
    deposits: float = Field(0.0, ge=0)
    loans: list[Loan] = Field(default_factory=list)
    bonds: float = Field(0.0, ge=0)
    interbank_lent: dict[str, float] = Field(default_factory=dict)
    interbank_borrowed: dict[str, float] = Field(default_factory=dict)
    clients: list[str] = Field(default_factory=list)
    failed: bool = False

    @property
    def loan_book(self) -> float:
        return sum(loan.principal for loan in self.loans)

    @property
    def green_loans(self) -> float:
        return sum(loan.principal for loan in self.loans if loan.green)

    @property
    def interbank_net(self) -> float:
        """Interbank liabilities net of interbank claims."""
        return sum(self.interbank_borrowed.values()) - sum(self.interbank_lent.values())

    @property
    def equity(self) -> float:
        return self.cash + self.loan_book + self.bonds - self.interbank_net

    @property
    def reserves(self) -> float:
        return self.cash + self.deposits

    def accounting_gap(self) -> float:
        assets = self.reserves + self.loan_book + self.bonds
        return assets - (self.deposits + self.equity + self.interbank_net)


class CentralBank(BaseModel):
    id: str = "central-bank"
    cash: float = 0.0
    base_rate: float = Field(0.01, ge=0)
    neutral_rate: float = 0.01
    inflation_target: float = 0.005
    unemployment_target: float = 0.05
    phi_pi: float = 1.5
    phi_u: float = 0.5
    credit_multiplier: float = 2.0
    capital_adequacy_ratio: float = 0.08
    risk_weight: float = 1.0
    reserve_ratio: float = 0.1


class GovernmentBudget(BaseModel):
    id: str = "government"
    cash: float = 0.0
    bond_stock: float = Field(0.0, ge=0)
    profit_tax: float = Field(0.0, ge=0, le=1)
    income_tax: float = Field(0.0, ge=0, le=1)
    benefit_fraction: float = Field(0.0, ge=0)

    @property
    def balance(self) -> float:
        return self.cash


class SinkAccount(BaseModel):
    id: str
    cash: float = 0.0


# ---------------------------------------------------------------- energy


class CapacityTranche(BaseModel):
    capacity: float = Field(gt=0)
    age: int = Field(0, ge=0)


class PowerPlant(BaseModel):
    id: str
    region: int = 0
    fuel: FuelType
    capacity: float = Field(gt=0, description="Energy per step")
    storage_capacity: float = Field(0.0, ge=0)
    storage_level: float = Field(0.0, ge=0)
    age: int = Field(0, ge=0)
    lifetime: int = Field(gt=0)
    thermal_efficiency: float = Field(1.0, ge=0, le=1)
    emission_intensity: float = Field(0.0, ge=0, description="CO2 per energy unit")
    fixed_cost: float = Field(0.0, ge=0)
    operating_cost: float = Field(0.0, ge=0)
    capacity_factor: float = Field(1.0, ge=0, le=1)
    transmission_loss: float = Field(0.0, ge=0, lt=1)
    tfp: float = Field(1.0, gt=0)
    tranches: list[CapacityTranche] = Field(default_factory=list)

    @property
    def is_green(self) -> bool:
        return self.fuel in RENEWABLE_FUELS


class DispatchResult(BaseModel):
    production: dict[str, float] = Field(default_factory=dict)
    price: float = Field(0.0, ge=0)
    unmet: float = Field(0.0, ge=0)
    emissions: float = Field(0.0, ge=0)
    fuel_consumed: dict[str, float] = Field(default_factory=dict)
    demand: float = Field(0.0, ge=0)

    @property
    def total_production(self) -> float:
        return sum(self.production.values())


class FuelReserve(BaseModel):
    region: int
    fuel: str
    initial_stock: float = Field(gt=0)
    cumulative_extracted: float = Field(0.0, ge=0)
    base_cost: float = Field(gt=0, description="Rogner c0")
    curvature: float = Field(gt=0, description="Rogner gamma")
    exponent: float = Field(gt=0, description="Rogner kappa")
    max_extraction: float = Field(gt=0)

    @property
    def remaining(self) -> float:
        return max(0.0, self.initial_stock - self.cumulative_extracted)


class FuelMarketState(BaseModel):
    fuel: str
    price: float = Field(gt=0)
    process: PriceProcess = PriceProcess.EXOGENOUS
    drift: float = 0.0
    volatility: float = Field(0.0, ge=0)
    path: list[float] = Field(default_factory=list)


class EnergyTechnology(BaseModel):
    green_fixed_cost: float = Field(gt=0)
    brown_emission_intensity: float = Field(ge=0)
    brown_thermal_efficiency: float = Field(gt=0, le=1)


class ConstructionOrder(BaseModel):
    fuel: FuelType
    capacity: float = Field(gt=0)
    fixed_cost: float = Field(0.0, ge=0)
    storage_capacity: float = Field(0.0, ge=0)


class EnergySector(BaseModel):
    id: str = "energy"
    cash: float = 0.0
    plants: list[PowerPlant] = Field(default_factory=list)
    technology: EnergyTechnology
    green_revenue: float = 0.0
    brown_revenue: float = 0.0
    price_history: list[float] = Field(default_factory=list)
    workers: list[str] = Field(default_factory=list)
    labor_demand: int = 0
    wage: float = 1.0
    revenue: float = 0.0
    costs: float = 0.0
    profit: float = 0.0
    next_plant: int = 0
    demand_history: list[float] = Field(default_factory=list)

    @property
    def capacity(self) -> float:
        return sum(p.capacity for p in self.plants)


# ---------------------------------------------------------------- climate


class EmissionsAccount(BaseModel):
    by_sector: dict[str, float] = Field(default_factory=dict)
    cumulative: float = Field(0.0, ge=0)
    annual: float = Field(0.0, ge=0, description="Emissions of the latest step")
    pre_industrial: float = Field(1.0, gt=0)

    @property
    def total(self) -> float:
        return sum(self.by_sector.values())


class CarbonCycleState(BaseModel):
    variant: str = Field(pattern="^(two-box|tcre|permanent-transient|three-eq|decay)$")
    atmosphere: float = 0.0
    ocean: float = 0.0
    permanent: float = 0.0
    transient: float = 0.0
    cumulative: float = 0.0
    concentration: float = Field(0.0, ge=0)
    temperature: float = 0.0
    regional_baselines: list[float] = Field(default_factory=list)
    regional_temperatures: list[float] = Field(default_factory=list)
    temperature_history: list[float] = Field(default_factory=list)
    parameters: dict[str, float] = Field(default_factory=dict)


class PollutionField(BaseModel):
    stocks: dict[str, float] = Field(default_factory=dict)
    coefficients: dict[str, float] = Field(default_factory=dict)


# ---------------------------------------------------------------- damages


class DamageSchedule(BaseModel):
    variant: str = Field(
        pattern="^(none|beta-stochastic|deterministic-quadratic|wealth-elastic|regional-deterministic|disaster-count)$"
    )
    parameters: dict[str, float] = Field(default_factory=dict)


class DamageEvent(BaseModel):
    target: str
    channel: DamageChannel
    magnitude: float = Field(ge=0, le=1)


class BetaParams(NamedTuple):
    alpha: float
    beta: float
    mean: float

    @property
    def degenerate(self) -> bool:
        return self.mean <= 0.0


# ---------------------------------------------------------------- policy


class PolicySet(BaseModel):
    carbon_tax: list[float] = Field(default_factory=lambda: [0.0], description="Tax per CO2 per step")
    carbon_risk_adjustment: bool = False
    green_guarantee: bool = False
    green_basel_exemption: bool = False
    emission_fine: float = Field(0.0, ge=0)
    pollution_fine: float = Field(0.0, ge=0)
    subsidy_scheme: SubsidyScheme = SubsidyScheme.NONE
    fossil_price_shift: list[float] = Field(default_factory=lambda: [1.0])
    renewable_override: float | None = Field(None, ge=0, le=1)
    north_share: float = Field(0.0, ge=0, le=1)
    grant_factor: float = Field(2.0, ge=1)
    retrofit_efficiency: float = Field(0.0, ge=0)
    retrofit_floor: float = Field(0.0, ge=0)


class TransferRecord(BaseModel):
    fines: float = Field(0.0, ge=0)
    subsidies: float = Field(0.0, ge=0)
    tax_revenue: float = Field(0.0, ge=0)
    lump_sums: float = Field(0.0, ge=0)
    guarantee_payouts: float = Field(0.0, ge=0)
    grants: float = Field(0.0, ge=0)


# ---------------------------------------------------------------- kernel


class VariantSelection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    production: str = Field("vintage-crs", pattern="^(vintage-crs|ces|leontief)$")
    pricing: str = Field("markup", pattern="^(markup|tatonnement)$")
    planning: str = Field("dsk", pattern="^(dsk|abmiam|cfhs)$")
    wage: str = Field("dsk", pattern="^(dsk|grsw|abmiam)$")
    household: str = Field("dsk", pattern="^(dsk|abmiam|cfhs|grsw)$")
    goods_market: str = Field("share", pattern="^(share|logit|stone-geary|shortlist)$")
    labor: str = Field("random", pattern="^(random|constrained)$")
    innovation: str = Field("nelson-winter", pattern="^(nelson-winter|exogenous|none)$")
    exit: str = Field("dsk", pattern="^(dsk|abmiam|grsw)$")
    credit: str = Field("multiplier", pattern="^(multiplier|basel|reserve|unbounded|none)$")
    dispatch: str = Field("merit-order", pattern="^(merit-order|cournot|substeps|none)$")
    plant_investment: str = Field("dsk", pattern="^(dsk|abmiam|cfhs)$")
    depreciation: str = Field("lifetime", pattern="^(lifetime|tranche)$")
    fuel_price: str = Field("exogenous-path", pattern="^(exogenous-path|geometric-brownian|market-cleared)$")
    emission_sources: str = Field("dsk", pattern="^(dsk|abmiam|cfhs|grsw)$")
    climate: str = Field("two-box", pattern="^(two-box|tcre|permanent-transient|three-eq|decay)$")
    damage: str = Field(
        "beta-stochastic",
        pattern="^(none|beta-stochastic|deterministic-quadratic|wealth-elastic|regional-deterministic|disaster-count)$",
    )
    damage_channel: str = Field(
        "mixed", pattern="^(capital|labor-productivity|inventory|energy-efficiency|mixed)$"
    )
    monetary: str = Field("fixed", pattern="^(fixed|taylor)$")
    government: str = Field("dsk", pattern="^(dsk|dskfin|grsw|none)$")
    policy_set: list[str] = Field(default_factory=list)


class Population(BaseModel):
    model_config = ConfigDict(extra="forbid")

    households: int = Field(200, ge=1)
    consumer_firms: int = Field(50, ge=1)
    capital_firms: int = Field(20, ge=0)
    banks: int = Field(1, ge=0)
    power_plants: int = Field(0, ge=0)
    mines: int = Field(0, ge=0)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    preset: str = "custom"
    granularity: Granularity = Granularity.QUARTER
    regions: int = Field(1, ge=1)
    horizon: int = Field(400, ge=0)
    variants: VariantSelection = Field(default_factory=VariantSelection)
    population: Population = Field(default_factory=Population)
    parameters: dict[str, float | list[float]] = Field(default_factory=dict)
    policy: PolicySet = Field(default_factory=PolicySet)

    def param(self, name: str) -> float:
        value = self.parameters[name]
        return float(value[0]) if isinstance(value, list) else float(value)

    def path(self, name: str, step: int) -> float:
        value = self.parameters[name]
        if isinstance(value, list):
            return float(value[min(step, len(value) - 1)])
        return float(value)


class RunResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    preset: str
    seed: int
    series: dict[str, list[float]] = Field(description="Observable name -> per-step values")
    residuals: list[float] = Field(default_factory=list)
    damage_log: list[dict] = Field(default_factory=list)
    damage_schedule: list[dict] = Field(default_factory=list, description="Temperature and mean damage per climate step")
    dispatch_trace: list[dict] = Field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.residuals)


class RunRequest(BaseModel):
    config_path: str | None = None
    preset: str | None = None
    overrides: list[str] = Field(default_factory=list, description="KEY=VALUE assignments")
    seed: int = 0
    replications: int = Field(1, ge=1)
    horizon: int | None = Field(None, ge=0)
    output_dir: str = "results"
    emit: list[str] = Field(default_factory=lambda: ["series-csv", "summary-json"])
    plot: list[str] = Field(
        default_factory=lambda: ["gdp", "temperature", "unemployment", "emissions"],
        description="Observables written as plot data when `plotdata` is emitted",
    )
    workers: int = Field(1, ge=1)


class ComparisonReport(BaseModel):
    seeds: list[int]
    micro_final_output: list[float]
    aggregate_final_output: list[float]
    # None where the aggregate arm ends without output
    ratios: list[float | None]
    micro_mean_shock: float
    aggregate_mean_shock: float
    zeta1: float
    zeta2: float
    fit_residual: float
    fraction_micro_below: float
    median_ratio: float | None


Mine.model_rebuild()
