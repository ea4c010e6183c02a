"""Fiscal and regulatory instruments. Money moves through the ledger only."""

from typing import Mapping, Sequence

from loguru import logger
from pydantic import BaseModel, Field

from abiam.exceptions import InvalidArgumentError
from abiam.finance.banks import credit_limit
from abiam.kernel.ledger import Ledger, split_exact
from abiam.kernel.rng import RngStream
from abiam.schemas import Bank, FlowTag, Loan, SubsidyScheme, TransferRecord


def carbon_tax_and_recycle(
    emissions: Mapping[str, float],
    rate: float,
    households: Sequence[str],
    ledger: Ledger,
    collector: str = "government",
) -> TransferRecord:
    """Tax each emitter and hand the revenue back as equal lump sums in the same step."""
    if rate < 0:
        raise InvalidArgumentError(f"Carbon tax must be non-negative, got {rate}")
    record = TransferRecord()
    if rate == 0:
        return record
    revenue = 0.0
    for emitter in sorted(emissions):
        tax = rate * max(0.0, emissions[emitter])
        if tax > 0:
            ledger.post(emitter, collector, tax, FlowTag.TAX)
            revenue += tax
    record.tax_revenue = revenue
    if revenue > 0 and households:
        ordered = sorted(households)
        for household, part in zip(ordered, split_exact(revenue, [1.0] * len(ordered))):
            if part > 0:
                ledger.post(collector, household, part, FlowTag.BENEFIT)
        record.lump_sums = revenue
    return record


def carbon_risk_pecking(credit_order: Sequence[str], emission_order: Sequence[str]) -> list[str]:
    """Re-rank clients on the mean of their credit and emission ranks.

    Ties go to the better credit rank, then to the id.
    """
    if sorted(credit_order) != sorted(emission_order) or len(set(credit_order)) != len(credit_order):
        raise InvalidArgumentError("Credit and emission rankings must cover the same clients")
    credit_rank = {client: i + 1 for i, client in enumerate(credit_order)}
    emission_rank = {client: i + 1 for i, client in enumerate(emission_order)}
    return sorted(
        credit_order,
        key=lambda c: ((credit_rank[c] + emission_rank[c]) / 2.0, credit_rank[c], c),
    )


def green_guarantee_settle(
    defaulted: Sequence[tuple[Bank, Loan]],
    ledger: Ledger,
    government: str = "government",
) -> float:
    """Government pays lenders the residual principal of defaulted green loans.

    Returns the payout. Brown loans are left to the caller to write off.
    """
    payout = 0.0
    for bank, loan in defaulted:
        if loan.green and loan.principal > 0:
            ledger.post(government, bank.id, loan.principal, FlowTag.SUBSIDY)
            payout += loan.principal
    if payout:
        logger.debug(f"Green guarantees paid {payout:.4f}")
    return payout


def green_basel_limit(bank: Bank, variant: str, **kwargs: float) -> float:
    """Credit limit with green loans left out of the regulated loan book."""
    return credit_limit(bank, variant, exclude_green=True, **kwargs)


class FineTarget(BaseModel):
    id: str
    region: int = 0
    emissions: float = Field(0.0, ge=0)
    pollution: float = Field(0.0, ge=0)
    capacity: float = Field(0.0, ge=0)


class FineOutcome(BaseModel):
    record: TransferRecord = Field(default_factory=TransferRecord)
    fines: dict[str, float] = Field(default_factory=dict)
    subsidies: dict[str, float] = Field(default_factory=dict)


def fines_and_subsidies(
    targets: Sequence[FineTarget],
    scheme: SubsidyScheme,
    emission_fine: float,
    pollution_fine: float,
    ledger: Ledger,
    north_share: float = 0.0,
    grant_factor: float = 2.0,
    north_region: int = 0,
    institution: str = "government",
) -> FineOutcome:
    """Fine emitters and polluters, then pay the funds back as retrofit subsidies.

    Regional schemes pay each region's pool to its firms in proportion to
    capacity. The north-south scheme moves `north_share` of the northern
    pool to the other regions. The grant scheme multiplies every pool by
    `grant_factor`; the extra is paid by `institution`.
    """
    if emission_fine < 0 or pollution_fine < 0:
        raise InvalidArgumentError("Fine rates must be non-negative")
    outcome = FineOutcome()
    targets = sorted(targets, key=lambda t: t.id)
    pools: dict[int, float] = {}
    for target in targets:
        fine = emission_fine * target.emissions + pollution_fine * target.pollution
        if fine > 0:
            ledger.post(target.id, institution, fine, FlowTag.FINE)
            outcome.fines[target.id] = fine
            outcome.record.fines += fine
            pools[target.region] = pools.get(target.region, 0.0) + fine
    if scheme == SubsidyScheme.NONE or not pools:
        return outcome

    if scheme == SubsidyScheme.NORTH_SOUTH and north_region in pools:
        southern = sorted({t.region for t in targets if t.region != north_region})
        if southern:
            moved = north_share * pools[north_region]
            pools[north_region] -= moved
            for region, part in zip(southern, split_exact(moved, [1.0] * len(southern))):
                pools[region] = pools.get(region, 0.0) + part

    for region in sorted(pools):
        recipients = [t for t in targets if t.region == region]
        base = pools[region]
        if not recipients or base <= 0:
            continue
        fund = base * grant_factor if scheme == SubsidyScheme.GRANT else base
        parts = split_exact(fund, [t.capacity for t in recipients])
        for recipient, part in zip(recipients, parts):
            if part > 0:
                ledger.post(institution, recipient.id, part, FlowTag.SUBSIDY)
                outcome.subsidies[recipient.id] = outcome.subsidies.get(recipient.id, 0.0) + part
        outcome.record.subsidies += fund
        if scheme == SubsidyScheme.GRANT:
            outcome.record.grants += fund - base
    return outcome


def retrofit(intensity: float, subsidy: float, efficiency: float, floor: float) -> float:
    """Intensity after spending `subsidy` on retrofitting, never below `floor`."""
    if intensity <= floor:
        return intensity
    return max(floor, intensity - efficiency * max(0.0, subsidy))


def fossil_price_shift(price: float, multipliers: Sequence[float], step: int) -> float:
    if not multipliers:
        return price
    multiplier = multipliers[min(step, len(multipliers) - 1)]
    if multiplier <= 0:
        raise InvalidArgumentError(f"Fossil price multiplier must be positive, got {multiplier}")
    return price * multiplier


def renewable_mandate(override: float, rng: RngStream) -> str:
    """Plant type drawn with the mandated renewable probability."""
    if not 0 <= override <= 1:
        raise InvalidArgumentError(f"Renewable probability must lie in [0, 1], got {override}")
    return "green" if rng.random() < override else "brown"


def scc_tax_path(scc: Sequence[float], factor: float = 1.0) -> list[float]:
    """Carbon tax path proportional to a social-cost-of-carbon series."""
    if factor < 0 or any(v < 0 for v in scc):
        raise InvalidArgumentError("Social cost series and factor must be non-negative")
    return [factor * v for v in scc]
