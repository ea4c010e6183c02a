from typing import Sequence

from loguru import logger
from pydantic import BaseModel, Field

from abiam.kernel.ledger import Ledger, split_exact
from abiam.schemas import Bank, CentralBank, FlowTag, GovernmentBudget


class FiscalOutcome(BaseModel):
    benefits: float = Field(0.0, ge=0)
    taxes: float = Field(0.0, ge=0)
    interest: float = Field(0.0, ge=0)
    deficit: float = 0.0
    new_bonds: float = Field(0.0, ge=0)
    redeemed: float = Field(0.0, ge=0)


def taylor_rate(inflation: float, unemployment: float, central_bank: CentralBank) -> float:
    rate = (
        central_bank.neutral_rate
        + central_bank.phi_pi * (inflation - central_bank.inflation_target)
        - central_bank.phi_u * (unemployment - central_bank.unemployment_target)
    )
    return max(0.0, rate)


def government_step(
    budget: GovernmentBudget,
    ledger: Ledger,
    benefits: Sequence[tuple[str, float]],
    taxes: Sequence[tuple[str, float]],
    banks: Sequence[Bank],
    central_bank: CentralBank,
    base_rate: float,
    bank_bond_share: float = 0.0,
) -> FiscalOutcome:
    """One fiscal step.

    Bond interest goes to the holders, taxes come in, benefits go out. A
    deficit is covered by new bonds, bought by banks for `bank_bond_share`
    and by the central bank for the rest; a surplus redeems central-bank
    holdings first.
    """
    outcome = FiscalOutcome()
    start = budget.cash
    bank_holdings = {b.id: b.bonds for b in banks if b.bonds > 0}
    central_holdings = max(0.0, budget.bond_stock - sum(bank_holdings.values()))
    if central_holdings > 0 and base_rate > 0:
        interest = central_holdings * base_rate
        ledger.post(budget.id, central_bank.id, interest, FlowTag.INTEREST)
        outcome.interest += interest
    for bank_id in sorted(bank_holdings):
        interest = bank_holdings[bank_id] * base_rate
        if interest > 0:
            ledger.post(budget.id, bank_id, interest, FlowTag.INTEREST)
            outcome.interest += interest

    for payer, amount in taxes:
        if amount > 0:
            ledger.post(payer, budget.id, amount, FlowTag.TAX)
            outcome.taxes += amount
    for payee, amount in benefits:
        if amount > 0:
            ledger.post(budget.id, payee, amount, FlowTag.BENEFIT)
            outcome.benefits += amount

    outcome.deficit = start - budget.cash
    if outcome.deficit > 0:
        from_banks = outcome.deficit * bank_bond_share if banks else 0.0
        solvent = sorted((b for b in banks if b.equity > 0), key=lambda b: b.id)
        if not solvent:
            from_banks = 0.0
        parts = split_exact(from_banks, [b.equity for b in solvent]) if from_banks > 0 else []
        for bank, part in zip(solvent, parts):
            if part > 0:
                ledger.post(bank.id, budget.id, part, FlowTag.LOAN)
                bank.bonds += part
        central = outcome.deficit - sum(parts)
        if central > 0:
            ledger.post(central_bank.id, budget.id, central, FlowTag.LOAN)
        budget.bond_stock += outcome.deficit
        outcome.new_bonds = outcome.deficit
    elif outcome.deficit < 0 and central_holdings > 0:
        redeemed = min(-outcome.deficit, central_holdings)
        ledger.post(budget.id, central_bank.id, redeemed, FlowTag.REPAYMENT)
        budget.bond_stock -= redeemed
        outcome.redeemed = redeemed
    if outcome.benefits or outcome.taxes:
        logger.debug(
            f"Fiscal step: taxes {outcome.taxes:.4f}, benefits {outcome.benefits:.4f}, bonds {budget.bond_stock:.4f}"
        )
    return outcome
