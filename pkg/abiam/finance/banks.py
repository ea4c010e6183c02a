"""Credit supply, allocation and bank resolution."""

import math
from typing import Sequence

from pydantic import BaseModel, Field

from abiam.exceptions import InvalidArgumentError
from abiam.schemas import Bank, Loan


class CreditRequest(BaseModel):
    client: str
    amount: float = Field(ge=0)
    debt: float = 0.0
    net_worth: float = 0.0
    sales: float = 0.0
    profit_rate: float = 0.0
    green: bool = False


class BailoutOutcome(BaseModel):
    injection: float = Field(0.0, ge=0)
    written_off: dict[str, float] = Field(default_factory=dict, description="Peer -> interbank claim lost")
    removed: bool = False
    defaulted: bool = False


def credit_limit(
    bank: Bank,
    variant: str,
    multiplier: float = 2.0,
    capital_adequacy: float = 0.08,
    risk_weight: float = 1.0,
    reserve_ratio: float = 0.1,
    exclude_green: bool = False,
) -> float:
    """New credit the bank may extend this step.

    multiplier: a multiple of deposits less the loan book.
    basel: equity over the capital requirement less risk-weighted loans.
    reserve: liquidity above the minimum reserve.
    With `exclude_green` only brown loans count against the limit.
    """
    outstanding = bank.loan_book - (bank.green_loans if exclude_green else 0.0)
    if variant == "multiplier":
        limit = multiplier * bank.deposits - outstanding
    elif variant == "basel":
        limit = bank.equity / (capital_adequacy * risk_weight) - risk_weight * outstanding
    elif variant == "reserve":
        limit = bank.reserves - reserve_ratio * bank.deposits
    elif variant == "unbounded":
        return math.inf
    elif variant == "none":
        return 0.0
    else:
        raise InvalidArgumentError(f"Unknown credit variant '{variant}'")
    return max(0.0, limit)


def capital_adequacy_path(path: float | Sequence[float], step: int) -> float:
    """Capital adequacy ratio in force at `step`; the last value holds afterwards."""
    if isinstance(path, (int, float)):
        return float(path)
    if not path:
        raise InvalidArgumentError("Capital adequacy path is empty")
    return float(path[min(step, len(path) - 1)])


def pecking_order(clients: Sequence[CreditRequest]) -> list[str]:
    """Clients by descending net-worth-to-sales, zero-sales clients last, ties by id."""

    def key(c: CreditRequest) -> tuple[bool, float, str]:
        if c.sales <= 0:
            return (True, 0.0, c.client)
        return (False, -c.net_worth / c.sales, c.client)

    return [c.client for c in sorted(clients, key=key)]


def grant_loans(
    requests: Sequence[CreditRequest],
    limit: float,
    debt_to_equity_cap: float | None = None,
    debt_to_sales_cap: float | None = None,
    interest_rate: float | None = None,
    lenience: float = 0.0,
) -> list[tuple[str, float]]:
    """Walk the ordered requests granting in full while the limit allows.

    The marginal client receives what is left. Optional screens: a
    debt-to-equity ceiling, a debt-to-sales ceiling and a minimum profit
    rate of `interest_rate - lenience`.
    """
    remaining = max(0.0, limit)
    grants = []
    for request in requests:
        if remaining <= 0:
            break
        amount = request.amount
        if debt_to_equity_cap is not None:
            if request.net_worth <= 0 or request.debt / request.net_worth > debt_to_equity_cap:
                continue
        if debt_to_sales_cap is not None:
            amount = min(amount, max(0.0, debt_to_sales_cap * request.sales - request.debt))
        if interest_rate is not None and request.profit_rate <= interest_rate - lenience:
            continue
        granted = min(amount, remaining)
        if granted > 0:
            grants.append((request.client, granted))
            remaining -= granted
    return grants


def quartile(rank: int, clients: int) -> int:
    """1-based quartile of a 0-based rank within `clients` ordered clients."""
    if clients <= 0:
        return 1
    return min(4, 1 + (4 * rank) // clients)


def loan_rate(base_rate: float, client_quartile: int, markups: Sequence[float]) -> float:
    if client_quartile not in (1, 2, 3, 4):
        raise InvalidArgumentError(f"Quartile must be 1..4, got {client_quartile}")
    if len(markups) != 4 or any(b < a for a, b in zip(markups, markups[1:])):
        raise InvalidArgumentError(f"Markup schedule must hold 4 non-decreasing values, got {markups}")
    return base_rate * (1.0 + markups[client_quartile - 1])


def interbank_borrow(shortfall: float, peers: Sequence[tuple[str, float]]) -> tuple[list[tuple[str, float]], float]:
    """Borrow from the most liquid peers first; returns loans and what stays uncovered."""
    loans = []
    remaining = max(0.0, shortfall)
    for peer, excess in sorted(peers, key=lambda p: (-p[1], p[0])):
        if remaining <= 0:
            break
        amount = min(remaining, max(0.0, excess))
        if amount > 0:
            loans.append((peer, amount))
            remaining -= amount
    return loans, remaining


def excess_liquidity(bank: Bank, reserve_ratio: float) -> float:
    return bank.reserves - reserve_ratio * bank.deposits


def bank_default_and_bailout(bank: Bank, incumbents: Sequence[Bank], kappa: float) -> BailoutOutcome:
    """Resolve a bank with negative equity.

    Peers lose their interbank claims on it, then the government injects
    kappa times the smallest incumbent equity, floored at zero. The bank
    keeps its hole, so equity -10 with an injection of 25 continues at 15.
    A zero injection, which includes having no incumbents, removes the bank.
    """
    if bank.equity >= 0:
        return BailoutOutcome()
    outcome = BailoutOutcome(defaulted=True)
    for peer in incumbents:
        claim = peer.interbank_lent.pop(bank.id, 0.0)
        if claim > 0:
            outcome.written_off[peer.id] = claim
    bank.interbank_borrowed = {}
    floor = min((b.equity for b in incumbents), default=0.0)
    outcome.injection = kappa * max(0.0, floor)
    outcome.removed = outcome.injection <= 0
    return outcome


def loan_payment(loan: Loan) -> tuple[float, float]:
    """(interest, amortisation) due this step."""
    return loan.principal * loan.rate, loan.principal / loan.remaining_term
