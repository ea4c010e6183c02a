"""Credit-phase steps: loan service, new credit, interbank and resolution."""

from loguru import logger

from abiam.finance.banks import (
    CreditRequest,
    bank_default_and_bailout,
    capital_adequacy_path,
    credit_limit,
    excess_liquidity,
    grant_loans,
    interbank_borrow,
    loan_payment,
    loan_rate,
    pecking_order,
    quartile,
)
from abiam.kernel.world import World
from abiam.macro.firms import loan_extension
from abiam.policy.instruments import carbon_risk_pecking, green_basel_limit, green_guarantee_settle
from abiam.schemas import Bank, FlowTag, Loan


def _borrowers(world: World) -> dict:
    agents = world.agents()
    if world.energy is not None:
        agents[world.energy.id] = world.energy
    return agents


def refresh_deposits(world: World) -> None:
    """Deposits are the positive balances of each bank's clients."""
    agents = _borrowers(world)
    for bank in world.banks:
        bank.deposits = sum(max(0.0, agents[c].cash) for c in bank.clients if c in agents)


def write_off(world: World, borrower: str) -> float:
    """Drop every loan of `borrower`; lenders take the loss on equity."""
    lost = 0.0
    for bank in world.banks:
        kept = []
        for loan in bank.loans:
            if loan.borrower == borrower:
                lost += loan.principal
            else:
                kept.append(loan)
        bank.loans = kept
    if lost > 0:
        logger.debug(f"Wrote off {lost:.4f} of loans to {borrower}")
    return lost


def _default(world: World, bank: Bank, loan: Loan, borrower) -> None:
    if loan.green and world.policy.green_guarantee:
        paid = green_guarantee_settle([(bank, loan)], world.ledger, world.government.id)
        world.stats.transfers.guarantee_payouts += paid
    if borrower is not None and hasattr(borrower, "defaulted"):
        borrower.defaulted = True


def service_loans(world: World) -> None:
    """Collect interest and amortisation; a borrower that cannot pay defaults on all its loans."""
    agents = _borrowers(world)
    if world.variants.exit == "abmiam":
        threshold = world.p("loan_extension_share")
        steps = int(world.p("loan_extension_steps"))
        for firm in world.active_c_firms:
            loans = [loan for bank in world.banks for loan in bank.loans if loan.borrower == firm.id]
            firm.loan_extensions += loan_extension(firm.market_share, loans, threshold, steps)

    defaulted: set[str] = set()
    for bank in world.banks:
        kept = []
        for loan in bank.loans:
            borrower = agents.get(loan.borrower)
            if borrower is None or loan.borrower in defaulted:
                _default(world, bank, loan, borrower)
                continue
            interest, amortisation = loan_payment(loan)
            if borrower.cash < interest + amortisation:
                defaulted.add(loan.borrower)
                world.stats.defaults += 1
                _default(world, bank, loan, borrower)
                continue
            world.pay(borrower.id, bank.id, interest, FlowTag.INTEREST)
            world.pay(borrower.id, bank.id, amortisation, FlowTag.REPAYMENT)
            loan.principal -= amortisation
            loan.remaining_term -= 1
            if loan.remaining_term > 0 and loan.principal > 1e-12:
                kept.append(loan)
        bank.loans = kept
    # loans serviced before the default surfaced are lost as well
    for borrower_id in sorted(defaulted):
        for bank in world.banks:
            for loan in bank.loans:
                if loan.borrower == borrower_id:
                    _default(world, bank, loan, agents.get(borrower_id))
        write_off(world, borrower_id)
    if defaulted:
        logger.debug(f"{len(defaulted)} borrowers defaulted at step {world.clock.step}")

    rate = world.central_bank.base_rate
    banks = {b.id: b for b in world.banks}
    for bank in world.banks:
        for lender_id, principal in sorted(bank.interbank_borrowed.items()):
            lender = banks.get(lender_id)
            if lender is None:
                continue
            world.pay(bank.id, lender_id, principal, FlowTag.REPAYMENT)
            world.pay(bank.id, lender_id, principal * rate, FlowTag.INTEREST)
            lender.interbank_lent.pop(bank.id, None)
        bank.interbank_borrowed = {}


def _financing_need(world: World, firm, machine_price: float) -> float:
    bill = firm.wage * firm.labor_demand + world.energy_price * firm.energy_demand
    return max(0.0, bill + firm.capital_demand * machine_price - firm.cash)


def _credit_requests(world: World, bank: Bank, machine_price: float, green_threshold: float) -> list[CreditRequest]:
    clients = set(bank.clients)
    requests = []
    for firm in world.active_c_firms:
        if firm.id not in clients:
            continue
        need = _financing_need(world, firm, machine_price)
        if need <= 0:
            continue
        turnover = firm.sales * firm.price
        requests.append(
            CreditRequest(
                client=firm.id,
                amount=need,
                debt=world.debt(firm.id),
                net_worth=firm.cash,
                sales=turnover,
                profit_rate=firm.profit / turnover if turnover > 0 else 0.0,
                green=firm.mean_vintage.emission_intensity <= green_threshold,
            )
        )
    return requests


def _limit(world: World, bank: Bank) -> float:
    variant = world.variants.credit
    cb = world.central_bank
    adequacy = cb.capital_adequacy_ratio
    if variant == "basel":
        adequacy = capital_adequacy_path(world.config.parameters["capital_adequacy"], world.clock.step)
    kwargs = {
        "multiplier": cb.credit_multiplier,
        "capital_adequacy": adequacy,
        "risk_weight": cb.risk_weight,
        "reserve_ratio": cb.reserve_ratio,
    }
    if world.policy.green_basel_exemption:
        return green_basel_limit(bank, variant, **kwargs)
    return credit_limit(bank, variant, **kwargs)


def _screens(world: World) -> dict:
    variant = world.variants.credit
    if variant == "multiplier":
        return {"debt_to_sales_cap": world.p("debt_to_sales_cap")}
    if variant == "reserve":
        return {"debt_to_equity_cap": world.p("debt_to_equity_cap")}
    if variant == "unbounded":
        return {"interest_rate": world.central_bank.base_rate, "lenience": world.p("profit_lenience")}
    return {}


def credit_phase(world: World) -> None:
    if world.variants.credit == "none" or not world.banks:
        return
    refresh_deposits(world)
    base = world.central_bank.base_rate
    markups = world.vector("loan_markups")
    term = int(world.p("loan_term"))
    threshold = world.p("green_intensity_threshold", 0.5 * world.p("initial_emission_intensity"))
    machine_price = (
        sum(k.price for k in world.k_firms) / len(world.k_firms) if world.k_firms else 0.0
    )
    emissions = {f.id: f.emissions for f in world.c_firms}
    for bank in world.banks:
        requests = _credit_requests(world, bank, machine_price, threshold)
        if not requests:
            continue
        order = pecking_order(requests)
        if world.policy.carbon_risk_adjustment:
            order = carbon_risk_pecking(order, sorted(order, key=lambda c: (emissions.get(c, 0.0), c)))
        by_client = {r.client: r for r in requests}
        ranked = [by_client[c] for c in order]
        rank = {c: i for i, c in enumerate(order)}
        for client, amount in grant_loans(ranked, _limit(world, bank), **_screens(world)):
            rate = loan_rate(base, quartile(rank[client], len(order)), markups)
            world.pay(bank.id, client, amount, FlowTag.LOAN)
            bank.loans.append(
                Loan(borrower=client, principal=amount, rate=rate, remaining_term=term, green=by_client[client].green)
            )
    refresh_deposits(world)
    _interbank(world)


def _interbank(world: World) -> None:
    ratio = world.central_bank.reserve_ratio
    for bank in world.banks:
        shortfall = ratio * bank.deposits - bank.reserves
        if shortfall <= 0:
            continue
        peers = [(b.id, excess_liquidity(b, ratio)) for b in world.banks if b.id != bank.id]
        loans, uncovered = interbank_borrow(shortfall, [(p, e) for p, e in peers if e > 0])
        lenders = {b.id: b for b in world.banks}
        for lender_id, amount in loans:
            world.pay(lender_id, bank.id, amount, FlowTag.LOAN)
            lenders[lender_id].interbank_lent[bank.id] = lenders[lender_id].interbank_lent.get(bank.id, 0.0) + amount
            bank.interbank_borrowed[lender_id] = bank.interbank_borrowed.get(lender_id, 0.0) + amount
        if uncovered > 0:
            logger.debug(f"Bank {bank.id} short of reserves by {uncovered:.4f}")


def _merge_into(world: World, failed: Bank, heir: Bank) -> None:
    """Hand a failed bank's book, hole included, to `heir` and close it."""
    if failed.cash > 0:
        world.pay(failed.id, heir.id, failed.cash, FlowTag.BAILOUT)
    elif failed.cash < 0:
        world.pay(heir.id, failed.id, -failed.cash, FlowTag.BAILOUT)
    heir.loans.extend(failed.loans)
    heir.bonds += failed.bonds
    for borrower_id, amount in failed.interbank_lent.items():
        heir.interbank_lent[borrower_id] = heir.interbank_lent.get(borrower_id, 0.0) + amount
        borrower = world.bank(borrower_id)
        if borrower is not None:
            owed = borrower.interbank_borrowed.pop(failed.id, 0.0)
            borrower.interbank_borrowed[heir.id] = borrower.interbank_borrowed.get(heir.id, 0.0) + owed
    heir.interbank_lent.pop(heir.id, None)
    heir.interbank_borrowed.pop(heir.id, None)
    agents = _borrowers(world)
    for client in failed.clients:
        if client in agents:
            agents[client].bank_id = heir.id
        heir.clients.append(client)
    world.ledger.close(failed.id)
    world.banks.remove(failed)


def _liquidate(world: World, failed: Bank) -> None:
    """Close the last bank: its loan book is lost and its clients go unbanked."""
    lost = failed.loan_book
    failed.loans = []
    # bonds it held stay in the stock and count as central bank holdings
    failed.bonds = 0.0
    agents = _borrowers(world)
    for client in failed.clients:
        if client in agents:
            agents[client].bank_id = None
    failed.clients = []
    if failed.cash > 0:
        world.pay(failed.id, world.government.id, failed.cash, FlowTag.TAX, cost=False)
    elif failed.cash < 0:
        world.pay(world.government.id, failed.id, -failed.cash, FlowTag.BAILOUT)
    world.ledger.close(failed.id)
    world.banks.remove(failed)
    logger.info(f"Bank {failed.id} failed with no bank left to take its book; {lost:.4f} of loans lost")


def bank_resolution(world: World) -> None:
    """Resolve banks with negative equity by a public injection or removal.

    The government injects kappa times the smallest incumbent equity and
    the bank carries on with its hole. When that floor is zero the bank is
    removed: its book goes to the strongest remaining bank, or is lost when
    no bank remains.
    """
    for bank in sorted(world.banks, key=lambda b: b.id):
        if bank not in world.banks or bank.equity >= 0:
            continue
        incumbents = [b for b in world.banks if b.id != bank.id]
        outcome = bank_default_and_bailout(bank, incumbents, world.p("bailout_fraction"))
        for peer_id, claim in outcome.written_off.items():
            logger.debug(f"Bank {peer_id} lost interbank claim {claim:.4f} on {bank.id}")
        bank.failed = True
        world.stats.bank_failures += 1
        if not outcome.removed:
            world.pay(world.government.id, bank.id, outcome.injection, FlowTag.BAILOUT)
            logger.info(f"Bank {bank.id} failed and was recapitalised with {outcome.injection:.4f}")
            continue
        if not incumbents:
            _liquidate(world, bank)
            continue
        heir = max(incumbents, key=lambda b: (b.equity, b.id))
        _merge_into(world, bank, heir)
        logger.info(f"Bank {bank.id} failed and was absorbed by {heir.id}")
    refresh_deposits(world)
