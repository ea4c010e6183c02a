import math

import pytest

from abiam.exceptions import InvalidArgumentError
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
from abiam.finance.government import government_step, taylor_rate
from abiam.finance.phases import bank_resolution
from abiam.kernel.ledger import Ledger, check_stock_flow
from abiam.kernel.world import build_world
from abiam.schemas import Bank, CentralBank, FlowTag, GovernmentBudget, Household, Loan


@pytest.fixture
def bank():
    return Bank(
        id="b0",
        cash=10.0,
        deposits=100.0,
        loans=[
            Loan(borrower="c0", principal=30.0, rate=0.02, remaining_term=10),
            Loan(borrower="c1", principal=20.0, rate=0.02, remaining_term=10, green=True),
        ],
    )


@pytest.mark.parametrize(
    "variant, kwargs, expected",
    [
        ("multiplier", {"multiplier": 2.0}, 150.0),
        ("multiplier", {"multiplier": 2.0, "exclude_green": True}, 170.0),
        ("basel", {"capital_adequacy": 0.08}, 700.0),
        ("basel", {"capital_adequacy": 0.08, "exclude_green": True}, 720.0),
        ("reserve", {"reserve_ratio": 0.1}, 100.0),
        ("none", {}, 0.0),
    ],
)
def test_credit_limit_variants(bank, variant, kwargs, expected):
    assert credit_limit(bank, variant, **kwargs) == pytest.approx(expected)


def test_credit_limit_edges(bank):
    assert credit_limit(bank, "unbounded") == math.inf
    assert credit_limit(bank, "multiplier", multiplier=0.1) == 0.0
    with pytest.raises(InvalidArgumentError):
        credit_limit(bank, "fractional")


def test_capital_adequacy_path_holds_its_last_value():
    assert capital_adequacy_path(0.08, 40) == 0.08
    assert capital_adequacy_path([0.08, 0.1, 0.12], 1) == 0.1
    assert capital_adequacy_path([0.08, 0.1, 0.12], 99) == 0.12
    with pytest.raises(InvalidArgumentError):
        capital_adequacy_path([], 0)


def test_pecking_order_ranks_by_net_worth_to_sales():
    clients = [
        CreditRequest(client="c2", amount=1, net_worth=1.0, sales=0.0),
        CreditRequest(client="c1", amount=1, net_worth=1.0, sales=10.0),
        CreditRequest(client="c0", amount=1, net_worth=5.0, sales=10.0),
        CreditRequest(client="c3", amount=1, net_worth=5.0, sales=10.0),
    ]
    assert pecking_order(clients) == ["c0", "c3", "c1", "c2"]


def test_marginal_client_gets_the_rest():
    requests = [CreditRequest(client=f"c{i}", amount=4.0) for i in range(3)]
    assert grant_loans(requests, 10.0) == [("c0", 4.0), ("c1", 4.0), ("c2", 2.0)]
    assert grant_loans(requests, 0.0) == []


def test_grant_screens():
    requests = [
        CreditRequest(client="c0", amount=4.0, debt=10.0, net_worth=2.0, sales=10.0, profit_rate=0.1),
        CreditRequest(client="c1", amount=4.0, debt=1.0, net_worth=2.0, sales=2.0, profit_rate=0.1),
        CreditRequest(client="c2", amount=4.0, debt=0.0, net_worth=2.0, sales=10.0, profit_rate=0.0),
    ]
    assert grant_loans(requests, 100.0, debt_to_equity_cap=2.0) == [("c1", 4.0), ("c2", 4.0)]
    assert grant_loans(requests, 100.0, debt_to_sales_cap=1.0) == [("c1", 1.0), ("c2", 4.0)]
    assert grant_loans(requests, 100.0, interest_rate=0.05) == [("c0", 4.0), ("c1", 4.0)]
    assert grant_loans(requests, 100.0, interest_rate=0.05, lenience=0.1) == [
        ("c0", 4.0),
        ("c1", 4.0),
        ("c2", 4.0),
    ]


@pytest.mark.parametrize("rank, expected", [(0, 1), (2, 1), (3, 2), (5, 2), (6, 3), (9, 4), (11, 4)])
def test_quartiles(rank, expected):
    assert quartile(rank, 12) == expected


def test_loan_rate_rises_with_the_quartile():
    markups = [0.1, 0.2, 0.3, 0.4]
    rates = [loan_rate(0.02, q, markups) for q in (1, 2, 3, 4)]
    assert rates == sorted(rates)
    assert rates[0] == pytest.approx(0.022)


@pytest.mark.parametrize("q, markups", [(0, [0.1] * 4), (5, [0.1] * 4), (1, [0.1, 0.2]), (1, [0.3, 0.2, 0.3, 0.4])])
def test_loan_rate_rejects_bad_arguments(q, markups):
    with pytest.raises(InvalidArgumentError):
        loan_rate(0.02, q, markups)


def test_interbank_borrows_from_the_most_liquid_first():
    loans, uncovered = interbank_borrow(10.0, [("b1", 4.0), ("b2", 8.0), ("b3", -1.0)])
    assert loans == [("b2", 8.0), ("b1", 2.0)]
    assert uncovered == 0.0
    loans, uncovered = interbank_borrow(20.0, [("b1", 4.0)])
    assert uncovered == 16.0


def test_excess_liquidity(bank):
    assert excess_liquidity(bank, 0.1) == pytest.approx(100.0)


def test_solvent_bank_needs_no_bailout(bank):
    outcome = bank_default_and_bailout(bank, [], kappa=0.5)
    assert not outcome.defaulted
    assert outcome.injection == 0.0


def test_failed_bank_is_recapitalised_from_the_weakest_peer():
    failed = Bank(id="b0", cash=-10.0, interbank_borrowed={"b1": 5.0})
    peer = Bank(id="b1", cash=20.0, interbank_lent={"b0": 5.0})
    strong = Bank(id="b2", cash=50.0)
    outcome = bank_default_and_bailout(failed, [peer, strong], kappa=0.5)
    assert outcome.defaulted
    assert outcome.written_off == {"b1": 5.0}
    assert peer.interbank_lent == {}
    assert failed.interbank_borrowed == {}
    assert outcome.injection == pytest.approx(10.0)
    assert not outcome.removed


def test_failed_bank_without_solvent_peers_is_removed():
    assert bank_default_and_bailout(Bank(id="b0", cash=-1.0), [], kappa=0.5).removed
    broke = Bank(id="b1", cash=-3.0)
    outcome = bank_default_and_bailout(Bank(id="b0", cash=-1.0), [broke], kappa=0.5)
    assert outcome.injection == 0.0
    assert outcome.removed


def sink_banks(world, cash):
    for bank in world.banks:
        bank.loans = []
        bank.bonds = 0.0
        bank.interbank_lent = {}
        bank.interbank_borrowed = {}
        bank.cash = cash.get(bank.id, bank.cash)


def test_resolution_injects_only_the_bailout(small_config):
    world = build_world(small_config("dskfin", overrides=["population.banks=2", "bailout_fraction=0.5"]), seed=0)
    sink_banks(world, {"b0": -10.0, "b1": 50.0})
    treasury = world.government.cash
    bank_resolution(world)
    assert [b.id for b in world.banks] == ["b0", "b1"]
    assert world.bank("b0").equity == pytest.approx(15.0)
    assert treasury - world.government.cash == pytest.approx(25.0)
    bailouts = [e.amount for e in world.ledger.entries if e.tag == FlowTag.BAILOUT]
    assert bailouts == [pytest.approx(25.0)]
    assert world.stats.bank_failures == 1


def test_resolution_removes_the_last_bank(small_config):
    world = build_world(small_config("dsk", overrides=["population.banks=1"]), seed=0)
    sink_banks(world, {"b0": -1.0})
    clients = list(world.bank("b0").clients)
    before = sum(world.ledger.balances().values())
    bank_resolution(world)
    assert world.banks == []
    assert "b0" not in world.ledger.accounts
    assert all(world.agents()[c].bank_id is None for c in clients if c in world.agents())
    assert sum(world.ledger.balances().values()) == pytest.approx(before)


def test_insolvent_incumbents_absorb_then_fold(small_config):
    world = build_world(small_config("dskfin", overrides=["population.banks=2"]), seed=0)
    sink_banks(world, {"b0": -10.0, "b1": -5.0})
    treasury = world.government.cash
    bank_resolution(world)
    assert world.banks == []
    assert treasury - world.government.cash == pytest.approx(15.0)


def test_loan_payment():
    assert loan_payment(Loan(borrower="c0", principal=100.0, rate=0.01, remaining_term=4)) == (1.0, 25.0)


def test_taylor_rule():
    central_bank = CentralBank(neutral_rate=0.01, inflation_target=0.005, phi_pi=1.5, phi_u=0.5)
    assert taylor_rate(0.015, 0.05, central_bank) == pytest.approx(0.025)
    assert taylor_rate(-0.05, 0.3, central_bank) == 0.0


@pytest.fixture
def fiscal():
    budget = GovernmentBudget()
    central_bank = CentralBank()
    bank = Bank(id="b0", cash=10.0)
    ledger = Ledger()
    for account in (budget, central_bank, bank, Household(id="h0", cash=10.0), Household(id="h1")):
        ledger.open(account)
    return budget, central_bank, bank, ledger


def test_deficit_is_financed_with_bonds(fiscal):
    budget, central_bank, bank, ledger = fiscal
    before = ledger.balances()
    outcome = government_step(budget, ledger, [("h1", 5.0)], [("h0", 2.0)], [bank], central_bank, 0.0)
    assert outcome.deficit == pytest.approx(3.0)
    assert outcome.new_bonds == pytest.approx(3.0)
    assert budget.cash == pytest.approx(0.0)
    assert budget.bond_stock == pytest.approx(3.0)
    assert check_stock_flow(ledger, before, ledger.balances()) == pytest.approx(0.0)


def test_banks_take_their_share_of_new_bonds(fiscal):
    budget, central_bank, bank, ledger = fiscal
    government_step(budget, ledger, [("h1", 4.0)], [], [bank], central_bank, 0.0, bank_bond_share=0.5)
    assert bank.bonds == pytest.approx(2.0)
    assert central_bank.cash == pytest.approx(-2.0)


def test_surplus_redeems_central_bank_bonds(fiscal):
    budget, central_bank, bank, ledger = fiscal
    budget.bond_stock = 10.0
    outcome = government_step(budget, ledger, [], [("h0", 4.0)], [bank], central_bank, 0.0)
    assert outcome.redeemed == pytest.approx(4.0)
    assert budget.bond_stock == pytest.approx(6.0)


def test_bond_interest_goes_to_the_holders(fiscal):
    budget, central_bank, bank, ledger = fiscal
    budget.bond_stock = 10.0
    bank.bonds = 4.0
    outcome = government_step(budget, ledger, [], [], [bank], central_bank, 0.1)
    assert outcome.interest == pytest.approx(1.0)
    assert central_bank.cash == pytest.approx(0.6 - 1.0)
    assert budget.bond_stock == pytest.approx(11.0)
    assert bank.cash == pytest.approx(10.4)
