import pytest
from hypothesis import given, strategies as st

from abiam.exceptions import InvalidArgumentError
from abiam.kernel.rng import RngStream
from abiam.macro.firms import (
    clone_industry_average,
    distribute_profits,
    dividend,
    firm_exit_entry,
    loan_extension,
    plan_production,
    replicator_shares,
    sales_shares,
)
from abiam.macro.innovation import (
    access_probability,
    imitate,
    nelson_winter_innovate,
    technology_distance,
)
from abiam.macro.pricing import markup_price_update, tatonnement_update
from abiam.schemas import ConsumerFirm, Household, Loan, MachineVintage, VintageHolding

VINTAGE = MachineVintage(labor_productivity=2.0, energy_efficiency=2.0, emission_intensity=0.1, price=1.0)


def _firm(id, cash=1.0, share=0.5, **kwargs):
    return ConsumerFirm(
        id=id,
        cash=cash,
        market_share=share,
        capital=[VintageHolding(vintage=VINTAGE, units=10)],
        **kwargs,
    )


def test_dsk_plan_tops_up_inventory():
    plan = plan_production("dsk", expected_demand=10.0, inventory=2.0, inventory_target=0.1)
    assert plan.target == pytest.approx(9.0)


def test_abmiam_plan_mixes_sales_and_demand():
    plan = plan_production("abmiam", 0.0, 0.0, 0.0, sales=8.0, demand=12.0, demand_weight=0.5)
    assert plan.expected_demand == pytest.approx(10.0)


@pytest.mark.parametrize(
    "sales, demand, inventory, price, expected",
    [(10.0, 12.0, 0.0, 1.1, 11.0), (10.0, 10.0, 5.0, 1.1, 9.0), (10.0, 10.0, 0.5, 1.1, 10.0)],
)
def test_cfhs_plan_adjusts_the_previous_target(sales, demand, inventory, price, expected):
    plan = plan_production(
        "cfhs", 0.0, inventory, 0.1, sales=sales, demand=demand, previous_target=10.0, price=price, market_price=1.0
    )
    assert plan.target == pytest.approx(expected)


def test_plan_is_never_negative():
    assert plan_production("dsk", 1.0, 50.0, 0.1).target == 0.0
    with pytest.raises(InvalidArgumentError):
        plan_production("naive", 1.0, 0.0, 0.1)


def test_replicator_favours_the_cheaper_firm():
    assert replicator_shares([0.5, 0.5], [1.0, 2.0], chi=1.0) == pytest.approx([2 / 3, 1 / 3])
    assert replicator_shares([0.2, 0.8], [1.0, 2.0], chi=0.0) == pytest.approx([0.2, 0.8])


@given(
    shares=st.lists(st.floats(0.01, 1), min_size=1, max_size=10),
    chi=st.floats(0, 5),
)
def test_replicator_shares_stay_a_distribution(shares, chi):
    prices = [1.0 + i for i in range(len(shares))]
    updated = replicator_shares(shares, prices, chi)
    assert sum(updated) == pytest.approx(1.0)
    assert min(updated) >= 0


def test_sales_shares():
    assert sales_shares([1.0, 3.0]) == [0.25, 0.75]
    assert sales_shares([0.0, 0.0]) == [0.5, 0.5]
    assert sales_shares([]) == []


def test_markup_follows_share_growth():
    markup, price = markup_price_update(0.2, [0.1, 0.2], unit_cost=1.0, sensitivity=0.5)
    assert markup == pytest.approx(0.3)
    assert price == pytest.approx(1.3)
    assert markup_price_update(0.2, [0.1], 2.0, 0.5) == pytest.approx((0.2, 2.4))


@pytest.mark.parametrize(
    "sales, low, high",
    [(15.0, 1.0, 1.1), (5.0, 0.9, 1.0), (10.5, 1.0, 1.0)],
)
def test_tatonnement_moves_within_the_step(sales, low, high):
    price = tatonnement_update(1.0, sales, 10.0, floor=0.0, rng=RngStream(5, "macro"))
    assert low <= price <= high


def test_tatonnement_respects_the_floor():
    assert tatonnement_update(1.0, 0.0, 10.0, floor=0.99, rng=RngStream(5, "macro"), eta=0.5) >= 0.99
    assert tatonnement_update(1.0, 0.0, 0.0, floor=0.0, rng=RngStream(5, "macro")) == 1.0


def test_dsk_replaces_exits_with_average_clones():
    firms = [_firm("c0", cash=-1.0), _firm("c1", cash=5.0, price=2.0)]
    decision = firm_exit_entry(firms, "dsk", RngStream(1, "macro"), month=0, next_id=2, params={})
    assert decision.exits == ["c0"]
    assert [e.id for e in decision.entrants] == ["c2"]
    assert decision.entrants[0].price == 2.0
    assert decision.entrants[0].cash == 0.0


def test_abmiam_exit_without_entry():
    firms = [_firm("c0", cash=-1.0), _firm("c1")]
    params = {"entry_probability": 0.0, "entry_premium": 0.1}
    decision = firm_exit_entry(firms, "abmiam", RngStream(1, "macro"), 0, 2, params)
    assert decision.exits == ["c0"]
    assert decision.entrants == []


def test_abmiam_entrant_beats_the_best_incumbent():
    firms = [_firm("c0", tfp=1.0), _firm("c1", tfp=1.5)]
    params = {"entry_probability": 1.0, "entry_premium": 0.1}
    decision = firm_exit_entry(firms, "abmiam", RngStream(1, "macro"), 0, 2, params)
    assert decision.entrants[0].tfp > 1.5


def test_grsw_firms_sleep_and_wake():
    firms = [_firm("c0", dormant_until=5), _firm("c1", cash=-1.0)]
    decision = firm_exit_entry(firms, "grsw", RngStream(1, "macro"), month=6, next_id=2, params={})
    assert decision.reactivated == ["c0"]
    assert decision.dormant == ["c1"]
    assert decision.exits == []


def test_clone_averages_the_industry():
    clone = clone_industry_average([_firm("c0", price=1.0), _firm("c1", price=3.0)], "c9")
    assert clone.price == 2.0
    assert clone.capital_units == 10
    assert clone.market_share == 0.5


def test_profits_follow_savings():
    households = [Household(id="h1", cash=3.0), Household(id="h0", cash=1.0)]
    assert distribute_profits(8.0, households) == [("h0", 2.0), ("h1", 6.0)]
    assert distribute_profits(0.0, households) == []


@pytest.mark.parametrize(
    "cash, profit, buffer, expected",
    [(10.0, 5.0, 0.25, 5.0), (10.0, 5.0, 0.4, 2.0), (10.0, -1.0, 0.0, 0.0), (1.0, 5.0, 0.5, 0.0)],
)
def test_dividend(cash, profit, buffer, expected):
    assert dividend(cash, profit, 20.0, buffer) == pytest.approx(expected)


def test_loans_are_extended_once():
    loans = [Loan(borrower="c0", principal=1.0, rate=0.01, remaining_term=4)]
    assert loan_extension(0.3, loans, threshold=0.2, steps=4) == 1
    assert loans[0].remaining_term == 8
    assert loan_extension(0.3, loans, threshold=0.2, steps=4) == 0
    assert loan_extension(0.1, [Loan(borrower="c0", principal=1.0, rate=0.01, remaining_term=4)], 0.2, 4) == 0


def test_access_probability():
    assert access_probability(0.3, 0.0) == 0.0
    assert 0 < access_probability(0.3, 1.0) < access_probability(0.3, 2.0) < 1


@given(seed=st.integers(0, 10_000))
def test_innovation_never_makes_a_machine_worse(seed):
    new = nelson_winter_innovate(VINTAGE, 100.0, 1.0, 3.0, 3.0, -0.05, 0.05, RngStream(seed, "macro"))
    assert new.labor_productivity >= VINTAGE.labor_productivity
    assert new.energy_efficiency >= VINTAGE.energy_efficiency
    assert new.emission_intensity <= VINTAGE.emission_intensity


def test_no_budget_no_innovation():
    assert nelson_winter_innovate(VINTAGE, 0.0, 1.0, 3.0, 3.0, 0.0, 0.1, RngStream(1, "macro")) == VINTAGE


def test_technology_distance():
    other = VINTAGE.model_copy(update={"labor_productivity": 4.0})
    assert technology_distance(VINTAGE, VINTAGE) == 0.0
    assert technology_distance(VINTAGE, other) == pytest.approx(technology_distance(other, VINTAGE))


def test_imitation_keeps_the_better_coefficients():
    better = VINTAGE.model_copy(update={"labor_productivity": 4.0, "emission_intensity": 0.2})
    copied = imitate(VINTAGE, [VINTAGE, better], access=1.0, rng=RngStream(1, "macro"))
    assert copied.labor_productivity == 4.0
    assert copied.emission_intensity == 0.1
    assert imitate(VINTAGE, [better], access=0.0, rng=RngStream(1, "macro")) == VINTAGE
    assert imitate(VINTAGE, [VINTAGE], access=1.0, rng=RngStream(1, "macro")) == VINTAGE
