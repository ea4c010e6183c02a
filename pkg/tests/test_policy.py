import pytest

from abiam.exceptions import InvalidArgumentError
from abiam.finance.banks import credit_limit
from abiam.kernel.ledger import Ledger
from abiam.kernel.rng import RngStream
from abiam.policy.instruments import (
    FineTarget,
    carbon_risk_pecking,
    carbon_tax_and_recycle,
    fines_and_subsidies,
    fossil_price_shift,
    green_basel_limit,
    green_guarantee_settle,
    renewable_mandate,
    retrofit,
    scc_tax_path,
)
from abiam.schemas import Bank, Loan, SinkAccount, SubsidyScheme


@pytest.fixture
def economy():
    ledger = Ledger()
    for agent_id, cash in (("c0", 10.0), ("c1", 10.0), ("c2", 10.0), ("h0", 0.0), ("h1", 0.0), ("government", 0.0)):
        ledger.open(SinkAccount(id=agent_id, cash=cash))
    return ledger


def test_carbon_tax_is_revenue_neutral(economy):
    before = sum(economy.balances().values())
    record = carbon_tax_and_recycle({"c0": 2.0, "c1": 1.0}, 0.5, ["h1", "h0"], economy)
    balances = economy.balances()
    assert record.tax_revenue == pytest.approx(1.5)
    assert record.lump_sums == pytest.approx(1.5)
    assert balances["government"] == pytest.approx(0.0, abs=1e-12)
    assert balances["h0"] == balances["h1"] == pytest.approx(0.75)
    assert balances["c0"] == pytest.approx(9.0)
    assert sum(balances.values()) == pytest.approx(before)


def test_zero_carbon_tax_moves_nothing(economy):
    record = carbon_tax_and_recycle({"c0": 2.0}, 0.0, ["h0"], economy)
    assert record.tax_revenue == 0.0
    assert economy.entries == []
    with pytest.raises(InvalidArgumentError):
        carbon_tax_and_recycle({"c0": 2.0}, -0.1, ["h0"], economy)


def test_carbon_risk_reranks_on_mean_rank():
    assert carbon_risk_pecking(["a", "b", "c", "d"], ["d", "c", "a", "b"]) == ["a", "c", "d", "b"]
    assert carbon_risk_pecking(["a", "b"], ["a", "b"]) == ["a", "b"]
    with pytest.raises(InvalidArgumentError):
        carbon_risk_pecking(["a", "b"], ["a", "c"])


def test_green_guarantee_covers_green_loans_only(economy):
    bank = Bank(id="b0")
    economy.open(bank)
    defaulted = [
        (bank, Loan(borrower="c0", principal=5.0, rate=0.01, remaining_term=4, green=True)),
        (bank, Loan(borrower="c1", principal=3.0, rate=0.01, remaining_term=4)),
    ]
    assert green_guarantee_settle(defaulted, economy) == 5.0
    assert bank.cash == 5.0
    assert economy.balances()["government"] == -5.0


def test_green_basel_ignores_green_loans():
    bank = Bank(
        id="b0",
        cash=10.0,
        deposits=100.0,
        loans=[Loan(borrower="c0", principal=20.0, rate=0.01, remaining_term=4, green=True)],
    )
    limit = green_basel_limit(bank, "basel", capital_adequacy=0.1)
    assert limit == pytest.approx(300.0)
    assert limit > credit_limit(bank, "basel", capital_adequacy=0.1)


TARGETS = [
    FineTarget(id="c0", region=0, emissions=4.0, capacity=1.0),
    FineTarget(id="c1", region=0, pollution=4.0, capacity=3.0),
    FineTarget(id="c2", region=1, emissions=4.0, capacity=1.0),
]


def test_fines_without_subsidies_stay_with_the_government(economy):
    outcome = fines_and_subsidies(TARGETS, SubsidyScheme.NONE, 0.5, 0.5, economy)
    assert outcome.fines == {"c0": 2.0, "c1": 2.0, "c2": 2.0}
    assert outcome.subsidies == {}
    assert economy.balances()["government"] == 6.0


def test_regional_redistribution_is_neutral(economy):
    before = economy.balances()
    outcome = fines_and_subsidies(TARGETS, SubsidyScheme.REGIONAL, 0.5, 0.5, economy)
    assert outcome.record.fines == pytest.approx(outcome.record.subsidies)
    assert economy.balances()["government"] == pytest.approx(0.0, abs=1e-12)
    assert outcome.subsidies == pytest.approx({"c0": 1.0, "c1": 3.0, "c2": 2.0})
    assert sum(economy.balances().values()) == pytest.approx(sum(before.values()))


def test_north_south_transfer(economy):
    outcome = fines_and_subsidies(TARGETS, SubsidyScheme.NORTH_SOUTH, 0.5, 0.5, economy, north_share=0.5)
    north = outcome.subsidies["c0"] + outcome.subsidies["c1"]
    assert north == pytest.approx(2.0)
    assert outcome.subsidies["c2"] == pytest.approx(4.0)


def test_grants_multiply_the_pools(economy):
    outcome = fines_and_subsidies(TARGETS, SubsidyScheme.GRANT, 0.5, 0.5, economy, grant_factor=2.0)
    assert outcome.record.subsidies == pytest.approx(12.0)
    assert outcome.record.grants == pytest.approx(6.0)
    assert economy.balances()["government"] == pytest.approx(-6.0)


def test_fines_must_be_non_negative(economy):
    with pytest.raises(InvalidArgumentError):
        fines_and_subsidies(TARGETS, SubsidyScheme.NONE, -0.5, 0.5, economy)


@pytest.mark.parametrize(
    "intensity, subsidy, expected",
    [(0.1, 1.0, 0.05), (0.1, 10.0, 0.005), (0.004, 10.0, 0.004), (0.1, -1.0, 0.1)],
)
def test_retrofit(intensity, subsidy, expected):
    assert retrofit(intensity, subsidy, 0.05, 0.005) == pytest.approx(expected)


def test_fossil_price_shift_follows_the_path():
    path = [1.0] * 40 + [2.0]
    assert fossil_price_shift(3.0, path, 10) == 3.0
    assert fossil_price_shift(3.0, path, 40) == 6.0
    assert fossil_price_shift(3.0, path, 400) == 6.0
    assert fossil_price_shift(3.0, [], 5) == 3.0
    with pytest.raises(InvalidArgumentError):
        fossil_price_shift(3.0, [0.0], 0)


def test_renewable_mandate():
    rng = RngStream(4, "policy")
    assert renewable_mandate(0.0, rng) == "brown"
    assert renewable_mandate(1.0, rng) == "green"
    draws = [renewable_mandate(0.5, rng) for _ in range(1000)]
    assert 400 < draws.count("green") < 600
    with pytest.raises(InvalidArgumentError):
        renewable_mandate(1.5, rng)


def test_scc_tax_path():
    assert scc_tax_path([0.0, 1.0, 2.0], factor=0.5) == [0.0, 0.5, 1.0]
    with pytest.raises(InvalidArgumentError):
        scc_tax_path([1.0, -1.0])
