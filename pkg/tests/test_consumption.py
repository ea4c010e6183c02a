import numpy as np
import pytest
from hypothesis import given, strategies as st

from abiam.exceptions import InvalidArgumentError
from abiam.macro.consumption import household_budget, logit_product_choice, stone_geary_demand
from abiam.schemas import Household


@given(
    qualities=st.lists(st.floats(0.1, 10), min_size=1, max_size=8),
    intensity=st.floats(0, 50),
)
def test_logit_probabilities_sum_to_one(qualities, intensity):
    prices = [1.0] * len(qualities)
    probabilities = logit_product_choice(qualities, prices, [0.0] * len(qualities), intensity)
    assert probabilities.sum() == pytest.approx(1.0)
    assert np.all(probabilities >= 0)


def test_logit_prefers_cheap_good_products():
    probabilities = logit_product_choice([1.0, 2.0, 1.0], [1.0, 1.0, 2.0], [0, 0, 0], intensity=2.0)
    assert probabilities[1] > probabilities[0] > probabilities[2]


def test_logit_without_intensity_is_uniform():
    probabilities = logit_product_choice([1.0, 5.0], [1.0, 3.0], [0, 10], intensity=0.0)
    assert probabilities == pytest.approx([0.5, 0.5])


def test_logit_rejects_bad_arguments():
    with pytest.raises(InvalidArgumentError):
        logit_product_choice([1.0], [0.0], [0], intensity=1.0)
    with pytest.raises(InvalidArgumentError):
        logit_product_choice([1.0], [1.0], [0], intensity=-1.0)


@given(budget=st.floats(0.1, 1e4))
def test_stone_geary_without_minima_is_cobb_douglas(budget):
    prices = [1.0, 2.0, 4.0]
    shares = [0.5, 0.3, 0.2]
    demand = stone_geary_demand(budget, prices, [0.0, 0.0, 0.0], shares)
    assert demand.subsistence_feasible
    assert demand.quantities == pytest.approx([s * budget / p for s, p in zip(shares, prices)])
    assert float(np.dot(prices, demand.quantities)) == pytest.approx(budget)


def test_stone_geary_covers_minima_first():
    demand = stone_geary_demand(10.0, [1.0, 1.0], [2.0, 3.0], [0.5, 0.5])
    assert demand.quantities == pytest.approx([4.5, 5.5])


def test_stone_geary_below_subsistence_scales_minima():
    demand = stone_geary_demand(2.5, [1.0, 1.0], [2.0, 3.0], [0.5, 0.5])
    assert not demand.subsistence_feasible
    assert demand.quantities == pytest.approx([1.0, 1.5])


def test_stone_geary_shares_must_sum_to_one():
    with pytest.raises(InvalidArgumentError):
        stone_geary_demand(1.0, [1.0, 1.0], [0.0, 0.0], [0.5, 0.4])


@pytest.mark.parametrize(
    "variant, params, expected",
    [
        ("dsk", {}, 4.0),
        ("cfhs", {"consumption_propensity": 0.5}, 8.0),
        ("grsw", {"savings_drawdown": 0.5}, 7.0),
        ("abmiam", {"wealth_target": 1.0, "wealth_adjustment": 0.5}, 9.0),
    ],
)
def test_household_budget_variants(variant, params, expected):
    household = Household(id="h0", cash=10.0, income=4.0)
    assert household_budget(household, variant, params) == pytest.approx(expected)


def test_household_budget_never_exceeds_wealth():
    household = Household(id="h0", cash=3.0, income=4.0)
    assert household_budget(household, "dsk", {}) == 3.0
    broke = Household(id="h1", cash=-1.0, income=4.0)
    assert household_budget(broke, "dsk", {}) == 0.0


def test_budget_damage_cuts_spending():
    household = Household(id="h0", cash=10.0, income=4.0, budget_damage=0.25)
    assert household_budget(household, "dsk", {}) == pytest.approx(3.0)


def test_unknown_household_variant():
    with pytest.raises(InvalidArgumentError):
        household_budget(Household(id="h0"), "keynes", {})
