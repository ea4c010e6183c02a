import math

import pytest
from hypothesis import given, strategies as st

from abiam.exceptions import InvalidArgumentError
from abiam.macro.production import (
    ces_inputs_for_output,
    emissions_for_output,
    energy_for_output,
    labor_for_output,
    produce_ces,
    produce_leontief,
    produce_vintage_crs,
    technology_cost,
    vintage_capacity,
)
from abiam.schemas import MachineVintage, VintageHolding


@pytest.fixture
def capital():
    return [
        VintageHolding(vintage=MachineVintage(labor_productivity=1.0, energy_efficiency=1.0, emission_intensity=0.5), units=5),
        VintageHolding(vintage=MachineVintage(labor_productivity=2.0, energy_efficiency=4.0, emission_intensity=0.1), units=3),
    ]


def test_best_machines_are_manned_first(capital):
    assert produce_vintage_crs(capital, 4) == 7.0
    assert produce_vintage_crs(capital, 100) == vintage_capacity(capital) == 11.0
    assert produce_vintage_crs(capital, 0) == 0.0


def test_labor_for_output_inverts_production(capital):
    assert labor_for_output(capital, 7.0) == pytest.approx(4.0)
    assert labor_for_output(capital, 3.0) == pytest.approx(1.5)


def test_energy_and_emissions_follow_the_vintages_used(capital):
    assert energy_for_output(capital, 7.0) == pytest.approx(6.0 / 4.0 + 1.0)
    assert emissions_for_output(capital, 7.0) == pytest.approx(6.0 * 0.1 + 0.5)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
@given(
    k=st.floats(0.1, 100),
    l=st.floats(0.1, 100),
    e=st.floats(0.1, 100),
    lam=st.floats(0.1, 10),
)
def test_ces_has_constant_returns(sigma, k, l, e, lam):
    base = produce_ces(k, l, e, 0.3, 0.5, 0.2, sigma)
    assert produce_ces(lam * k, lam * l, lam * e, 0.3, 0.5, 0.2, sigma) == pytest.approx(lam * base, rel=1e-9)


def test_ces_near_one_is_cobb_douglas():
    exact = produce_ces(2.0, 3.0, 5.0, 0.3, 0.5, 0.2, 1.0)
    assert exact == pytest.approx(2.0**0.3 * 3.0**0.5 * 5.0**0.2)
    assert produce_ces(2.0, 3.0, 5.0, 0.3, 0.5, 0.2, 1.0 + 1e-7) == pytest.approx(exact, rel=1e-5)


def test_ces_weights_are_normalized():
    assert produce_ces(2.0, 3.0, 5.0, 3, 5, 2, 0.5) == pytest.approx(produce_ces(2.0, 3.0, 5.0, 0.3, 0.5, 0.2, 0.5))


def test_ces_complements_need_every_input():
    assert produce_ces(10.0, 10.0, 0.0, 0.3, 0.5, 0.2, 0.5) == 0.0
    assert produce_ces(10.0, 10.0, 0.0, 0.3, 0.5, 0.2, 2.0) > 0.0


@pytest.mark.parametrize(
    "args",
    [
        (1.0, 1.0, 1.0, 0.3, 0.5, 0.2, 0.0),
        (-1.0, 1.0, 1.0, 0.3, 0.5, 0.2, 0.5),
        (1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.5),
        (1.0, 1.0, 1.0, -0.3, 0.5, 0.2, 0.5),
    ],
)
def test_ces_rejects_bad_arguments(args):
    with pytest.raises(InvalidArgumentError):
        produce_ces(*args)


def test_ces_inputs_reach_the_target():
    labor, energy = ces_inputs_for_output(5.0, 10.0, 1.0, 0.5, 0.3, 0.5, 0.2, 0.5)
    assert produce_ces(10.0, labor, energy, 0.3, 0.5, 0.2, 0.5) == pytest.approx(5.0, rel=1e-6)
    assert ces_inputs_for_output(0.0, 10.0, 1.0, 0.5, 0.3, 0.5, 0.2, 0.5) == (0.0, 0.0)


def test_ces_inputs_shift_toward_the_cheaper_factor():
    _, cheap = ces_inputs_for_output(5.0, 10.0, 1.0, 0.25, 0.3, 0.5, 0.2, 0.5)
    _, dear = ces_inputs_for_output(5.0, 10.0, 1.0, 1.0, 0.3, 0.5, 0.2, 0.5)
    assert cheap > dear


@given(
    inputs=st.dictionaries(st.sampled_from("kle"), st.floats(0, 1e3), min_size=3),
    requirements=st.dictionaries(st.sampled_from("kle"), st.floats(0.01, 10), min_size=1),
)
def test_leontief_output_never_exceeds_any_input_bound(inputs, requirements):
    output = produce_leontief(inputs, requirements)
    for factor, requirement in requirements.items():
        assert output <= inputs[factor] / requirement + 1e-9


def test_leontief_edge_cases():
    assert produce_leontief({"k": 4.0}, {}) == 0.0
    assert produce_leontief({"k": 4.0}, {"k": 2.0, "e": 1.0}) == 0.0
    with pytest.raises(InvalidArgumentError):
        produce_leontief({"k": 4.0}, {"k": 0.0})


def test_technology_cost():
    vintage = MachineVintage(labor_productivity=2.0, energy_efficiency=4.0, emission_intensity=0.5)
    assert technology_cost(vintage, 1.0, 2.0) == pytest.approx(1.0)
    assert technology_cost(vintage, 1.0, 2.0, carbon_price=2.0) == pytest.approx(2.0)
    assert math.isfinite(technology_cost(vintage, 0.0, 0.0))
