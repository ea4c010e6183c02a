import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from abiam.damages.allocation import (
    allocate_wealth_elastic,
    apply_damage,
    disaster_hits,
    draw_firm_shocks,
    expected_hits,
    mine_health_decay,
)
from abiam.damages.schedules import (
    beta_damage_params,
    fit_quadratic,
    quadratic_damage,
    quadratic_multiplier,
    regional_damage,
    temperature_variability,
)
from abiam.exceptions import FitError, InvalidArgumentError
from abiam.kernel.rng import RngStream
from abiam.schemas import (
    ConsumerFirm,
    DamageChannel,
    DamageEvent,
    Household,
    MachineVintage,
    VintageHolding,
)


@given(temperature=st.one_of(st.just(0.0), st.floats(0.01, 5)), variability=st.floats(0, 1))
def test_beta_mean_is_linear_in_temperature(temperature, variability):
    params = beta_damage_params(temperature, variability, 0.0, 0.01, 200.0, 20.0)
    if params.degenerate:
        assert temperature == 0.0
        return
    assert params.alpha / (params.alpha + params.beta) == pytest.approx(0.01 * temperature)
    assert params.alpha > 1 and params.beta > 1


def test_zero_mean_is_degenerate():
    params = beta_damage_params(-1.0, 0.0, 0.0, 0.01, 200.0, 20.0)
    assert params.degenerate
    assert draw_firm_shocks(["c0", "c1"], params, "capital", RngStream(1, "damages"))[0].magnitude == 0.0


def test_variability_fattens_the_right_tail():
    calm = beta_damage_params(2.0, 0.0, 0.0, 0.01, 200.0, 20.0)
    stormy = beta_damage_params(2.0, 0.5, 0.0, 0.01, 200.0, 20.0)
    assert calm.mean == stormy.mean
    assert stats.beta.sf(0.05, stormy.alpha, stormy.beta) > stats.beta.sf(0.05, calm.alpha, calm.beta)


def test_temperature_variability():
    assert temperature_variability([0.0, 0.1], 10) == 0.0
    assert temperature_variability([0.0, 0.1, 0.2, 0.3], 10) == pytest.approx(0.0)
    assert temperature_variability([0.0, 0.2, 0.2, 0.4], 10) > 0.0
    # only the window counts
    assert temperature_variability([5.0, 0.0, 0.1, 0.2, 0.3], 3) == pytest.approx(0.0)


@given(a=st.floats(0, 10), b=st.floats(0, 10))
def test_quadratic_multiplier_is_non_increasing(a, b):
    low, high = sorted((a, b))
    assert quadratic_multiplier(high, 0.00236, 2.0) <= quadratic_multiplier(low, 0.00236, 2.0)


def test_quadratic_damage_values():
    assert quadratic_multiplier(0.0, 0.00236, 2.0) == 1.0
    assert quadratic_damage(2.0, 0.25, 2.0) == pytest.approx(0.5)
    with pytest.raises(InvalidArgumentError):
        quadratic_multiplier(1.0, -0.1, 2.0)
    with pytest.raises(InvalidArgumentError):
        quadratic_multiplier(1.0, 0.1, 0.0)


def test_fit_recovers_a_known_schedule():
    temperatures = np.linspace(0.2, 4.0, 30)
    damages = [quadratic_damage(t, 0.005, 2.0) for t in temperatures]
    fit = fit_quadratic(temperatures, damages)
    assert fit.zeta1 == pytest.approx(0.005, rel=1e-3)
    assert fit.zeta2 == pytest.approx(2.0, rel=1e-3)
    assert fit.residual < 1e-6


def test_fit_without_damage():
    assert fit_quadratic([1.0, 2.0], [0.0, 0.0]) == (0.0, 2.0, 0.0)
    assert fit_quadratic([], []).zeta1 == 0.0


def test_fit_errors():
    with pytest.raises(InvalidArgumentError):
        fit_quadratic([1.0, 2.0], [0.1])
    with pytest.raises(FitError):
        fit_quadratic([1.0, 2.0, 3.0], [0.5, 0.01, 0.5], tolerance=0.001)


def test_regional_damage():
    assert regional_damage(15.0, 15.0, 0.01, 0.1, 0.05) == (0.0, 0.0, 0.0)
    damage = regional_damage(15.0, 13.0, 0.01, 0.1, 0.05)
    assert damage.agriculture == pytest.approx(0.2)
    assert damage.labor == pytest.approx(0.04)
    assert damage.disaster == pytest.approx(0.1)
    assert regional_damage(50.0, 13.0, 1.0, 1.0, 1.0) == (1.0, 1.0, 1.0)


@given(
    total=st.floats(0, 1e6),
    wealths=st.lists(st.one_of(st.just(0.0), st.floats(0.01, 1e4)), min_size=1, max_size=20),
    elasticity=st.floats(-2, 2),
)
def test_wealth_elastic_damage_adds_up(total, wealths, elasticity):
    parts = allocate_wealth_elastic(total, wealths, elasticity)
    assert len(parts) == len(wealths)
    assert sum(parts) == pytest.approx(total, rel=1e-9, abs=1e-9)


def test_wealth_elastic_shapes():
    assert allocate_wealth_elastic(9.0, [1.0, 2.0, 6.0], 0.0) == pytest.approx([3.0, 3.0, 3.0])
    assert allocate_wealth_elastic(9.0, [1.0, 2.0, 6.0], 1.0) == pytest.approx([1.0, 2.0, 6.0])
    poor_first = allocate_wealth_elastic(9.0, [1.0, 2.0, 6.0], -1.0)
    assert poor_first[0] > poor_first[1] > poor_first[2]
    assert allocate_wealth_elastic(4.0, [0.0, 0.0], 1.0) == [2.0, 2.0]
    assert allocate_wealth_elastic(4.0, [], 1.0) == []
    with pytest.raises(InvalidArgumentError):
        allocate_wealth_elastic(4.0, [-1.0, 1.0], 1.0)


def test_expected_hits():
    assert expected_hits(0.0, 0.4, 0.05, 2.0) == 0.0
    assert expected_hits(0.8, 0.4, 0.05, 2.0) == pytest.approx(0.2)
    with pytest.raises(InvalidArgumentError):
        expected_hits(1.0, 0.0, 0.05, 2.0)


def test_disaster_counts_are_poisson():
    rng = RngStream(9, "damages")
    targets = ["c0", "c1", "c2"]
    counts = [len(disaster_hits(0.8, 0.4, 0.5, 1.0, 0.1, targets, rng)) for _ in range(2000)]
    assert np.mean(counts) == pytest.approx(1.0, abs=0.1)
    events = disaster_hits(0.8, 0.4, 5.0, 1.0, 0.1, targets, RngStream(1, "damages"))
    assert all(e.channel == DamageChannel.CAPITAL and e.magnitude == 0.1 for e in events)
    assert {e.target for e in events} <= set(targets)
    assert disaster_hits(0.8, 0.4, 5.0, 1.0, 0.1, [], RngStream(1, "damages")) == []


def test_mixed_shocks_pick_capital_or_labor():
    params = beta_damage_params(3.0, 0.0, 0.0, 0.01, 200.0, 20.0)
    events = draw_firm_shocks([f"c{i}" for i in range(20)], params, "mixed", RngStream(2, "damages"))
    assert {e.channel for e in events} == {DamageChannel.CAPITAL, DamageChannel.LABOR_PRODUCTIVITY}
    assert all(0 <= e.magnitude <= 1 for e in events)
    assert [e.target for e in events] == sorted(e.target for e in events)


def test_mine_health():
    assert mine_health_decay(0.9, 10.0, 360, 0.01) == (1.0, 0)
    assert mine_health_decay(1.0, 10.0, 180, 0.01) == pytest.approx((0.95, 180))
    assert mine_health_decay(0.4, 1e6, 180, 0.01)[0] == pytest.approx(1 / 3)


def test_apply_damage_in_place():
    firm = ConsumerFirm(
        id="c0",
        inventory=10.0,
        capital=[VintageHolding(vintage=MachineVintage(labor_productivity=1, energy_efficiency=1, emission_intensity=0), units=10)],
    )
    household = Household(id="h0")
    apply_damage(
        {"c0": firm, "h0": household},
        [
            DamageEvent(target="c0", channel=DamageChannel.CAPITAL, magnitude=0.1),
            DamageEvent(target="c0", channel=DamageChannel.INVENTORY, magnitude=0.5),
            DamageEvent(target="c0", channel=DamageChannel.ENERGY_EFFICIENCY, magnitude=0.2),
            DamageEvent(target="h0", channel=DamageChannel.BUDGET, magnitude=0.5),
            DamageEvent(target="h0", channel=DamageChannel.BUDGET, magnitude=0.5),
        ],
    )
    assert firm.capital_units == pytest.approx(9.0)
    assert firm.inventory == pytest.approx(5.0)
    assert firm.energy_factor == pytest.approx(0.8)
    assert household.budget_damage == pytest.approx(0.75)


@pytest.mark.parametrize(
    "event",
    [
        DamageEvent(target="ghost", channel=DamageChannel.CAPITAL, magnitude=0.1),
        DamageEvent(target="h0", channel=DamageChannel.ENERGY_EFFICIENCY, magnitude=0.1),
    ],
)
def test_apply_damage_rejects_bad_events(event):
    with pytest.raises(InvalidArgumentError):
        apply_damage({"h0": Household(id="h0")}, [event])
