import pytest

from abiam.kernel.clock import SimClock, advance_clock
from abiam.schemas import Granularity


@pytest.mark.parametrize(
    "granularity, months",
    [(Granularity.MONTH, 1), (Granularity.QUARTER, 3), (Granularity.YEAR, 12)],
)
def test_months_per_step(granularity, months):
    clock = SimClock(step=5, granularity=granularity)
    assert clock.months_per_step == months
    assert clock.months_elapsed == 5 * months


def test_step_zero_is_not_annual():
    assert not SimClock(step=0, granularity=Granularity.YEAR).annual


@pytest.mark.parametrize("granularity", list(Granularity))
@pytest.mark.parametrize("horizon", [0, 1, 11, 40, 121])
def test_annual_events_fire_once_per_year(granularity, horizon):
    clock = SimClock(granularity=granularity)
    fired = 0
    for _ in range(horizon):
        clock = advance_clock(clock)
        fired += clock.annual
    assert fired == clock.months_elapsed // 12


def test_fires_every_counts_periods():
    clock = SimClock(granularity=Granularity.MONTH)
    fired = []
    for _ in range(24):
        clock = advance_clock(clock)
        if clock.fires_every(6):
            fired.append(clock.step)
    assert fired == [6, 12, 18, 24]


def test_advance_keeps_granularity():
    clock = advance_clock(SimClock(step=3, granularity=Granularity.MONTH))
    assert clock.step == 4
    assert clock.granularity == Granularity.MONTH
