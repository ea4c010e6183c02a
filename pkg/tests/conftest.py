import pytest
from loguru import logger

from abiam.kernel.ledger import Ledger
from abiam.kernel.rng import RngStream
from abiam.kernel.scenario import load_preset
from abiam.schemas import Household, SinkAccount

SMALL_POPULATION = [
    "population.households=40",
    "population.consumer_firms=10",
    "population.capital_firms=4",
]


@pytest.fixture(autouse=True)
def quiet_logger():
    logger.remove()
    logger.configure(extra={"run_id": "test"})
    yield
    logger.remove()


@pytest.fixture
def rng():
    return RngStream(7, "test")


@pytest.fixture
def ledger():
    ledger = Ledger()
    for account in (
        Household(id="h0", cash=10.0),
        Household(id="h1", cash=5.0),
        SinkAccount(id="government"),
    ):
        ledger.open(account)
    return ledger


@pytest.fixture
def small_config():
    """Desk-scale preset: few agents and a short horizon."""

    def make(preset: str = "dsk", horizon: int = 12, overrides: list[str] | None = None):
        config = load_preset(preset, [*SMALL_POPULATION, f"horizon={horizon}", *(overrides or [])])
        return config

    return make
