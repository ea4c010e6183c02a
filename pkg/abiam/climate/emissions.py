from typing import Mapping

from abiam.exceptions import InvalidArgumentError
from abiam.schemas import EmissionsAccount, PollutionField

# Sectors whose CO2 counts, per emission-source variant.
EMITTING_SECTORS = {
    "dsk": ("consumption", "capital", "energy"),
    "abmiam": ("energy",),
    "cfhs": ("energy",),
    "grsw": ("capital",),
}


def account_emissions(
    account: EmissionsAccount,
    sector_emissions: Mapping[str, float],
    sources: str,
) -> EmissionsAccount:
    """Book one step of emissions from the sectors the variant counts."""
    try:
        sectors = EMITTING_SECTORS[sources]
    except KeyError:
        raise InvalidArgumentError(f"Unknown emission-source variant '{sources}'") from None
    by_sector = {}
    for sector in sectors:
        amount = sector_emissions.get(sector, 0.0)
        if amount < 0:
            raise InvalidArgumentError(f"Negative emissions {amount} for sector '{sector}'")
        by_sector[sector] = amount
    total = sum(by_sector.values())
    return account.model_copy(
        update={"by_sector": by_sector, "annual": total, "cumulative": account.cumulative + total}
    )


def local_pollution_step(field: PollutionField, production: Mapping[str, float]) -> PollutionField:
    """Each mine adds coefficient x production to its stock; nothing decays."""
    stocks = dict(field.stocks)
    for mine_id, coefficient in field.coefficients.items():
        produced = max(0.0, production.get(mine_id, 0.0))
        stocks[mine_id] = stocks.get(mine_id, 0.0) + coefficient * produced
    return field.model_copy(update={"stocks": stocks})
