import math
from typing import Sequence

from abiam.exceptions import InvalidArgumentError
from abiam.kernel.rng import RngStream
from abiam.schemas import Firm, Household, LaborMarketState


def wage_update(
    wage: float,
    d_productivity: float = 0.0,
    d_price: float = 0.0,
    d_unemployment: float = 0.0,
    variant: str = "dsk",
    psi: tuple[float, float, float] = (1.0, 1.0, 1.0),
    cap: float = 0.05,
    excess_demand: float = 0.0,
    sensitivity: float = 0.0,
) -> float:
    """Wage for the next step.

    dsk: indexed on productivity, prices and unemployment.
    grsw: follows the 12-month price change, capped and downward rigid.
    abmiam: fixed unless labor demand exceeds supply.
    """
    if variant == "dsk":
        if min(psi) < 0:
            raise InvalidArgumentError(f"Wage weights must be non-negative, got {psi}")
        factor = 1.0 + psi[0] * d_productivity + psi[1] * d_price - psi[2] * d_unemployment
        return wage * max(0.0, factor)
    if variant == "grsw":
        return wage * (1.0 + min(max(d_price, 0.0), cap))
    if variant == "abmiam":
        return wage * (1.0 + sensitivity * max(0.0, excess_demand))
    raise InvalidArgumentError(f"Unknown wage variant '{variant}'")


def match_labor(
    firms: Sequence[Firm],
    households: Sequence[Household],
    rng: RngStream,
    max_new_hires: int | None = None,
    max_fire_fraction: float | None = None,
    region: int = 0,
) -> LaborMarketState:
    """Random matching of one regional pool against firms' labor demand.

    Firms are visited in id order; fired workers and vacancies are drawn from
    the stream, so the outcome depends only on the seed and the ids.
    """
    firms = sorted(firms, key=lambda f: f.id)
    pool = {h.id: h for h in households}
    for firm in firms:
        firm.workers = [w for w in firm.workers if w in pool and pool[w].employed_by == firm.id]
        surplus = len(firm.workers) - max(0, firm.labor_demand)
        if surplus <= 0:
            continue
        if max_fire_fraction is not None:
            surplus = min(surplus, math.floor(max_fire_fraction * len(firm.workers)))
        if surplus <= 0:
            continue
        fired = rng.shuffled(sorted(firm.workers))[:surplus]
        for household_id in fired:
            pool[household_id].employed_by = None
            pool[household_id].tenure = 0
        fired_set = set(fired)
        firm.workers = [w for w in firm.workers if w not in fired_set]

    slots: list[str] = []
    for firm in firms:
        vacancies = max(0, firm.labor_demand - len(firm.workers))
        if max_new_hires is not None:
            vacancies = min(vacancies, int(max_new_hires))
        slots.extend([firm.id] * vacancies)
    unemployed = sorted(h.id for h in households if h.employed_by is None)
    by_id = {f.id: f for f in firms}
    matches = []
    for firm_id, household_id in zip(rng.shuffled(slots), rng.shuffled(unemployed)):
        pool[household_id].employed_by = firm_id
        pool[household_id].tenure = 0
        by_id[firm_id].workers.append(household_id)
        matches.append((firm_id, household_id))

    jobless = sum(1 for h in households if h.employed_by is None)
    return LaborMarketState(
        region=region,
        unemployment_rate=jobless / len(households) if households else 0.0,
        matches=matches,
    )
