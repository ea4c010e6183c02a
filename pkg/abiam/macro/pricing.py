from typing import Protocol, Sequence


class UniformSource(Protocol):
    def uniform(self, low: float, high: float) -> float: ...

    def random(self) -> float: ...


def markup_price_update(
    markup: float, shares: Sequence[float], unit_cost: float, sensitivity: float
) -> tuple[float, float]:
    """New (markup, price) from the last two market shares.

    `shares` is oldest first, so shares[-1] is the share of t-1 and
    shares[-2] the share of t-2.
    """
    if len(shares) >= 2 and shares[-2] > 0:
        growth = (shares[-1] - shares[-2]) / shares[-2]
        markup = max(0.0, markup * (1.0 + sensitivity * growth))
    return markup, (1.0 + markup) * unit_cost


def tatonnement_update(
    price: float,
    sales: float,
    target: float,
    floor: float,
    rng: UniformSource,
    eta: float = 0.1,
    theta_up: float = 0.1,
    theta_down: float = 0.1,
    adopt_probability: float = 1.0,
) -> float:
    """Stochastic price adjustment on strong excess demand or strong shortfall.

    `sales` is the demand the firm met or turned away, `target` what it
    planned to sell.
    """
    candidate = price
    if target > 0:
        gap = (sales - target) / target
    else:
        gap = float("inf") if sales > 0 else 0.0
    if gap > theta_up:
        u = rng.uniform(0.0, 1.0)
        if rng.random() < adopt_probability:
            candidate = price * (1.0 + eta * u)
    elif gap < -theta_down:
        u = rng.uniform(0.0, 1.0)
        if rng.random() < adopt_probability:
            candidate = price * (1.0 - eta * u)
    return max(floor, candidate)
