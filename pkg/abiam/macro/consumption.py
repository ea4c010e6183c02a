from typing import NamedTuple, Sequence

import numpy as np

from abiam.exceptions import InvalidArgumentError
from abiam.schemas import Household


class StoneGearyDemand(NamedTuple):
    quantities: np.ndarray
    subsistence_feasible: bool


def logit_product_choice(
    qualities: Sequence[float],
    prices: Sequence[float],
    buyers: Sequence[float],
    intensity: float,
    weight_quality: float = 1.0,
    weight_price: float = 1.0,
    weight_buyers: float = 0.0,
) -> np.ndarray:
    """Choice probabilities over products under a logit rule.

    Utility is a Cobb-Douglas aggregate of quality, price and the number of
    other buyers of the product.
    """
    prices = np.asarray(prices, dtype=float)
    if np.any(prices <= 0):
        raise InvalidArgumentError("Product prices must be positive")
    if intensity < 0:
        raise InvalidArgumentError("Choice intensity must be non-negative")
    utility = (
        np.asarray(qualities, dtype=float) ** weight_quality
        * prices ** (-weight_price)
        * (1.0 + np.asarray(buyers, dtype=float)) ** weight_buyers
    )
    scores = intensity * utility
    scores -= scores.max()
    weights = np.exp(scores)
    return weights / weights.sum()


def stone_geary_demand(
    budget: float,
    prices: Sequence[float],
    minima: Sequence[float],
    shares: Sequence[float],
) -> StoneGearyDemand:
    prices = np.asarray(prices, dtype=float)
    minima = np.asarray(minima, dtype=float)
    shares = np.asarray(shares, dtype=float)
    if abs(shares.sum() - 1.0) > 1e-9:
        raise InvalidArgumentError(f"Budget shares sum to {shares.sum()}, expected 1")
    subsistence = float(prices @ minima)
    if budget < subsistence:
        scale = budget / subsistence if subsistence > 0 else 0.0
        return StoneGearyDemand(minima * scale, False)
    discretionary = budget - subsistence
    return StoneGearyDemand(minima + shares * discretionary / prices, True)


def household_budget(household: Household, variant: str, params: dict[str, float]) -> float:
    """Planned consumption spending for the step, never above current wealth."""
    income = max(0.0, household.income)
    savings = max(0.0, household.cash - income)
    if variant == "dsk":
        budget = income
    elif variant == "abmiam":
        gap = household.cash - params["wealth_target"] * household.permanent_income
        budget = income + params["wealth_adjustment"] * gap
    elif variant == "cfhs":
        budget = params["consumption_propensity"] * income + savings
    elif variant == "grsw":
        budget = income + params["savings_drawdown"] * savings
    else:
        raise InvalidArgumentError(f"Unknown household variant '{variant}'")
    budget = min(max(0.0, budget), max(0.0, household.cash))
    return budget * (1.0 - household.budget_damage)
