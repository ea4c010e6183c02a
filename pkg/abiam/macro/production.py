"""Production functions for consumption- and capital-good firms."""

import math
from typing import Mapping

from scipy.optimize import brentq

from abiam.exceptions import InvalidArgumentError
from abiam.schemas import MachineVintage, VintageHolding

COBB_DOUGLAS_BAND = 1e-12


def produce_vintage_crs(capital: list[VintageHolding], labor: float) -> float:
    """Output of a vintage stock when `labor` workers man the best machines first."""
    if labor <= 0:
        return 0.0
    remaining = float(labor)
    output = 0.0
    for holding in sorted(capital, key=lambda h: -h.vintage.labor_productivity):
        if remaining <= 0:
            break
        active = min(holding.units, remaining)
        output += active * holding.vintage.labor_productivity
        remaining -= active
    return output


def vintage_capacity(capital: list[VintageHolding]) -> float:
    return sum(h.units * h.vintage.labor_productivity for h in capital)


def labor_for_output(capital: list[VintageHolding], target: float) -> float:
    """Workers needed to reach `target`, manning the best machines first."""
    needed = 0.0
    remaining = max(0.0, target)
    for holding in sorted(capital, key=lambda h: -h.vintage.labor_productivity):
        if remaining <= 0:
            break
        capacity = holding.units * holding.vintage.labor_productivity
        if capacity >= remaining:
            needed += remaining / holding.vintage.labor_productivity
            remaining = 0.0
        else:
            needed += holding.units
            remaining -= capacity
    return needed


def energy_for_output(capital: list[VintageHolding], output: float) -> float:
    """Energy used when `output` is produced on the best machines first."""
    energy = 0.0
    remaining = max(0.0, output)
    for holding in sorted(capital, key=lambda h: -h.vintage.labor_productivity):
        if remaining <= 0:
            break
        produced = min(remaining, holding.units * holding.vintage.labor_productivity)
        energy += produced / holding.vintage.energy_efficiency
        remaining -= produced
    return energy


def emissions_for_output(capital: list[VintageHolding], output: float) -> float:
    emissions = 0.0
    remaining = max(0.0, output)
    for holding in sorted(capital, key=lambda h: -h.vintage.labor_productivity):
        if remaining <= 0:
            break
        produced = min(remaining, holding.units * holding.vintage.labor_productivity)
        emissions += produced * holding.vintage.emission_intensity
        remaining -= produced
    return emissions


def _normalized(weights: tuple[float, ...]) -> tuple[float, ...]:
    total = sum(weights)
    if any(w < 0 for w in weights) or total <= 0 or not math.isfinite(total):
        raise InvalidArgumentError(f"CES weights {weights} cannot be normalized")
    return tuple(w / total for w in weights)


def produce_ces(
    capital: float,
    labor: float,
    energy: float,
    alpha_k: float,
    alpha_l: float,
    alpha_e: float,
    sigma: float,
    scale: float = 1.0,
) -> float:
    if sigma <= 0:
        raise InvalidArgumentError(f"Substitution elasticity must be positive, got {sigma}")
    if min(capital, labor, energy) < 0:
        raise InvalidArgumentError("CES inputs must be non-negative")
    weights = _normalized((alpha_k, alpha_l, alpha_e))
    inputs = (capital, labor, energy)
    if abs(sigma - 1.0) < COBB_DOUGLAS_BAND:
        if any(x == 0 and w > 0 for x, w in zip(inputs, weights)):
            return 0.0
        return scale * math.exp(sum(w * math.log(x) for x, w in zip(inputs, weights) if w > 0))
    rho = (sigma - 1.0) / sigma
    if rho < 0 and any(x == 0 and w > 0 for x, w in zip(inputs, weights)):
        return 0.0
    total = sum(w * x**rho for x, w in zip(inputs, weights) if w > 0)
    if total <= 0:
        return 0.0
    return scale * total ** (1.0 / rho)


def ces_inputs_for_output(
    target: float,
    capital: float,
    wage: float,
    energy_price: float,
    alpha_k: float,
    alpha_l: float,
    alpha_e: float,
    sigma: float,
    scale: float = 1.0,
) -> tuple[float, float]:
    """Cost-minimising (labor, energy) reaching `target` with capital fixed.

    The labor/energy ratio follows the first-order conditions; the level is
    found by root search and is capped where fixed capital bounds output.
    """
    if target <= 0:
        return 0.0, 0.0
    _, w_l, w_e = _normalized((alpha_k, alpha_l, alpha_e))
    ratio = ((w_e / w_l) * (max(wage, 1e-12) / max(energy_price, 1e-12))) ** sigma if w_l > 0 else 1.0

    def gap(labor: float) -> float:
        return produce_ces(capital, labor, ratio * labor, alpha_k, alpha_l, alpha_e, sigma, scale) - target

    if gap(0.0) >= 0:
        return 0.0, 0.0
    upper = max(1.0, target)
    ceiling = 1e4 * upper
    while gap(upper) < 0:
        if upper >= ceiling:
            return upper, ratio * upper
        upper *= 2.0
    labor = brentq(gap, 0.0, upper, xtol=1e-12)
    return labor, ratio * labor


def produce_leontief(inputs: Mapping[str, float], requirements: Mapping[str, float]) -> float:
    if not requirements:
        return 0.0
    for factor, requirement in requirements.items():
        if requirement <= 0:
            raise InvalidArgumentError(f"Requirement for '{factor}' must be positive")
    return max(0.0, min(inputs.get(factor, 0.0) / req for factor, req in requirements.items()))


def technology_cost(
    vintage: MachineVintage, wage: float, energy_price: float, carbon_price: float = 0.0
) -> float:
    """Unit production cost on a machine of this vintage."""
    return (
        wage / vintage.labor_productivity
        + energy_price / vintage.energy_efficiency
        + carbon_price * vintage.emission_intensity
    )
