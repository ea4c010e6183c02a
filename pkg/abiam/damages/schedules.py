"""Damage schedules: from temperature to damage fractions."""

from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares

from abiam.exceptions import FitError, InvalidArgumentError
from abiam.schemas import BetaParams

MEAN_CEILING = 1.0 - 1e-9
UNIMODAL_MARGIN = 1e-6
LABOR_OPTIMUM = 13.0


def beta_damage_params(
    temperature: float,
    variability: float,
    mu0: float,
    mu1: float,
    c0: float,
    c1: float,
) -> BetaParams:
    """Beta shape for the damage fraction at a temperature anomaly.

    The mean grows linearly with temperature. The concentration c0 / (1 + c1 v)
    falls with temperature variability v, which fattens the right tail; it is
    floored so that both shapes stay above 1.
    """
    if temperature < 0:
        temperature = 0.0
    mean = min(mu0 + mu1 * temperature, MEAN_CEILING)
    if mean <= 0:
        return BetaParams(0.0, 0.0, 0.0)
    concentration = c0 / (1.0 + c1 * max(0.0, variability))
    floor = (1.0 + UNIMODAL_MARGIN) * max(1.0 / mean, 1.0 / (1.0 - mean))
    concentration = max(concentration, floor)
    return BetaParams(mean * concentration, (1.0 - mean) * concentration, mean)


def temperature_variability(history: Sequence[float], window: int) -> float:
    """Standard deviation of temperature changes over the last `window` climate steps."""
    if len(history) < 3:
        return 0.0
    changes = np.diff(np.asarray(history[-(window + 1):], dtype=float))
    return float(changes.std())


def quadratic_multiplier(temperature: float, zeta1: float, zeta2: float) -> float:
    """Output kept after damage, 1 / (1 + zeta1 T^zeta2)."""
    if zeta1 < 0 or zeta2 <= 0:
        raise InvalidArgumentError(f"Damage parameters must satisfy zeta1 >= 0, zeta2 > 0, got {zeta1}, {zeta2}")
    return 1.0 / (1.0 + zeta1 * max(0.0, temperature) ** zeta2)


def quadratic_damage(temperature: float, zeta1: float, zeta2: float) -> float:
    return 1.0 - quadratic_multiplier(temperature, zeta1, zeta2)


class QuadraticFit(NamedTuple):
    zeta1: float
    zeta2: float
    residual: float


def fit_quadratic(temperatures: Sequence[float], mean_damages: Sequence[float], tolerance: float = 0.01) -> QuadraticFit:
    """zeta1, zeta2 so that 1 - 1/(1 + zeta1 T^zeta2) tracks the given mean damages.

    Starts from a least-squares fit of the log-odds on log T and refines on
    the damage levels. Raises FitError when the largest gap stays above
    `tolerance`.
    """
    t = np.maximum(np.asarray(temperatures, dtype=float), 0.0)
    d = np.asarray(mean_damages, dtype=float)
    if len(t) != len(d):
        raise InvalidArgumentError("Temperature and damage paths differ in length")
    if len(d) == 0 or np.all(d <= 0):
        return QuadraticFit(0.0, 2.0, float(np.max(np.abs(d), initial=0.0)))

    usable = (t > 0) & (d > 0) & (d < 1)
    zeta1, zeta2 = 0.0, 2.0
    if usable.sum() >= 2 and np.ptp(np.log(t[usable])) > 0:
        zeta2, log_zeta1 = np.polyfit(np.log(t[usable]), np.log(d[usable] / (1.0 - d[usable])), 1)
        zeta1 = float(np.exp(log_zeta1))
        zeta2 = float(min(max(zeta2, 0.1), 10.0))
    elif usable.any():
        zeta1 = float(np.mean(d[usable] / (1.0 - d[usable]) / t[usable] ** zeta2))

    def gap(x: np.ndarray) -> np.ndarray:
        return 1.0 - 1.0 / (1.0 + x[0] * t ** x[1]) - d

    solution = least_squares(gap, x0=[max(zeta1, 1e-12), zeta2], bounds=([0.0, 0.1], [np.inf, 10.0]))
    zeta1, zeta2 = float(solution.x[0]), float(solution.x[1])
    residual = float(np.max(np.abs(gap(solution.x))))
    if residual > tolerance:
        raise FitError(f"Quadratic schedule misses the mean damage path by {residual:.4f} (tolerance {tolerance})")
    return QuadraticFit(zeta1, zeta2, residual)


class RegionalDamage(NamedTuple):
    agriculture: float
    labor: float
    disaster: float


def regional_damage(
    temperature: float,
    baseline: float,
    labor_kappa: float,
    agri_coefficient: float,
    disaster_coefficient: float,
) -> RegionalDamage:
    """Agriculture, labor-efficiency and disaster-capital shocks for one region.

    Labor damage is quadratic in the distance to 13 degrees and counted
    relative to the region's baseline climate; the other two are linear in
    warming above the baseline.
    """
    warming = max(0.0, temperature - baseline)
    labor = labor_kappa * ((temperature - LABOR_OPTIMUM) ** 2 - (baseline - LABOR_OPTIMUM) ** 2)
    return RegionalDamage(
        agriculture=min(1.0, max(0.0, agri_coefficient * warming)),
        labor=min(1.0, max(0.0, labor)),
        disaster=min(1.0, max(0.0, disaster_coefficient * warming)),
    )
