"""Two-step R&D: a Bernoulli access draw, then a scaled Beta improvement."""

import math
from typing import Sequence

import numpy as np

from abiam.kernel.rng import RngStream
from abiam.schemas import MachineVintage

LOG_FLOOR = 1e-12


def access_probability(zeta: float, budget: float) -> float:
    if budget <= 0 or zeta <= 0:
        return 0.0
    return 1.0 - math.exp(-zeta * budget)


def _scaled_beta(rng: RngStream, alpha: float, beta: float, low: float, high: float) -> float:
    return low + (high - low) * rng.beta(alpha, beta)


def keep_better(current: MachineVintage, candidate: MachineVintage) -> MachineVintage:
    """Coefficient-wise preference: higher a and e, lower m."""
    return current.model_copy(
        update={
            "labor_productivity": max(current.labor_productivity, candidate.labor_productivity),
            "energy_efficiency": max(current.energy_efficiency, candidate.energy_efficiency),
            "emission_intensity": min(current.emission_intensity, candidate.emission_intensity),
        }
    )


def nelson_winter_innovate(
    technology: MachineVintage,
    rd_budget: float,
    zeta: float,
    alpha: float,
    beta: float,
    low: float,
    high: float,
    rng: RngStream,
) -> MachineVintage:
    success = rng.random() < access_probability(zeta, rd_budget)
    if not success:
        return technology
    x_a = _scaled_beta(rng, alpha, beta, low, high)
    x_e = _scaled_beta(rng, alpha, beta, low, high)
    x_m = _scaled_beta(rng, alpha, beta, low, high)
    candidate = MachineVintage(
        labor_productivity=technology.labor_productivity * (1.0 + x_a),
        energy_efficiency=technology.energy_efficiency * (1.0 + x_e),
        emission_intensity=max(0.0, technology.emission_intensity * (1.0 - x_m)),
        price=technology.price,
    )
    return keep_better(technology, candidate)


def technology_distance(a: MachineVintage, b: MachineVintage) -> float:
    def logs(v: MachineVintage) -> np.ndarray:
        return np.log(
            np.maximum(
                [v.labor_productivity, v.energy_efficiency, v.emission_intensity],
                LOG_FLOOR,
            )
        )

    return float(np.linalg.norm(logs(a) - logs(b)))


def imitate(
    technology: MachineVintage,
    population: Sequence[MachineVintage],
    access: float,
    rng: RngStream,
) -> MachineVintage:
    """Copy a competitor picked with weight 1/distance, keeping what is better."""
    if rng.random() >= access:
        return technology
    distances = [technology_distance(technology, other) for other in population]
    candidates = [(d, other) for d, other in zip(distances, population) if d > 0]
    if not candidates:
        return technology
    pick = rng.choice_index([1.0 / d for d, _ in candidates])
    return keep_better(technology, candidates[pick][1])
