"""
Random directions, ball points and MLMC levels
"""

from enum import Enum

import numpy as np

from ..errors import UsageError


class LevelLaw(str, Enum):
    """
    Distribution of the MLMC level J

    GEOMETRIC: P(J = j) = 2^-j for j >= 1.
    WORKED_EXAMPLE: P(J = j) = 2^-(j+1) for j >= 0, where J = 0 means the
        base term alone (frequencies 1/2, 1/4, 1/8, ... of the outcomes
        g1, g1 + (g3 - g2), g1 + (g4 + g5 - g2 - g3), ...).
    """
    GEOMETRIC = "geometric"
    WORKED_EXAMPLE = "worked_example"


def sample_sphere_batch(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n directions uniform on the unit sphere in R^d, shape (n, d)"""
    if d < 1:
        raise UsageError(f"Sphere dimension must be >= 1, got {d}")
    directions = rng.standard_normal((n, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero; redraw to stay exact
    while np.any(norms == 0.0):
        bad = norms[:, 0] == 0.0
        directions[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(directions, axis=1, keepdims=True)
    return directions / norms


def sample_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    """
    Uniform unit vector in R^d (normalised Gaussian)

    Raises:
        UsageError: If d < 1
    """
    return sample_sphere_batch(1, d, rng)[0]


def sample_ball_batch(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform in the unit ball: sphere direction times U^(1/d)"""
    radii = rng.random(n) ** (1.0 / d)
    return sample_sphere_batch(n, d, rng) * radii[:, None]


def sample_ball(d: int, rng: np.random.Generator) -> np.ndarray:
    return sample_ball_batch(1, d, rng)[0]


def sample_levels(rng: np.random.Generator, size: int, law: LevelLaw = LevelLaw.GEOMETRIC) -> np.ndarray:
    levels = rng.geometric(0.5, size=size)
    if LevelLaw(law) is LevelLaw.WORKED_EXAMPLE:
        levels = levels - 1
    return levels


def sample_level(rng: np.random.Generator, law: LevelLaw = LevelLaw.GEOMETRIC) -> int:
    """Draw one MLMC level J"""
    return int(sample_levels(rng, 1, law)[0])


def level_probability(j: int, law: LevelLaw = LevelLaw.GEOMETRIC) -> float:
    if LevelLaw(law) is LevelLaw.WORKED_EXAMPLE:
        return 0.5 ** (j + 1) if j >= 0 else 0.0
    return 0.5 ** j if j >= 1 else 0.0
