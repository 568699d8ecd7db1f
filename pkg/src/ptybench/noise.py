"""Photon-budget scaling and seeded Poisson / speckle noise sampling.

Samplers draw one independent substream per pattern, keyed by
(seed, pattern index), so adding patterns to a stack never changes the
draws of earlier patterns.
"""

import math
from enum import Enum

import numpy as np


class NoiseModel(Enum):
    NOISE_FREE = "noise_free"
    POISSON = "poisson"
    SPECKLE = "speckle"


def scale_to_budget(stack: np.ndarray, photons_per_pattern: float) -> np.ndarray:
    """Scale a stack by one global factor so the mean per-pattern total
    intensity equals the photon budget.

    A single scalar preserves relative brightness across positions.
    """
    if photons_per_pattern <= 0 or not math.isfinite(photons_per_pattern):
        raise ValueError(f"photon budget must be positive and finite, "
                         f"got {photons_per_pattern}")
    mean_total = np.mean([p.sum() for p in stack])
    if mean_total == 0:
        raise ValueError("cannot scale an all-zero stack to a photon budget")
    return stack * (photons_per_pattern / mean_total)


def _pattern_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def sample_poisson(means: np.ndarray, seed: int) -> np.ndarray:
    """Independent Poisson draws with the given per-pixel means (integer
    counts, float array)."""
    if np.any(means < 0):
        raise ValueError("Poisson means must be nonnegative")
    out = np.empty_like(means, dtype=float)
    for j in range(len(means)):
        out[j] = _pattern_rng(seed, j).poisson(means[j])
    return out


def sample_speckle(means: np.ndarray, seed: int) -> np.ndarray:
    """Independent exponential draws with the given per-pixel means
    (fully developed speckle: intensity ~ Exp(mean))."""
    if np.any(means < 0):
        raise ValueError("speckle means must be nonnegative")
    out = np.empty_like(means, dtype=float)
    for j in range(len(means)):
        u = _pattern_rng(seed, j).random(means[j].shape)  # [0, 1)
        out[j] = -means[j] * np.log1p(-u)                 # mean * Exp(1)
    return out


def apply_noise(stack: np.ndarray, model: NoiseModel, seed: int) -> np.ndarray:
    if model is NoiseModel.NOISE_FREE:
        return stack.copy()
    if model is NoiseModel.POISSON:
        return sample_poisson(stack, seed)
    if model is NoiseModel.SPECKLE:
        return sample_speckle(stack, seed)
    raise ValueError(f"unknown noise model {model!r}")


def poisson_log_pmf(y: int, m: float) -> float:
    """log P(y | m) for the Poisson distribution, numerically stable."""
    if m <= 0:
        raise ValueError(f"Poisson mean must be positive, got {m}")
    if y < 0 or y != int(y):
        raise ValueError(f"count must be a nonnegative integer, got {y}")
    return y * math.log(m) - m - math.lgamma(y + 1)
