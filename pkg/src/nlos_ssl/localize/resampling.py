from typing import Optional

import numpy as np


def systematic_resample(weights: np.ndarray, rng: np.random.Generator, count: Optional[int] = None) -> np.ndarray:
    """Indices drawn by low-variance (systematic) resampling.

    One uniform offset is shared by ``count`` evenly spaced pointers into the
    cumulative weights, so a particle of weight w is copied floor(count * w)
    or ceil(count * w) times.
    """
    weights = np.asarray(weights, dtype=np.float64)
    count = len(weights) if count is None else count
    cumulative = np.cumsum(weights)
    cumulative /= cumulative[-1]
    pointers = (rng.random() + np.arange(count)) / count
    indices = np.searchsorted(cumulative, pointers, side="right")
    return np.minimum(indices, len(weights) - 1)


def effective_sample_size(weights: np.ndarray) -> float:
    """1 / sum(w^2) of normalized weights."""
    weights = np.asarray(weights, dtype=np.float64)
    return float(1.0 / np.sum(weights * weights))
