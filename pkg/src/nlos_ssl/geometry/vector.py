"""Small helpers for 3-vectors stored as float64 numpy arrays."""
from typing import Sequence, Union

import numpy as np

Vec3 = np.ndarray
VecLike = Union[Sequence[float], np.ndarray]

UNIT_TOLERANCE = 1e-9


def vec3(value: VecLike) -> Vec3:
    """Return ``value`` as a float64 array of shape (3,)."""
    arr = np.asarray(value, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected 3 components, got {arr.shape[0]}")
    return arr


def unit(value: VecLike) -> Vec3:
    """Normalize a vector; raises on zero length."""
    arr = vec3(value)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero-length vector")
    return arr / norm


def is_unit(value: VecLike, tolerance: float = UNIT_TOLERANCE) -> bool:
    return abs(float(np.linalg.norm(value)) - 1.0) <= tolerance


def angle_between(a: VecLike, b: VecLike) -> float:
    """Angle in radians between two non-zero vectors, robust near 0 and pi."""
    a = vec3(a)
    b = vec3(b)
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b)))


def any_perpendicular(value: VecLike) -> Vec3:
    """A unit vector perpendicular to ``value``."""
    v = unit(value)
    helper = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    return unit(np.cross(v, helper))


def normalize_rows(rows: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=-1, keepdims=True)
    return rows / norms
