"""Particle weights from their proximity to traced ray segments."""
from typing import Sequence

import numpy as np

from ..geometry.vector import VecLike, vec3
from ..raytrace.models import RayPathTree, RaySegment, SegmentKind


def distance_weight(particle: VecLike, segment: RaySegment, sigma_d: float) -> float:
    """Gaussian of the particle's distance to its perpendicular foot on the segment.

    Zero when the foot falls outside ``[0, length]`` along the segment.
    """
    offset = vec3(particle) - segment.origin
    along = float(offset @ segment.direction)
    if along < 0.0 or along > segment.length:
        return 0.0
    gap_sq = max(float(offset @ offset) - along * along, 0.0)
    return float(np.exp(-gap_sq / (2.0 * sigma_d * sigma_d)))


def particle_likelihood(particle: VecLike, trees: Sequence[RayPathTree], sigma_d: float) -> float:
    """Sum over trees of the best segment weight in each tree."""
    return float(
        sum(max(distance_weight(particle, segment, sigma_d) for segment in tree.segments) for tree in trees)
    )


def segment_weights(positions: np.ndarray, origins: np.ndarray, directions: np.ndarray, lengths: np.ndarray, sigma_d: float) -> np.ndarray:
    """``distance_weight`` for every (particle, segment) pair, shaped (N, M)."""
    offsets = positions[:, None, :] - origins[None, :, :]
    along = np.einsum("nmk,mk->nm", offsets, directions)
    gap_sq = np.maximum(np.einsum("nmk,nmk->nm", offsets, offsets) - along * along, 0.0)
    inside = (along >= 0.0) & (along <= lengths[None, :])
    return np.where(inside, np.exp(-gap_sq / (2.0 * sigma_d * sigma_d)), 0.0)


def likelihoods(positions: np.ndarray, trees: Sequence[RayPathTree], sigma_d: float) -> np.ndarray:
    """``particle_likelihood`` for a whole particle array at once."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    total = np.zeros(len(positions))
    if not trees:
        return total
    arrays = [tree.segment_arrays() for tree in trees]
    origins = np.concatenate([a[0] for a in arrays])
    directions = np.concatenate([a[1] for a in arrays])
    lengths = np.concatenate([a[2] for a in arrays])
    starts = np.cumsum([0] + [len(tree) for tree in trees[:-1]])

    weights = segment_weights(positions, origins, directions, lengths, sigma_d)
    return np.maximum.reduceat(weights, starts, axis=1).sum(axis=1)


def listener_positions(trees: Sequence[RayPathTree]) -> np.ndarray:
    return np.array([tree.root.origin for tree in trees]).reshape(-1, 3)


def diffraction_origins(trees: Sequence[RayPathTree]) -> np.ndarray:
    """Distinct edge points that diffraction segments start from, shaped (K, 3)."""
    points = [
        segment.origin for tree in trees for segment in tree.segments if segment.kind is SegmentKind.DIFFRACTION
    ]
    if not points:
        return np.empty((0, 3))
    return np.unique(np.array(points), axis=0)


def clear_around(scores: np.ndarray, positions: np.ndarray, points: np.ndarray, radius: float) -> np.ndarray:
    """Zero the scores of particles closer than ``radius`` to any of ``points``."""
    if radius <= 0.0 or len(points) == 0:
        return scores
    nearest = np.min(np.linalg.norm(positions[:, None, :] - points[None, :, :], axis=2), axis=1)
    scores[nearest < radius] = 0.0
    return scores
