from dataclasses import dataclass

import numpy as np

from .vector import Vec3, VecLike, vec3

PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class ClosestApproach:
    """Closest pair between a forward ray and a closed edge segment."""

    edge_point: Vec3
    ray_point: Vec3
    gap: float
    ray_param: float
    edge_param: float
    parallel: bool


@dataclass(frozen=True)
class ClosestApproachGrid:
    """Closest approaches of P rays against W edges; leading axes are (P, W)."""

    edge_points: np.ndarray
    ray_points: np.ndarray
    gaps: np.ndarray
    ray_params: np.ndarray
    edge_params: np.ndarray
    parallel: np.ndarray


def closest_approach_grid(
    origins: np.ndarray,
    directions: np.ndarray,
    edge_starts: np.ndarray,
    edge_ends: np.ndarray,
) -> ClosestApproachGrid:
    """Closest approach of every ray to every edge.

    The ray parameter is constrained to ``s >= 0`` and the edge parameter to
    ``t in [0, 1]``; the constrained minimizer is found by clamping one
    parameter and re-projecting the other. Parallel pairs use ``s = 0``.
    """
    o = np.asarray(origins, dtype=np.float64).reshape(-1, 1, 3)
    d = np.asarray(directions, dtype=np.float64).reshape(-1, 1, 3)
    a = np.asarray(edge_starts, dtype=np.float64).reshape(1, -1, 3)
    e = np.asarray(edge_ends, dtype=np.float64).reshape(1, -1, 3) - a
    r = o - a

    dd = np.sum(d * d, axis=2)
    de = np.sum(d * e, axis=2)
    ee = np.sum(e * e, axis=2)
    dr = np.sum(d * r, axis=2)
    er = np.sum(e * r, axis=2)
    denom = dd * ee - de * de
    parallel = denom <= PARALLEL_EPS * dd * ee

    s = (de * er - ee * dr) / np.where(parallel, 1.0, denom)
    s = np.maximum(np.where(parallel, 0.0, s), 0.0)
    t = (de * s + er) / ee
    below = t < 0.0
    above = t > 1.0
    s = np.where(below, np.maximum(-dr / dd, 0.0), s)
    s = np.where(above, np.maximum((de - dr) / dd, 0.0), s)
    t = np.clip(t, 0.0, 1.0)
    s = np.where(parallel, 0.0, s)
    t = np.where(parallel, np.clip(er / ee, 0.0, 1.0), t)

    edge_points = a + t[..., None] * e
    ray_points = o + s[..., None] * d
    gaps = np.linalg.norm(edge_points - ray_points, axis=2)
    return ClosestApproachGrid(edge_points, ray_points, gaps, s, t, parallel)


def closest_approach_many(
    origin: VecLike,
    direction: VecLike,
    edge_starts: np.ndarray,
    edge_ends: np.ndarray,
) -> ClosestApproachGrid:
    """One ray against many edges; arrays are indexed by edge only."""
    grid = closest_approach_grid(vec3(origin)[None], vec3(direction)[None], edge_starts, edge_ends)
    return ClosestApproachGrid(
        grid.edge_points[0],
        grid.ray_points[0],
        grid.gaps[0],
        grid.ray_params[0],
        grid.edge_params[0],
        grid.parallel[0],
    )


def closest_approach(origin: VecLike, direction: VecLike, edge_start: VecLike, edge_end: VecLike) -> ClosestApproach:
    """Closest pair (m_d on the edge, m_n on the ray) and their distance."""
    batch = closest_approach_many(origin, direction, vec3(edge_start)[None], vec3(edge_end)[None])
    return ClosestApproach(
        edge_point=batch.edge_points[0],
        ray_point=batch.ray_points[0],
        gap=float(batch.gaps[0]),
        ray_param=float(batch.ray_params[0]),
        edge_param=float(batch.edge_params[0]),
        parallel=bool(batch.parallel[0]),
    )
