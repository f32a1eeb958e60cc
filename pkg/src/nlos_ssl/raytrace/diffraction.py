"""Diffraction geometry on wedges: diffractability, shadow sectors and cone directions.

Azimuths are measured in the wedge's local frame, from ``e_x`` towards ``e_y``
around the edge axis ``e_z``. The two faces sit at +/- theta_w / 2, so the air
around the edge spans ``[theta_w / 2, 2*pi - theta_w / 2]``. Internally a
sector is expressed as an offset ``psi`` from the face at +theta_w / 2, i.e.
the air is ``psi in [0, 2*pi - theta_w]``.
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..geometry.proximity import closest_approach_grid
from ..geometry.vector import Vec3, VecLike, vec3
from ..geometry.wedges import Wedge
from .models import RaySegment

TWO_PI = 2.0 * math.pi
ANGLE_EPS = 1e-12
PROJECTION_EPS = 1e-12


def air_offset(wedge: Wedge, vector: Vec3) -> Optional[float]:
    """Offset of a vector's azimuth from the first face, or None if parallel to the edge."""
    x = float(vector @ wedge.e_x)
    y = float(vector @ wedge.e_y)
    if math.hypot(x, y) <= PROJECTION_EPS:
        return None
    return (math.atan2(y, x) - wedge.angle / 2.0) % TWO_PI


def shadow_sector(wedge: Wedge, incident: VecLike) -> Optional[Tuple[float, float]]:
    """Air-offset interval hidden from the incident ray's origin by the wedge.

    The straight continuation of the incident ray is the shadow boundary; the
    shadow extends from it to the face on the far side. ``None`` when the
    continuation runs into the solid (both faces lit) or the ray is parallel to
    the edge.
    """
    continuation = air_offset(wedge, vec3(incident))
    if continuation is None:
        return None
    open_angle = wedge.open_angle
    if continuation > open_angle + ANGLE_EPS:
        return None
    continuation = min(continuation, open_angle)
    arrival = (continuation + math.pi) % TWO_PI
    if continuation >= arrival:
        return continuation, open_angle
    return 0.0, continuation


def shadow_region_test(wedge: Wedge, incident: VecLike, candidate: VecLike) -> bool:
    """True if ``candidate`` points into the shadow region of ``incident`` (boundary included)."""
    sector = shadow_sector(wedge, incident)
    if sector is None:
        return False
    offset = air_offset(wedge, vec3(candidate))
    if offset is None:
        return False
    lo, hi = sector
    return lo - ANGLE_EPS <= offset <= hi + ANGLE_EPS


def local_cone_direction(azimuth: float, theta_d: float) -> Vec3:
    """Cone direction in the wedge frame for one azimuth."""
    sin_d = math.sin(theta_d)
    return np.array([math.cos(azimuth) * sin_d, math.sin(azimuth) * sin_d, -math.cos(theta_d)])


def cone_angle(wedge: Wedge, direction: VecLike) -> float:
    """Cone parameter theta_d for a parent ray.

    Measured against ``-e_z`` so that the cone's axial component ``-cos theta_d``
    equals the parent's ``d . e_z``: every diffracted ray keeps the parent's
    angle to the edge.
    """
    return math.acos(max(-1.0, min(1.0, -float(vec3(direction) @ wedge.e_z))))


def diffraction_azimuths(
    wedge: Wedge,
    n_d: int,
    incident: Optional[VecLike] = None,
    margin: float = math.radians(1.0),
) -> List[float]:
    """Azimuths theta_w/2 + start + p * theta_off, p = 1..n_d, spread over the sector."""
    if n_d <= 0:
        return []
    if incident is None:
        sector: Optional[Tuple[float, float]] = (0.0, wedge.open_angle)
    else:
        sector = shadow_sector(wedge, incident)
    if sector is None:
        return []
    lo = sector[0] + margin
    hi = sector[1] - margin
    if hi <= lo:
        return []
    theta_off = (hi - lo) / (n_d + 1)
    return [wedge.angle / 2.0 + lo + p * theta_off for p in range(1, n_d + 1)]


def diffraction_directions(
    wedge: Wedge,
    theta_d: float,
    n_d: int,
    incident: Optional[VecLike] = None,
    margin: float = math.radians(1.0),
) -> List[Vec3]:
    """World-frame unit directions of the N_d diffraction rays on the cone.

    Without ``incident`` the rays cover the whole air side of the wedge; with
    it they are restricted to the incident ray's shadow sector.
    """
    if not 0.0 < theta_d < math.pi:
        raise ValueError(f"cone angle must lie in (0, pi); got {theta_d}")
    world_from_local = wedge.frame.T
    directions = []
    for azimuth in diffraction_azimuths(wedge, n_d, incident=incident, margin=margin):
        direction = world_from_local @ local_cone_direction(azimuth, theta_d)
        directions.append(direction / np.linalg.norm(direction))
    return directions


def diffractability_grid(
    origins: np.ndarray,
    directions: np.ndarray,
    edge_starts: np.ndarray,
    edge_ends: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diffractability of P rays against W edges.

    Returns ``(v_d, m_d, ray_params)`` shaped (P, W), (P, W, 3), (P, W). The
    ideal ray runs from the ray origin to the edge point ``m_d`` closest to the
    ray; ``v_d`` is the cosine of the angle between it and the actual ray.
    """
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    grid = closest_approach_grid(origins, directions, edge_starts, edge_ends)
    ideal = grid.edge_points - origins[:, None, :]
    distance = np.linalg.norm(ideal, axis=2)
    on_edge = distance <= PROJECTION_EPS
    cosine = np.sum(ideal * directions[:, None, :], axis=2) / np.where(on_edge, 1.0, distance)
    v_d = np.where(on_edge, 1.0, cosine)
    return np.clip(v_d, -1.0, 1.0), grid.edge_points, grid.ray_params


def diffractability(segment: RaySegment, wedge: Wedge) -> Tuple[float, Vec3]:
    """(v_d, m_d) of a segment's ray with respect to a wedge edge."""
    v_d, m_d, _ = diffractability_grid(segment.origin[None], segment.direction[None], wedge.start[None], wedge.end[None])
    return float(v_d[0, 0]), m_d[0, 0]


def wedge_endpoints(wedges: Sequence[Wedge]) -> Tuple[np.ndarray, np.ndarray]:
    starts = np.array([wedge.start for wedge in wedges]).reshape(-1, 3)
    ends = np.array([wedge.end for wedge in wedges]).reshape(-1, 3)
    return starts, ends
