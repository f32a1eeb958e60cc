"""Axis-aligned bounding-volume hierarchy and ray/triangle queries.

Rays are traversed as packets: every node is slab-tested against all rays that
reached it at once, and leaves run a vectorized Moller-Trumbore test. A single
ray is simply a packet of one.
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np

from .vector import Vec3, VecLike, vec3

if TYPE_CHECKING:
    from .mesh import TriangleMesh

logger = logging.getLogger(__name__)

SELF_INTERSECTION_EPS = 1e-4
BARYCENTRIC_EPS = 1e-12
TIE_EPS = 1e-12
BOX_PADDING = 1e-9
_TINY_DIRECTION = 1e-30


@dataclass(frozen=True)
class RayHit:
    triangle: int
    point: Vec3
    distance: float
    normal: Vec3


class BoundingVolumeHierarchy:
    """Median-split BVH over a fixed set of triangles (read-only after build)."""

    def __init__(self, corners: np.ndarray, leaf_size: int = 4):
        corners = np.asarray(corners, dtype=np.float64).reshape(-1, 3, 3)
        self.leaf_size = max(1, int(leaf_size))
        self.v0 = corners[:, 0]
        self.e1 = corners[:, 1] - corners[:, 0]
        self.e2 = corners[:, 2] - corners[:, 0]
        self.triangle_count = len(corners)

        self._lo: List[np.ndarray] = []
        self._hi: List[np.ndarray] = []
        self._children: List[Tuple[int, int]] = []
        self._leaf_range: List[Tuple[int, int]] = []
        self._order: List[int] = []
        if self.triangle_count:
            self._tri_min = corners.min(axis=1)
            self._tri_max = corners.max(axis=1)
            self._centroids = corners.mean(axis=1)
            self._build(np.arange(self.triangle_count))

        self.node_lo = np.asarray(self._lo).reshape(-1, 3) - BOX_PADDING
        self.node_hi = np.asarray(self._hi).reshape(-1, 3) + BOX_PADDING
        self.children = np.asarray(self._children, dtype=np.int64).reshape(-1, 2)
        self.leaf_range = np.asarray(self._leaf_range, dtype=np.int64).reshape(-1, 2)
        self.order = np.asarray(self._order, dtype=np.int64)
        logger.debug("Built BVH with %d nodes over %d triangles", self.node_count, self.triangle_count)

    @property
    def node_count(self) -> int:
        return len(self.node_lo)

    def _build(self, indices: np.ndarray) -> int:
        node = len(self._lo)
        self._lo.append(self._tri_min[indices].min(axis=0))
        self._hi.append(self._tri_max[indices].max(axis=0))
        self._children.append((-1, -1))
        self._leaf_range.append((0, 0))

        centroids = self._centroids[indices]
        extent = centroids.max(axis=0) - centroids.min(axis=0)
        axis = int(np.argmax(extent))
        if len(indices) <= self.leaf_size or extent[axis] <= 0.0:
            start = len(self._order)
            self._order.extend(int(i) for i in indices)
            self._leaf_range[node] = (start, len(indices))
            return node

        ordered = indices[np.argsort(centroids[:, axis], kind="stable")]
        middle = len(ordered) // 2
        left = self._build(ordered[:middle])
        right = self._build(ordered[middle:])
        self._children[node] = (left, right)
        return node

    def intersect_many(
        self,
        origins: np.ndarray,
        directions: np.ndarray,
        t_max: np.ndarray,
        t_min: float = SELF_INTERSECTION_EPS,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest hit per ray with distance in (t_min, t_max].

        Returns ``(triangle_ids, distances)``; rays without a hit get id -1 and
        distance ``t_max``. Equal distances resolve to the lowest triangle id.
        """
        origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
        directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
        best_t = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (len(origins),)).copy()
        best_tri = np.full(len(origins), -1, dtype=np.int64)
        if self.triangle_count == 0 or len(origins) == 0:
            return best_tri, best_t

        safe = np.where(np.abs(directions) < _TINY_DIRECTION, np.copysign(_TINY_DIRECTION, directions), directions)
        inverse = 1.0 / safe

        stack = [(0, np.arange(len(origins)))]
        while stack:
            node, rays = stack.pop()
            t1 = (self.node_lo[node] - origins[rays]) * inverse[rays]
            t2 = (self.node_hi[node] - origins[rays]) * inverse[rays]
            t_near = np.minimum(t1, t2).max(axis=1)
            t_far = np.maximum(t1, t2).min(axis=1)
            inside = (t_near <= t_far) & (t_far >= t_min) & (t_near <= best_t[rays] + BOX_PADDING)
            rays = rays[inside]
            if rays.size == 0:
                continue
            start, count = self.leaf_range[node]
            if count:
                self._intersect_leaf(self.order[start:start + count], rays, origins, directions, t_min, best_t, best_tri)
            else:
                left, right = self.children[node]
                stack.append((right, rays))
                stack.append((left, rays))
        return best_tri, best_t

    def brute_force(
        self,
        origins: np.ndarray,
        directions: np.ndarray,
        t_max: np.ndarray,
        t_min: float = SELF_INTERSECTION_EPS,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Exhaustive all-triangle test with the same tie rule as the hierarchy."""
        origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
        directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
        best_t = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (len(origins),)).copy()
        best_tri = np.full(len(origins), -1, dtype=np.int64)
        if self.triangle_count and len(origins):
            self._intersect_leaf(
                np.arange(self.triangle_count), np.arange(len(origins)), origins, directions, t_min, best_t, best_tri
            )
        return best_tri, best_t

    def _intersect_leaf(self, tris, rays, origins, directions, t_min, best_t, best_tri):
        o = origins[rays][:, None, :]
        d = directions[rays][:, None, :]
        e1 = self.e1[tris][None]
        e2 = self.e2[tris][None]
        p = np.cross(d, e2)
        det = np.sum(p * e1, axis=2)
        valid = np.abs(det) > 1e-14
        inv_det = 1.0 / np.where(valid, det, 1.0)
        s = o - self.v0[tris][None]
        u = np.sum(s * p, axis=2) * inv_det
        q = np.cross(s, e1)
        v = np.sum(d * q, axis=2) * inv_det
        t = np.sum(q * e2, axis=2) * inv_det

        current = best_t[rays][:, None]
        hit = (
            valid
            & (u >= -BARYCENTRIC_EPS)
            & (v >= -BARYCENTRIC_EPS)
            & (u + v <= 1.0 + BARYCENTRIC_EPS)
            & (t > t_min)
            & (t <= current + TIE_EPS)
        )
        if not hit.any():
            return
        t_masked = np.where(hit, t, np.inf)
        nearest = t_masked.min(axis=1)
        tied = hit & (t_masked <= nearest[:, None] + TIE_EPS)
        ids = np.where(tied, tris[None, :], np.iinfo(np.int64).max)
        column = ids.argmin(axis=1)
        leaf_tri = ids[np.arange(len(rays)), column]
        leaf_t = t_masked[np.arange(len(rays)), column]

        has_hit = np.isfinite(leaf_t)
        old_t = best_t[rays]
        old_tri = best_tri[rays]
        closer = leaf_t < old_t - TIE_EPS
        tie = (np.abs(leaf_t - old_t) <= TIE_EPS) & ((old_tri < 0) | (leaf_tri < old_tri))
        replace = has_hit & (closer | tie)
        best_t[rays[replace]] = leaf_t[replace]
        best_tri[rays[replace]] = leaf_tri[replace]


def intersect(
    mesh: "TriangleMesh",
    origin: VecLike,
    direction: VecLike,
    max_dist: float,
    eps: Optional[float] = None,
) -> Optional[RayHit]:
    """Nearest surface hit along a ray, or ``None``."""
    origin = vec3(origin)
    direction = vec3(direction)
    t_min = mesh.settings.self_intersection_eps if eps is None else eps
    tri, dist = mesh.bvh.intersect_many(origin[None], direction[None], np.array([max_dist]), t_min=t_min)
    if tri[0] < 0:
        return None
    distance = float(dist[0])
    return RayHit(
        triangle=int(tri[0]),
        point=origin + distance * direction,
        distance=distance,
        normal=mesh.normals[tri[0]].copy(),
    )


def segment_blocked(mesh: "TriangleMesh", start: VecLike, end: VecLike, eps: Optional[float] = None) -> bool:
    """True if any surface lies strictly between the two points (ends excluded by eps)."""
    start = vec3(start)
    end = vec3(end)
    eps = mesh.settings.self_intersection_eps if eps is None else eps
    offset = end - start
    length = float(np.linalg.norm(offset))
    if length <= 2.0 * eps:
        return False
    hit = intersect(mesh, start, offset / length, length - eps, eps=eps)
    return hit is not None
