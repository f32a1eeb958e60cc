import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import Settings, settings
from ..geometry.mesh import TriangleMesh
from ..geometry.vector import Vec3, VecLike, unit, vec3
from ..geometry.wedges import Wedge
from .diffraction import cone_angle, diffractability_grid, diffraction_directions, wedge_endpoints
from .models import Observation, RayPathTree, RaySegment, SegmentKind, TraceConfig

logger = logging.getLogger(__name__)

V_D_TIE_EPS = 1e-12
MIN_CONE_SINE = 1e-9


def reflect(direction: VecLike, normal: VecLike) -> Vec3:
    """Specular reflection d' = d - 2 (d . n) n, re-normalized."""
    d = vec3(direction)
    n = vec3(normal)
    reflected = d - 2.0 * float(d @ n) * n
    return reflected / np.linalg.norm(reflected)


@dataclass
class _Pending:
    """A segment whose origin and direction are known but not yet terminated."""

    tree: int
    node: int
    parent: int
    origin: Vec3
    direction: Vec3
    order: int
    kind: SegmentKind
    source_slot: Optional[int] = None


class AcousticRayTracer:
    """Backward acoustic ray tracer over a prebuilt mesh and wedge list.

    Segments are expanded level by level so that every level's surface hits
    and wedge tests run as one vectorized batch. The result is identical to a
    depth-first recursion: children are numbered in breadth-first order with
    the reflection child ahead of the diffraction children.
    """

    def __init__(
        self,
        mesh: TriangleMesh,
        wedges: Sequence[Wedge],
        config: Optional[TraceConfig] = None,
        settings_obj: Settings = settings,
    ):
        self.settings = settings_obj
        self.mesh = mesh
        self.wedges = list(wedges)
        self.config = config or TraceConfig()
        self.eps = self.settings.self_intersection_eps
        self._edge_starts, self._edge_ends = wedge_endpoints(self.wedges)

    def trace_frame(self, observations: Sequence[Observation], threads: Optional[int] = None) -> List[RayPathTree]:
        """One ray-path tree per observation, in observation order."""
        observations = list(observations)
        if not observations:
            return []
        frames = {observation.frame for observation in observations}
        if len(frames) > 1:
            raise ValueError(f"observations span several frames: {sorted(frames)}")

        workers = self.settings.threads if threads is None else threads
        if workers > 1 and len(observations) > 1:
            chunks = [observations[i::workers] for i in range(workers) if observations[i::workers]]
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                traced = list(pool.map(self._trace_observations, chunks))
            by_index: Dict[int, RayPathTree] = {}
            for chunk, trees in zip(chunks, traced):
                for observation, tree in zip(chunk, trees):
                    by_index[id(observation)] = tree
            return [by_index[id(observation)] for observation in observations]
        return self._trace_observations(observations)

    def _trace_observations(self, observations: Sequence[Observation]) -> List[RayPathTree]:
        seeds = [
            _Pending(
                tree=i,
                node=0,
                parent=-1,
                origin=vec3(observation.position),
                direction=-vec3(observation.direction),
                order=0,
                kind=SegmentKind.DIRECT,
            )
            for i, observation in enumerate(observations)
        ]
        segments, children = self._expand(seeds, len(observations))
        return [
            RayPathTree(
                observation=observation.index,
                frame=observation.frame,
                segments=tuple(segments[i]),
                children=tuple(tuple(kids) for kids in children[i]),
            )
            for i, observation in enumerate(observations)
        ]

    def trace_recursive(
        self,
        origin: VecLike,
        direction: VecLike,
        depth: int = 0,
        kind: SegmentKind = SegmentKind.DIRECT,
        observation: int = 0,
        frame: int = 0,
    ) -> RayPathTree:
        """Trace one segment and everything it spawns, starting at ``depth``."""
        if depth > self.config.max_order:
            raise ValueError(f"depth {depth} exceeds max_order {self.config.max_order}")
        seed = _Pending(
            tree=0, node=0, parent=-1, origin=vec3(origin), direction=unit(direction), order=depth, kind=kind
        )
        segments, children = self._expand([seed], 1)
        return RayPathTree(
            observation=observation,
            frame=frame,
            segments=tuple(segments[0]),
            children=tuple(tuple(kids) for kids in children[0]),
        )

    def _expand(self, seeds: List[_Pending], tree_count: int):
        segments: List[List[RaySegment]] = [[] for _ in range(tree_count)]
        children: List[List[List[int]]] = [[] for _ in range(tree_count)]
        node_counts = [0] * tree_count
        for seed in seeds:
            node_counts[seed.tree] += 1

        frontier = seeds
        while frontier:
            frontier = self._expand_level(frontier, segments, children, node_counts)
        return segments, children

    def _expand_level(self, level, segments, children, node_counts) -> List[_Pending]:
        config = self.config
        origins = np.array([item.origin for item in level])
        directions = np.array([item.direction for item in level])
        hit_tris, lengths = self.mesh.bvh.intersect_many(
            origins, directions, np.full(len(level), config.max_ray_length), t_min=self.eps
        )
        events = self._detect_events(level, origins, directions, lengths)

        next_level: List[_Pending] = []
        for i, item in enumerate(level):
            length = float(lengths[i])
            hit = int(hit_tris[i])
            can_branch = item.order < config.max_order
            kids: List[int] = []

            if hit >= 0 and can_branch:
                normal = self.mesh.normals[hit]
                next_level.append(
                    _Pending(
                        tree=item.tree,
                        node=node_counts[item.tree],
                        parent=item.node,
                        origin=item.origin + length * item.direction,
                        direction=reflect(item.direction, normal),
                        order=item.order + 1,
                        kind=SegmentKind.REFLECTION,
                    )
                )
                kids.append(node_counts[item.tree])
                node_counts[item.tree] += 1

            event_wedge: Optional[int] = None
            event_param: Optional[float] = None
            event = events.get(i) if can_branch else None
            if event is not None:
                slot, edge_point, ray_param, rays = event
                wedge = self.wedges[slot]
                event_wedge = wedge.id
                event_param = ray_param
                for direction in rays:
                    next_level.append(
                        _Pending(
                            tree=item.tree,
                            node=node_counts[item.tree],
                            parent=item.node,
                            origin=edge_point,
                            direction=direction,
                            order=item.order + 1,
                            kind=SegmentKind.DIFFRACTION,
                            source_slot=slot,
                        )
                    )
                    kids.append(node_counts[item.tree])
                    node_counts[item.tree] += 1

            segments[item.tree].append(
                RaySegment(
                    id=item.node,
                    parent=item.parent,
                    origin=item.origin,
                    direction=item.direction,
                    length=length,
                    order=item.order,
                    kind=item.kind,
                    hit_triangle=hit if hit >= 0 else None,
                    source_wedge=None if item.source_slot is None else self.wedges[item.source_slot].id,
                    event_wedge=event_wedge,
                    event_param=event_param,
                )
            )
            children[item.tree].append(kids)

        # segments are appended level by level, so per-tree lists stay in node-id order
        return next_level

    def _detect_events(self, level, origins, directions, lengths):
        """Best usable wedge per segment whose diffractability exceeds v_th before the surface hit.

        Candidates are ranked by v_d, ties going to the nearer edge point and
        then the lower wedge id. A candidate whose cone angle degenerates or
        whose shadow sector is empty yields no rays and is passed over in
        favour of the next one.
        """
        if self.config.n_d == 0 or not self.wedges:
            return {}
        v_d, edge_points, ray_params = diffractability_grid(origins, directions, self._edge_starts, self._edge_ends)
        candidate = (
            (v_d > self.config.v_th)
            & (ray_params > self.eps)
            & (ray_params <= lengths[:, None] + self.eps)
        )
        for i, item in enumerate(level):
            if item.source_slot is not None:
                candidate[i, item.source_slot] = False

        events = {}
        for i in np.flatnonzero(candidate.any(axis=1)):
            if level[i].order >= self.config.max_order:
                continue
            open_slots = candidate[i].copy()
            distance = np.linalg.norm(edge_points[i] - origins[i], axis=1)
            while open_slots.any():
                scores = np.where(open_slots, v_d[i], -np.inf)
                tied = open_slots & (scores >= scores.max() - V_D_TIE_EPS)
                best = min(np.flatnonzero(tied).tolist(), key=lambda w: (distance[w], self.wedges[w].id))
                open_slots[best] = False
                rays = self._diffracted_rays(best, directions[i])
                if rays:
                    events[int(i)] = (best, edge_points[i, best].copy(), float(ray_params[i, best]), rays)
                    break
        return events

    def _diffracted_rays(self, slot: int, incident: Vec3) -> List[Vec3]:
        wedge = self.wedges[slot]
        theta_d = cone_angle(wedge, incident)
        if math.sin(theta_d) <= MIN_CONE_SINE:
            return []
        return diffraction_directions(
            wedge, theta_d, self.config.n_d, incident=incident, margin=self.config.shadow_margin
        )


def trace_frame(
    observations: Sequence[Observation],
    mesh: TriangleMesh,
    wedges: Sequence[Wedge],
    config: Optional[TraceConfig] = None,
    threads: Optional[int] = None,
) -> List[RayPathTree]:
    """Backward-trace every observation of one frame."""
    return AcousticRayTracer(mesh, wedges, config, settings_obj=mesh.settings).trace_frame(observations, threads)


def trace_recursive(
    origin: VecLike,
    direction: VecLike,
    mesh: TriangleMesh,
    wedges: Sequence[Wedge],
    config: Optional[TraceConfig] = None,
    depth: int = 0,
    kind: SegmentKind = SegmentKind.DIRECT,
) -> RayPathTree:
    """Trace a single segment and its reflection/diffraction descendants."""
    tracer = AcousticRayTracer(mesh, wedges, config, settings_obj=mesh.settings)
    return tracer.trace_recursive(origin, direction, depth=depth, kind=kind)
