"""Forward propagation paths: direct, image-source reflections and Fermat edge diffraction."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ..geometry.bvh import segment_blocked
from ..geometry.mesh import TriangleMesh
from ..geometry.vector import Vec3, VecLike, vec3
from ..geometry.wedges import Wedge
from ..raytrace.diffraction import ANGLE_EPS, air_offset, shadow_region_test
from ..raytrace.models import SegmentKind
from .models import ForwardPath

logger = logging.getLogger(__name__)

PLANE_DECIMALS = 6
SIDE_EPS = 1e-9
CONTAINMENT_EPS = 1e-9
FERMAT_TOLERANCE = 1e-9
# legs no longer than this many self-intersection offsets are unresolvable by the tracer
MIN_LEG_FACTOR = 2.0


@dataclass(frozen=True)
class SurfacePlane:
    """Coplanar triangles sharing one orientation; ``normal . x = offset`` on the plane."""

    normal: Vec3
    offset: float
    triangles: Tuple[int, ...]

    def signed_distance(self, point: VecLike) -> float:
        return float(self.normal @ vec3(point)) - self.offset

    def mirror(self, point: VecLike) -> Vec3:
        point = vec3(point)
        return point - 2.0 * self.signed_distance(point) * self.normal


def surface_planes(mesh: TriangleMesh) -> List[SurfacePlane]:
    """Group triangles into oriented planes, ordered by their lowest triangle id."""
    groups: Dict[Tuple[float, ...], List[int]] = {}
    for tri in range(mesh.triangle_count):
        normal = mesh.normals[tri]
        offset = float(normal @ mesh.vertices[mesh.triangles[tri, 0]])
        key = tuple(np.round(np.append(normal, offset), PLANE_DECIMALS).tolist())
        groups.setdefault(key, []).append(tri)
    planes = []
    for tris in groups.values():
        normal = mesh.normals[tris[0]]
        planes.append(SurfacePlane(normal, float(normal @ mesh.vertices[mesh.triangles[tris[0], 0]]), tuple(tris)))
    return planes


def containing_triangle(mesh: TriangleMesh, plane: SurfacePlane, point: VecLike) -> Optional[int]:
    """Lowest id of the plane's triangles containing ``point`` (edges included)."""
    point = vec3(point)
    tris = np.array(plane.triangles)
    corners = mesh.vertices[mesh.triangles[tris]]
    doubled_area = 2.0 * mesh.areas[tris]
    inside = np.ones(len(tris), dtype=bool)
    for i in range(3):
        a = corners[:, i]
        b = corners[:, (i + 1) % 3]
        edge_side = np.einsum("ij,j->i", np.cross(b - a, point - a), plane.normal) / doubled_area
        inside &= edge_side >= -CONTAINMENT_EPS
    hits = tris[inside]
    return int(hits.min()) if hits.size else None


def has_short_leg(vertices: Sequence[VecLike], mesh: TriangleMesh) -> bool:
    """True if any leg of the polyline is too short to be traced as a separate hit."""
    points = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    legs = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return bool(np.any(legs <= MIN_LEG_FACTOR * mesh.settings.self_intersection_eps))


def direct_path(source: VecLike, listener: VecLike, mesh: TriangleMesh) -> Optional[ForwardPath]:
    """Straight path when nothing lies strictly between source and listener."""
    source, listener = vec3(source), vec3(listener)
    if np.allclose(source, listener):
        raise ValueError("source and listener coincide")
    if segment_blocked(mesh, source, listener):
        return None
    return ForwardPath(vertices=(source, listener), kinds=(SegmentKind.DIRECT,))


def _unfold_chain(
    source: Vec3,
    listener: Vec3,
    images: Sequence[Vec3],
    sequence: Sequence[int],
    planes: Sequence[SurfacePlane],
    mesh: TriangleMesh,
) -> Optional[ForwardPath]:
    """Walk back from the listener through each image, validating every bounce and leg."""
    target = listener
    bounces: List[Vec3] = []
    surfaces: List[int] = []
    for image, plane_index in zip(reversed(images), reversed(sequence)):
        plane = planes[plane_index]
        near = plane.signed_distance(target)
        far = plane.signed_distance(image)
        if near <= SIDE_EPS or far >= -SIDE_EPS:
            return None
        bounce = target + near / (near - far) * (image - target)
        tri = containing_triangle(mesh, plane, bounce)
        if tri is None or segment_blocked(mesh, bounce, target):
            return None
        bounces.append(bounce)
        surfaces.append(tri)
        target = bounce
    vertices = (source, *reversed(bounces), listener)
    if has_short_leg(vertices, mesh) or segment_blocked(mesh, source, target):
        return None
    return ForwardPath(
        vertices=vertices,
        kinds=(SegmentKind.DIRECT,) + (SegmentKind.REFLECTION,) * len(bounces),
        surfaces=tuple(reversed(surfaces)),
    )


def image_source_paths(
    source: VecLike,
    listener: VecLike,
    mesh: TriangleMesh,
    max_order: int,
    planes: Optional[Sequence[SurfacePlane]] = None,
) -> List[ForwardPath]:
    """Direct path plus every valid specular chain up to ``max_order`` bounces.

    Images are built by mirroring the source across oriented surface planes,
    never twice in a row across the same plane and only from the plane's air
    side.
    """
    source, listener = vec3(source), vec3(listener)
    planes = surface_planes(mesh) if planes is None else planes
    paths: List[ForwardPath] = []
    seen = set()

    def keep(path: Optional[ForwardPath]):
        if path is not None and path.key() not in seen:
            seen.add(path.key())
            paths.append(path)

    keep(direct_path(source, listener, mesh))

    def expand(images: List[Vec3], sequence: List[int]):
        if sequence:
            keep(_unfold_chain(source, listener, images, sequence, planes, mesh))
        if len(sequence) == max_order:
            return
        current = images[-1] if images else source
        for index, plane in enumerate(planes):
            if sequence and sequence[-1] == index:
                continue
            if plane.signed_distance(current) <= SIDE_EPS:
                continue
            expand(images + [plane.mirror(current)], sequence + [index])

    expand([], [])
    return paths


def fermat_point(start: VecLike, end: VecLike, wedge: Wedge) -> Vec3:
    """Edge point minimizing |start - e| + |e - end| over the closed edge segment."""
    start, end = vec3(start), vec3(end)
    span = wedge.end - wedge.start

    def path_length(t: float) -> float:
        point = wedge.start + t * span
        return float(np.linalg.norm(point - start) + np.linalg.norm(end - point))

    result = minimize_scalar(
        path_length, bounds=(0.0, 1.0), method="bounded", options={"xatol": FERMAT_TOLERANCE / wedge.length}
    )
    best = min((float(result.x), 0.0, 1.0), key=path_length)
    return wedge.start + best * span


def _listener_shadowed(wedge: Wedge, emitter: Vec3, edge_point: Vec3, listener: Vec3) -> bool:
    """Emitter and listener both in air around the edge, the listener inside the emitter's shadow."""
    open_angle = wedge.open_angle
    for point in (emitter, listener):
        offset = air_offset(wedge, point - edge_point)
        if offset is None or offset > open_angle + ANGLE_EPS:
            return False
    return shadow_region_test(wedge, edge_point - emitter, listener - edge_point)


def diffraction_paths(
    source: VecLike,
    listener: VecLike,
    wedges: Sequence[Wedge],
    mesh: TriangleMesh,
    via_reflection: bool = False,
    planes: Optional[Sequence[SurfacePlane]] = None,
) -> List[ForwardPath]:
    """First-order edge-diffraction paths S -> e* -> L, optionally also S -> surface -> e* -> L."""
    source, listener = vec3(source), vec3(listener)
    paths: List[ForwardPath] = []
    for wedge in wedges:
        edge_point = fermat_point(source, listener, wedge)
        if not _listener_shadowed(wedge, source, edge_point, listener):
            continue
        if has_short_leg((source, edge_point, listener), mesh):
            continue
        if segment_blocked(mesh, source, edge_point) or segment_blocked(mesh, edge_point, listener):
            continue
        paths.append(
            ForwardPath(
                vertices=(source, edge_point, listener),
                kinds=(SegmentKind.DIRECT, SegmentKind.DIFFRACTION),
                surfaces=(wedge.id,),
            )
        )

    if via_reflection:
        planes = surface_planes(mesh) if planes is None else planes
        for plane in planes:
            if plane.signed_distance(source) <= SIDE_EPS:
                continue
            image = plane.mirror(source)
            for wedge in wedges:
                path = _reflected_edge_path(source, image, plane, listener, wedge, mesh)
                if path is not None:
                    paths.append(path)
    return paths


def _reflected_edge_path(
    source: Vec3,
    image: Vec3,
    plane: SurfacePlane,
    listener: Vec3,
    wedge: Wedge,
    mesh: TriangleMesh,
) -> Optional[ForwardPath]:
    edge_point = fermat_point(image, listener, wedge)
    near = plane.signed_distance(edge_point)
    far = plane.signed_distance(image)
    if near <= SIDE_EPS or far >= -SIDE_EPS:
        return None
    bounce = edge_point + near / (near - far) * (image - edge_point)
    tri = containing_triangle(mesh, plane, bounce)
    if tri is None or not _listener_shadowed(wedge, bounce, edge_point, listener):
        return None
    if has_short_leg((source, bounce, edge_point, listener), mesh):
        return None
    legs: Tuple[Tuple[Vec3, Vec3], ...] = ((source, bounce), (bounce, edge_point), (edge_point, listener))
    if any(segment_blocked(mesh, a, b) for a, b in legs):
        return None
    return ForwardPath(
        vertices=(source, bounce, edge_point, listener),
        kinds=(SegmentKind.DIRECT, SegmentKind.REFLECTION, SegmentKind.DIFFRACTION),
        surfaces=(tri, wedge.id),
    )


def forward_paths(
    source: VecLike,
    listener: VecLike,
    mesh: TriangleMesh,
    wedges: Sequence[Wedge],
    max_order: int,
    include_diffraction: bool = True,
    planes: Optional[Sequence[SurfacePlane]] = None,
) -> List[ForwardPath]:
    """Every path the oracle synthesizes for one source/listener pair."""
    planes = surface_planes(mesh) if planes is None else planes
    paths = image_source_paths(source, listener, mesh, max_order, planes=planes)
    if include_diffraction:
        paths += diffraction_paths(source, listener, wedges, mesh, via_reflection=max_order >= 1, planes=planes)
    return paths
