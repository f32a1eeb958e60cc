import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigurationError, MeshValidationError
from .mesh import Edge, TriangleMesh
from .vector import Vec3

logger = logging.getLogger(__name__)

WEDGE_CSV_HEADER = ["wedge", "x0", "y0", "z0", "x1", "y1", "z1", "theta_w_deg", "triangle_a", "triangle_b"]


@dataclass(frozen=True)
class Wedge:
    """A sharp mesh edge with its dihedral data and local frame.

    ``e_z`` runs along the edge from ``start`` to ``end``, ``e_x`` bisects the
    solid (interior) dihedral and ``e_y = e_z x e_x``. Both face half-planes sit
    at azimuth +/- ``angle / 2`` from ``e_x``.
    """

    id: int
    edge: Edge
    start: Vec3
    end: Vec3
    triangles: Tuple[int, int]
    angle: float
    e_x: Vec3
    e_y: Vec3
    e_z: Vec3

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def frame(self) -> np.ndarray:
        """Rows are e_x, e_y, e_z (world-from-local is the transpose)."""
        return np.vstack([self.e_x, self.e_y, self.e_z])

    @property
    def open_angle(self) -> float:
        """Angular width of the air side, 2*pi - theta_w."""
        return 2.0 * math.pi - self.angle


def _third_vertex(triangle: np.ndarray, edge: Edge) -> int:
    for vertex in triangle.tolist():
        if vertex not in edge:
            return vertex
    raise MeshValidationError("triangle repeats an edge vertex", edge=edge)


def interior_dihedral(mesh: TriangleMesh, edge: Edge, tri_a: int, tri_b: int) -> Tuple[float, Vec3, Vec3, Vec3]:
    """Dihedral angle through the solid plus the in-face directions and edge axis.

    Returns ``(theta_w, u_a, u_b, axis)`` where ``u_*`` are unit vectors
    perpendicular to the edge pointing into each face.
    """
    start = mesh.vertices[edge[0]]
    axis = mesh.vertices[edge[1]] - start
    axis = axis / np.linalg.norm(axis)

    directions = []
    for tri in (tri_a, tri_b):
        apex = mesh.vertices[_third_vertex(mesh.triangles[tri], edge)] - start
        in_face = apex - (apex @ axis) * axis
        directions.append(in_face / np.linalg.norm(in_face))
    u_a, u_b = directions

    between = math.atan2(float(np.linalg.norm(np.cross(u_a, u_b))), float(u_a @ u_b))
    # faces folding towards each other's back side enclose the solid
    folds_inward = float(u_b @ mesh.normals[tri_a] + u_a @ mesh.normals[tri_b]) < 0.0
    theta_w = between if folds_inward else 2.0 * math.pi - between
    return theta_w, u_a, u_b, axis


def extract_wedges(mesh: TriangleMesh, wedge_threshold: float) -> List[Wedge]:
    """One wedge per interior edge whose interior dihedral is below the threshold (radians)."""
    if not 0.0 < wedge_threshold < math.pi:
        raise ConfigurationError(f"wedge threshold must lie in (0, pi); got {wedge_threshold}")

    non_manifold = mesh.non_manifold_edges()
    if non_manifold:
        raise MeshValidationError("non-manifold edge shared by more than two triangles", edge=non_manifold[0])

    wedges: List[Wedge] = []
    for edge, tris in mesh.edges().items():
        if len(tris) != 2:
            continue
        tri_a, tri_b = tris
        theta_w, u_a, u_b, axis = interior_dihedral(mesh, edge, tri_a, tri_b)
        if not 0.0 < theta_w < wedge_threshold:
            continue
        e_x = u_a + u_b
        e_x = e_x / np.linalg.norm(e_x)
        e_y = np.cross(axis, e_x)
        wedges.append(
            Wedge(
                id=len(wedges),
                edge=edge,
                start=mesh.vertices[edge[0]].copy(),
                end=mesh.vertices[edge[1]].copy(),
                triangles=(tri_a, tri_b),
                angle=theta_w,
                e_x=e_x,
                e_y=e_y,
                e_z=axis,
            )
        )
    logger.info(
        "Extracted %d wedges from %d interior edges (threshold %.1f deg)",
        len(wedges),
        len(mesh.interior_edges()),
        math.degrees(wedge_threshold),
    )
    return wedges


def write_wedges_csv(wedges: Sequence[Wedge], output_file: Union[str, Path]) -> Path:
    """Export wedges: endpoints, theta_w in degrees and adjacent triangle ids."""
    path = Path(output_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(WEDGE_CSV_HEADER)
        for wedge in wedges:
            writer.writerow(
                [wedge.id]
                + [f"{value:.9g}" for value in (*wedge.start, *wedge.end)]
                + [f"{math.degrees(wedge.angle):.6f}", wedge.triangles[0], wedge.triangles[1]]
            )
    return path
