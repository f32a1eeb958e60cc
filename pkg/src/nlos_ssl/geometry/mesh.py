import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from ..config import Settings, settings
from ..errors import MeshFormatError, MeshValidationError
from .bvh import BoundingVolumeHierarchy

logger = logging.getLogger(__name__)

DEGENERATE_AREA = 1e-12

Edge = Tuple[int, int]


def edge_key(a: int, b: int) -> Edge:
    """Undirected edge key with the smaller vertex id first."""
    return (a, b) if a < b else (b, a)


class TriangleMesh:
    """Scene geometry: vertices, triangles, outward normals and edge adjacency.

    The normal of a triangle follows its vertex winding (right-hand rule) and is
    taken to point away from the solid material, i.e. into the air. Rooms are
    therefore wound inwards and obstacles outwards.
    """

    def __init__(
        self,
        vertices: Union[Sequence[Sequence[float]], np.ndarray],
        triangles: Union[Sequence[Sequence[int]], np.ndarray],
        source: Optional[Path] = None,
        settings_obj: Settings = settings,
    ):
        self.settings = settings_obj
        self.source = source
        self.vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        self._validate_indices()

        corners = self.vertices[self.triangles]
        cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        doubled_area = np.linalg.norm(cross, axis=1)
        degenerate = np.flatnonzero(doubled_area * 0.5 <= DEGENERATE_AREA)
        if degenerate.size:
            raise MeshValidationError("degenerate (zero-area) triangles", triangle_ids=degenerate.tolist())
        self.areas = doubled_area * 0.5
        self.normals = cross / doubled_area[:, None] if len(self.triangles) else np.zeros((0, 3))

        self.edge_graph = self._build_edge_graph()
        self.bvh = BoundingVolumeHierarchy(
            corners if len(self.triangles) else np.zeros((0, 3, 3)),
            leaf_size=self.settings.bvh_leaf_size,
        )

    def _validate_indices(self):
        if len(self.triangles) == 0:
            return
        out_of_range = np.flatnonzero(
            (self.triangles < 0).any(axis=1) | (self.triangles >= len(self.vertices)).any(axis=1)
        )
        if out_of_range.size:
            raise MeshValidationError("triangle vertex index out of range", triangle_ids=out_of_range.tolist())

    def _build_edge_graph(self) -> nx.Graph:
        """Vertex graph whose edges carry the ids of the triangles sharing them."""
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.vertices)))
        for tri_id, (a, b, c) in enumerate(self.triangles.tolist()):
            for u, v in ((a, b), (b, c), (c, a)):
                if graph.has_edge(u, v):
                    graph[u][v]["triangles"].append(tri_id)
                else:
                    graph.add_edge(u, v, triangles=[tri_id])
        return graph

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    @property
    def edge_count(self) -> int:
        return self.edge_graph.number_of_edges()

    def edges(self) -> Dict[Edge, List[int]]:
        """Map of undirected edge -> adjacent triangle ids, sorted by edge key."""
        adjacency = {edge_key(u, v): sorted(data["triangles"]) for u, v, data in self.edge_graph.edges(data=True)}
        return dict(sorted(adjacency.items()))

    def boundary_edges(self) -> List[Edge]:
        return [edge for edge, tris in self.edges().items() if len(tris) == 1]

    def interior_edges(self) -> List[Edge]:
        return [edge for edge, tris in self.edges().items() if len(tris) == 2]

    def non_manifold_edges(self) -> List[Edge]:
        return [edge for edge, tris in self.edges().items() if len(tris) > 2]

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        if len(self.vertices) == 0:
            return np.zeros(3), np.zeros(3)
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def triangle_corners(self, tri_id: int) -> np.ndarray:
        return self.vertices[self.triangles[tri_id]]

    def reversed_order(self) -> "TriangleMesh":
        """Same geometry with the triangle list in reverse order."""
        return TriangleMesh(self.vertices, self.triangles[::-1], source=self.source, settings_obj=self.settings)

    def to_obj(self) -> str:
        lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in self.vertices.tolist()]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in self.triangles.tolist()]
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"TriangleMesh(vertices={len(self.vertices)}, triangles={self.triangle_count}, edges={self.edge_count})"


def _parse_index(token: str, vertex_count: int, path: Path, line_number: int) -> int:
    head = token.split("/", 1)[0]
    try:
        index = int(head)
    except ValueError:
        raise MeshFormatError(path, line_number, f"invalid vertex reference '{token}'") from None
    if index == 0:
        raise MeshFormatError(path, line_number, "vertex indices are 1-based; got 0")
    if index < 0:
        index = vertex_count + index
        if index < 0:
            raise MeshFormatError(path, line_number, f"relative vertex reference '{token}' out of range")
        return index
    return index - 1


def load_mesh(path: Union[str, Path], settings_obj: Settings = settings) -> TriangleMesh:
    """Load a Wavefront OBJ file; polygons are fan-triangulated.

    Only ``v`` and ``f`` records are read, everything else is ignored.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")

    vertices: List[List[float]] = []
    triangles: List[Tuple[int, int, int]] = []
    face_lines: List[int] = []

    with open(path, "r") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            record = parts[0]
            if record == "v":
                if len(parts) < 4:
                    raise MeshFormatError(path, line_number, "vertex record needs 3 coordinates")
                try:
                    vertices.append([float(value) for value in parts[1:4]])
                except ValueError:
                    raise MeshFormatError(path, line_number, "vertex coordinates must be numbers") from None
            elif record == "f":
                if len(parts) < 4:
                    raise MeshFormatError(path, line_number, "face record needs at least 3 vertices")
                polygon = [_parse_index(token, len(vertices), path, line_number) for token in parts[1:]]
                for i in range(1, len(polygon) - 1):
                    triangles.append((polygon[0], polygon[i], polygon[i + 1]))
                    face_lines.append(line_number)

    for (a, b, c), line_number in zip(triangles, face_lines):
        if max(a, b, c) >= len(vertices):
            raise MeshFormatError(path, line_number, f"vertex index out of range (have {len(vertices)} vertices)")

    if not triangles:
        logger.warning("%s contains no faces; using an empty scene", path)

    mesh = TriangleMesh(vertices, triangles, source=path, settings_obj=settings_obj)
    logger.debug("Loaded %r from %s", mesh, path)
    return mesh
