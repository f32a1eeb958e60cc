"""Bundled desk-scale test scenes.

Rooms are wound so that their normals face inwards and obstacles so that
their normals face outwards; in both cases normals point into the air.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..config import Settings, settings
from ..errors import ConfigurationError
from ..geometry.mesh import TriangleMesh
from ..geometry.vector import VecLike, vec3

logger = logging.getLogger(__name__)

ROOM_SIZE = (7.0, 7.0, 3.0)
OBSTACLE_LO = (3.0, 2.0, 0.0)
OBSTACLE_HI = (4.0, 4.5, 1.5)

# Corner i of a box has bit 0 -> x, bit 1 -> y, bit 2 -> z, reordered as
# 0 (x0,y0,z0) 1 (x1,y0,z0) 2 (x1,y1,z0) 3 (x0,y1,z0) and the same +4 on top.
BOX_FACES: Dict[str, Tuple[Tuple[int, int, int], Tuple[int, int, int]]] = {
    "bottom": ((0, 2, 1), (0, 3, 2)),
    "top": ((4, 5, 6), (4, 6, 7)),
    "front": ((0, 1, 5), (0, 5, 4)),
    "back": ((3, 7, 6), (3, 6, 2)),
    "left": ((0, 4, 7), (0, 7, 3)),
    "right": ((1, 2, 6), (1, 6, 5)),
}


def box_geometry(
    lo: VecLike,
    hi: VecLike,
    inward: bool = False,
    faces: Sequence[str] = tuple(BOX_FACES),
) -> Tuple[np.ndarray, np.ndarray]:
    """Vertices and triangles of an axis-aligned box."""
    (x0, y0, z0), (x1, y1, z1) = vec3(lo), vec3(hi)
    if x1 <= x0 or y1 <= y0 or z1 <= z0:
        raise ConfigurationError(f"degenerate box: {list(lo)} .. {list(hi)}")
    vertices = np.array(
        [
            [x0, y0, z0],
            [x1, y0, z0],
            [x1, y1, z0],
            [x0, y1, z0],
            [x0, y0, z1],
            [x1, y0, z1],
            [x1, y1, z1],
            [x0, y1, z1],
        ]
    )
    triangles: List[Tuple[int, int, int]] = []
    for name in faces:
        for a, b, c in BOX_FACES[name]:
            triangles.append((a, c, b) if inward else (a, b, c))
    return vertices, np.array(triangles, dtype=np.int64).reshape(-1, 3)


def combine(*parts: Tuple[np.ndarray, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    vertices, triangles, offset = [], [], 0
    for part_vertices, part_triangles in parts:
        vertices.append(part_vertices)
        triangles.append(part_triangles + offset)
        offset += len(part_vertices)
    return np.concatenate(vertices), np.concatenate(triangles)


def shoebox(size: VecLike = ROOM_SIZE, settings_obj: Settings = settings) -> TriangleMesh:
    """Closed rectangular room with its corner at the origin."""
    return TriangleMesh(*box_geometry((0.0, 0.0, 0.0), size, inward=True), settings_obj=settings_obj)


def cube(lo: VecLike = (0.0, 0.0, 0.0), edge: float = 1.0, settings_obj: Settings = settings) -> TriangleMesh:
    lo = vec3(lo)
    return TriangleMesh(*box_geometry(lo, lo + edge), settings_obj=settings_obj)


def plane(size: float = 1.0, settings_obj: Settings = settings) -> TriangleMesh:
    """Flat square on z = 0 split into two triangles, facing +z."""
    vertices = np.array([[0.0, 0.0, 0.0], [size, 0.0, 0.0], [size, size, 0.0], [0.0, size, 0.0]])
    return TriangleMesh(vertices, [[0, 1, 2], [0, 2, 3]], settings_obj=settings_obj)


def room_with_obstacle(
    room_size: VecLike = ROOM_SIZE,
    obstacle_lo: VecLike = OBSTACLE_LO,
    obstacle_hi: VecLike = OBSTACLE_HI,
    settings_obj: Settings = settings,
) -> TriangleMesh:
    """Shoebox room with a box obstacle; a box standing on the floor has no bottom face."""
    on_floor = float(vec3(obstacle_lo)[2]) <= 0.0
    faces = [name for name in BOX_FACES if not (on_floor and name == "bottom")]
    room = box_geometry((0.0, 0.0, 0.0), room_size, inward=True)
    obstacle = box_geometry(obstacle_lo, obstacle_hi, faces=faces)
    return TriangleMesh(*combine(room, obstacle), settings_obj=settings_obj)


SCENE_BUILDERS: Dict[str, Callable[..., TriangleMesh]] = {
    "shoebox": shoebox,
    "nlos": room_with_obstacle,
    "cube": cube,
    "plane": plane,
}


def build_scene(name: str, settings_obj: Settings = settings) -> TriangleMesh:
    try:
        builder = SCENE_BUILDERS[name]
    except KeyError:
        raise ConfigurationError(f"unknown scene '{name}'; choose from {', '.join(SCENE_BUILDERS)}") from None
    return builder(settings_obj=settings_obj)


def write_obj(mesh: TriangleMesh, output_file: Union[str, Path]) -> Path:
    path = Path(output_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(mesh.to_obj())
    logger.info("wrote %s to %s", mesh, path)
    return path
