import math
from pathlib import Path

import numpy as np
import pytest

from nlos_ssl.config import settings
from nlos_ssl.geometry.mesh import TriangleMesh
from nlos_ssl.geometry.wedges import extract_wedges
from nlos_ssl.synth.scenes import cube, room_with_obstacle, shoebox

WEDGE_THRESHOLD = math.radians(170.0)

CUBE_OBJ = """\
# unit cube, outward normals
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 4 8 7 3
f 1 5 8 4
f 2 3 7 6
"""

# Two perpendicular unit walls on y = 0 and x = 0 sharing the z axis; the
# normals face -y and -x so the solid side is the x > 0, y > 0 quadrant.
L_WALL_VERTICES = [
    [0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0],
    [1.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
    [0.0, 1.0, 1.0],
]
L_WALL_TRIANGLES = [[0, 2, 3], [0, 3, 1], [0, 1, 5], [0, 5, 4]]


@pytest.fixture
def test_settings(tmp_path):
    return settings.model_copy(update={"output_dir": tmp_path / "results", "write_html_report": False})


@pytest.fixture
def cube_obj(tmp_path) -> Path:
    path = tmp_path / "cube.obj"
    path.write_text(CUBE_OBJ)
    return path


@pytest.fixture
def cube_mesh() -> TriangleMesh:
    return cube()


@pytest.fixture
def cube_wedges(cube_mesh):
    return extract_wedges(cube_mesh, WEDGE_THRESHOLD)


@pytest.fixture
def l_wall_mesh() -> TriangleMesh:
    return TriangleMesh(L_WALL_VERTICES, L_WALL_TRIANGLES)


@pytest.fixture
def room_mesh() -> TriangleMesh:
    return shoebox()


@pytest.fixture
def nlos_mesh() -> TriangleMesh:
    return room_with_obstacle()


@pytest.fixture
def nlos_wedges(nlos_mesh):
    return extract_wedges(nlos_mesh, WEDGE_THRESHOLD)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_unit_vectors(rng: np.random.Generator, count: int) -> np.ndarray:
    vectors = rng.standard_normal((count, 3))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
