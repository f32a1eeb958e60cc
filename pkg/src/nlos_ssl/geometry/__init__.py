from .bvh import BoundingVolumeHierarchy, RayHit, intersect, segment_blocked
from .mesh import TriangleMesh, load_mesh
from .proximity import ClosestApproach, ClosestApproachGrid, closest_approach, closest_approach_grid, closest_approach_many
from .wedges import Wedge, extract_wedges, write_wedges_csv

__all__ = [
    "BoundingVolumeHierarchy",
    "ClosestApproach",
    "ClosestApproachGrid",
    "RayHit",
    "TriangleMesh",
    "Wedge",
    "closest_approach",
    "closest_approach_grid",
    "closest_approach_many",
    "extract_wedges",
    "intersect",
    "load_mesh",
    "segment_blocked",
    "write_wedges_csv",
]
