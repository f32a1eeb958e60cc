from .frames import FrameSynthesizer, SyntheticFrame, emit_frames, perturb_direction, scenario_mesh
from .models import ForwardPath, ListenerPose, Scenario, SceneSpec, Waypoint, load_scenario, loop_trajectory
from .paths import (
    SurfacePlane,
    containing_triangle,
    diffraction_paths,
    direct_path,
    fermat_point,
    forward_paths,
    image_source_paths,
    surface_planes,
)
from .scenes import SCENE_BUILDERS, build_scene, cube, plane, room_with_obstacle, shoebox, write_obj
from .stream import read_observations, write_observations

__all__ = [
    "SCENE_BUILDERS",
    "ForwardPath",
    "FrameSynthesizer",
    "ListenerPose",
    "Scenario",
    "SceneSpec",
    "SurfacePlane",
    "SyntheticFrame",
    "Waypoint",
    "build_scene",
    "containing_triangle",
    "cube",
    "diffraction_paths",
    "direct_path",
    "emit_frames",
    "fermat_point",
    "forward_paths",
    "image_source_paths",
    "load_scenario",
    "loop_trajectory",
    "perturb_direction",
    "plane",
    "read_observations",
    "room_with_obstacle",
    "scenario_mesh",
    "shoebox",
    "surface_planes",
    "write_obj",
    "write_observations",
]
