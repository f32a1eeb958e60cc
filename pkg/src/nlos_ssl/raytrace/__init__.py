from .diffraction import (
    cone_angle,
    diffractability,
    diffractability_grid,
    diffraction_azimuths,
    diffraction_directions,
    shadow_region_test,
    shadow_sector,
)
from .export import write_ray_paths_csv
from .models import Observation, RayPathTree, RaySegment, SegmentKind, TraceConfig
from .tracer import AcousticRayTracer, reflect, trace_frame, trace_recursive

__all__ = [
    "AcousticRayTracer",
    "Observation",
    "RayPathTree",
    "RaySegment",
    "SegmentKind",
    "TraceConfig",
    "cone_angle",
    "diffractability",
    "diffractability_grid",
    "diffraction_azimuths",
    "diffraction_directions",
    "reflect",
    "shadow_region_test",
    "shadow_sector",
    "trace_frame",
    "trace_recursive",
    "write_ray_paths_csv",
]
