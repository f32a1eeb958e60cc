import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from ..config import Settings, settings
from ..geometry.mesh import TriangleMesh, load_mesh
from ..geometry.vector import Vec3, VecLike, vec3
from ..geometry.wedges import Wedge, extract_wedges
from ..raytrace.models import Observation
from .models import ForwardPath, Scenario
from .paths import forward_paths, surface_planes
from .scenes import build_scene

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticFrame:
    """Ground truth and observations for one frame time."""

    frame: int
    time: float
    source: Vec3
    observations: Tuple[Observation, ...]
    paths: Tuple[ForwardPath, ...]
    line_of_sight: bool
    silent: bool


def perturb_direction(direction: VecLike, sigma: float, rng: np.random.Generator) -> Vec3:
    """Rotate by |N(0, sigma)| about a uniformly random axis perpendicular to ``direction``."""
    direction = vec3(direction)
    if sigma <= 0.0:
        return direction
    while True:
        helper = rng.standard_normal(3)
        axis = helper - float(helper @ direction) * direction
        norm = float(np.linalg.norm(axis))
        if norm > 1e-12:
            break
    angle = abs(rng.normal(0.0, sigma))
    rotated = Rotation.from_rotvec(axis / norm * angle).apply(direction)
    return rotated / np.linalg.norm(rotated)


def scenario_mesh(scenario: Scenario, settings_obj: Settings = settings) -> TriangleMesh:
    if scenario.scene.mesh is not None:
        return load_mesh(scenario.scene.mesh, settings_obj=settings_obj)
    return build_scene(scenario.scene.builder, settings_obj=settings_obj)


class FrameSynthesizer:
    """Forward oracle: arrival directions for every frame of a scenario."""

    def __init__(
        self,
        scenario: Scenario,
        mesh: Optional[TriangleMesh] = None,
        wedges: Optional[Sequence[Wedge]] = None,
        wedge_threshold: Optional[float] = None,
        settings_obj: Settings = settings,
    ):
        self.settings = settings_obj
        self.scenario = scenario
        self.mesh = mesh if mesh is not None else scenario_mesh(scenario, settings_obj)
        if wedges is None:
            threshold = wedge_threshold if wedge_threshold is not None else np.radians(settings_obj.wedge_threshold_deg)
            wedges = extract_wedges(self.mesh, threshold)
        self.wedges = list(wedges)
        self.planes = surface_planes(self.mesh)
        self.listener = vec3(scenario.listener.position)
        self.orientation = np.array(scenario.listener.orientation, dtype=np.float64)

    def paths_for(self, source: VecLike) -> List[ForwardPath]:
        return forward_paths(
            source,
            self.listener,
            self.mesh,
            self.wedges,
            self.scenario.max_reflection_order,
            include_diffraction=self.scenario.include_diffraction,
            planes=self.planes,
        )

    def frame(self, index: int) -> SyntheticFrame:
        scenario = self.scenario
        time = float(index / scenario.frame_rate)
        source = scenario.source_at(time)
        paths = tuple(self.paths_for(source))
        silent = scenario.is_silent(time)
        observations: List[Observation] = []
        if not silent:
            rng = np.random.default_rng([scenario.seed, index])
            for path in paths:
                observations.append(
                    Observation(
                        frame=index,
                        index=len(observations),
                        position=self.listener.copy(),
                        direction=perturb_direction(path.arrival_direction, scenario.noise, rng),
                        orientation=self.orientation.copy(),
                        time=time,
                    )
                )
        if not paths:
            logger.debug("frame %d: no propagation path from %s", index, source.tolist())
        return SyntheticFrame(
            frame=index,
            time=time,
            source=source,
            observations=tuple(observations),
            paths=paths,
            line_of_sight=any(path.is_direct for path in paths),
            silent=silent,
        )

    def frames(self) -> List[SyntheticFrame]:
        return [self.frame(index) for index in range(self.scenario.frame_count)]


def emit_frames(
    scenario: Scenario,
    mesh: Optional[TriangleMesh] = None,
    wedges: Optional[Sequence[Wedge]] = None,
) -> List[List[Observation]]:
    """Observation lists per frame; silent or path-less frames are empty."""
    synthesizer = FrameSynthesizer(scenario, mesh=mesh, wedges=wedges)
    return [list(frame.observations) for frame in synthesizer.frames()]
