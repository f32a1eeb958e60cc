import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigurationError
from ..geometry.vector import Vec3, unit
from ..raytrace.models import SegmentKind

Point = Tuple[float, float, float]
SceneBuilder = Literal["shoebox", "nlos", "cube", "plane"]


class SceneSpec(BaseModel):
    """Either an OBJ file or one of the bundled scene builders."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mesh: Optional[Path] = None
    builder: Optional[SceneBuilder] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "SceneSpec":
        if (self.mesh is None) == (self.builder is None):
            raise ValueError("scene needs exactly one of 'mesh' or 'builder'")
        return self


class ListenerPose(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    position: Point
    orientation: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0)


class Waypoint(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    time: float = Field(ge=0.0)
    position: Point


class Scenario(BaseModel):
    """Scene, listener, source trajectory and noise model for the forward oracle."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scene: SceneSpec
    listener: ListenerPose
    trajectory: List[Waypoint] = Field(min_length=1)
    frame_rate: float = Field(5.0, gt=0.0, description="Frames per second")
    duration: float = Field(4.0, gt=0.0, description="Simulated time (s)")
    noise: float = Field(math.radians(3.0), ge=0.0, description="Angular noise std (rad)")
    max_reflection_order: int = Field(1, ge=0, le=3)
    include_diffraction: bool = True
    seed: int = 0
    silent: List[Tuple[float, float]] = Field(default_factory=list, description="[start, end) intervals with no sound")

    @field_validator("trajectory")
    @classmethod
    def _strictly_increasing(cls, trajectory: List[Waypoint]) -> List[Waypoint]:
        times = [waypoint.time for waypoint in trajectory]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"trajectory times must be strictly increasing; got {times}")
        return trajectory

    @field_validator("silent")
    @classmethod
    def _ordered_intervals(cls, silent: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        for start, end in silent:
            if end <= start:
                raise ValueError(f"silent interval [{start}, {end}) is empty")
        return silent

    @model_validator(mode="before")
    @classmethod
    def _degrees_alias(cls, data: Any) -> Any:
        if isinstance(data, dict) and "noise_deg" in data:
            data = dict(data)
            data["noise"] = math.radians(float(data.pop("noise_deg")))
        return data

    @property
    def frame_count(self) -> int:
        return max(int(round(self.duration * self.frame_rate)), 1)

    def frame_times(self) -> np.ndarray:
        return np.arange(self.frame_count) / self.frame_rate

    def source_at(self, time: float) -> Vec3:
        """Piecewise-linear source position, held constant outside the trajectory."""
        times = np.array([waypoint.time for waypoint in self.trajectory])
        positions = np.array([waypoint.position for waypoint in self.trajectory], dtype=np.float64)
        return np.array([np.interp(time, times, positions[:, axis]) for axis in range(3)])

    def is_silent(self, time: float) -> bool:
        return any(start <= time < end for start, end in self.silent)

    @property
    def is_static(self) -> bool:
        return len({waypoint.position for waypoint in self.trajectory}) == 1


def loop_trajectory(corners: Sequence[Point], speed: float = 0.25, start_time: float = 0.0) -> List[Waypoint]:
    """Closed polygonal loop through ``corners`` at constant speed."""
    if speed <= 0.0:
        raise ConfigurationError(f"loop speed must be positive; got {speed}")
    if len(corners) < 2:
        raise ConfigurationError("a loop needs at least two corners")
    points = [np.asarray(corner, dtype=np.float64) for corner in corners] + [np.asarray(corners[0], dtype=np.float64)]
    waypoints = [Waypoint(time=start_time, position=tuple(points[0]))]
    time = start_time
    for a, b in zip(points, points[1:]):
        time += float(np.linalg.norm(b - a)) / speed
        waypoints.append(Waypoint(time=time, position=tuple(b)))
    return waypoints


@dataclass(frozen=True)
class ForwardPath:
    """A propagation path from the source to the listener.

    ``kinds[i]`` names the event that starts leg ``i``: the first leg is
    ``direct`` and later legs are ``reflection`` or ``diffraction``.
    ``surfaces[i]`` is the triangle id (reflection) or wedge id (diffraction)
    of interior vertex ``i + 1``.
    """

    vertices: Tuple[Vec3, ...]
    kinds: Tuple[SegmentKind, ...]
    surfaces: Tuple[int, ...] = ()

    @property
    def length(self) -> float:
        return float(sum(np.linalg.norm(b - a) for a, b in zip(self.vertices, self.vertices[1:])))

    @property
    def order(self) -> int:
        return len(self.vertices) - 2

    @property
    def is_direct(self) -> bool:
        return self.order == 0

    @property
    def has_diffraction(self) -> bool:
        return SegmentKind.DIFFRACTION in self.kinds

    @property
    def arrival_direction(self) -> Vec3:
        """Propagation direction of the final leg, at the listener."""
        return unit(self.vertices[-1] - self.vertices[-2])

    def key(self) -> Tuple:
        return tuple(np.round(np.concatenate(self.vertices), 9).tolist())


def _section(data: dict, name: str) -> dict:
    section = data.get(name, {})
    if not isinstance(section, dict):
        raise ConfigurationError(f"[{name}] must be a table")
    return dict(section)


def scenario_from_toml(data: dict, base_dir: Union[str, Path] = ".") -> Scenario:
    """Build a scenario from parsed ``[scene]``, ``[listener]``, ``[source]``, ``[noise]`` and ``[oracle]`` tables."""
    base = Path(base_dir)
    scene = _section(data, "scene")
    if "mesh" in scene:
        mesh = Path(scene["mesh"])
        scene["mesh"] = mesh if mesh.is_absolute() else base / mesh

    source = _section(data, "source")
    fields: dict = {"scene": scene, "listener": _section(data, "listener")}
    if "loop" in source:
        loop = source.pop("loop")
        fields["trajectory"] = loop_trajectory(loop["corners"], loop.get("speed", 0.25))
    elif "waypoints" in source:
        fields["trajectory"] = [{"time": w[0], "position": tuple(w[1:4])} for w in source.pop("waypoints")]
    elif "position" in source:
        fields["trajectory"] = [{"time": 0.0, "position": tuple(source.pop("position"))}]
    for key in ("duration", "frame_rate", "silent"):
        if key in source:
            fields[key] = source.pop(key)
    if source:
        raise ConfigurationError(f"unknown [source] keys: {', '.join(sorted(source))}")
    trajectory = fields.get("trajectory", [])
    if "duration" not in fields and len(trajectory) > 1:
        last = trajectory[-1]
        fields["duration"] = last.time if isinstance(last, Waypoint) else last["time"]

    noise = _section(data, "noise")
    if "sigma_deg" in noise:
        fields["noise_deg"] = noise.pop("sigma_deg")
    if "seed" in noise:
        fields["seed"] = noise.pop("seed")
    if noise:
        raise ConfigurationError(f"unknown [noise] keys: {', '.join(sorted(noise))}")

    fields.update(_section(data, "oracle"))
    try:
        return Scenario.model_validate(fields)
    except ValidationError as e:
        raise ConfigurationError(f"invalid scenario: {e}") from e


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    return scenario_from_toml(data, base_dir=path.parent)
