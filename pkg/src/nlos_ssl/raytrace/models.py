import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..geometry.vector import UNIT_TOLERANCE, Vec3, is_unit


class SegmentKind(str, Enum):
    DIRECT = "direct"
    REFLECTION = "reflection"
    DIFFRACTION = "diffraction"


class TraceConfig(BaseModel):
    """Parameters of the backward acoustic ray tracer."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_d: int = Field(5, ge=0, description="Diffraction rays generated per wedge event")
    v_th: float = Field(0.95, gt=0.0, lt=1.0, description="Diffractability threshold")
    max_order: int = Field(3, ge=0, description="Maximum combined reflection + diffraction depth")
    max_ray_length: float = Field(30.0, gt=0.0, description="Length of a segment that escapes the scene (m)")
    wedge_threshold: float = Field(math.radians(170.0), gt=0.0, lt=math.pi, description="Theta_W in radians")
    shadow_margin: float = Field(math.radians(1.0), ge=0.0, lt=math.pi / 4, description="Inset from shadow sector edges (rad)")

    @model_validator(mode="before")
    @classmethod
    def _degrees_aliases(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            if "wedge_threshold_deg" in data:
                data["wedge_threshold"] = math.radians(float(data.pop("wedge_threshold_deg")))
            if "shadow_margin_deg" in data:
                data["shadow_margin"] = math.radians(float(data.pop("shadow_margin_deg")))
        return data


@dataclass(frozen=True)
class Observation:
    """One direction of arrival at the listener.

    ``direction`` is the propagation direction of the arriving wavefront in the
    world frame; the backward primary ray travels along ``-direction``.
    ``orientation`` is the listener quaternion ``(x, y, z, w)``.
    """

    frame: int
    index: int
    position: Vec3
    direction: Vec3
    orientation: Vec3 = field(default_factory=lambda: np.array([0.0, 0.0, 0.0, 1.0]))
    time: float = 0.0

    def __post_init__(self):
        if not is_unit(self.direction, UNIT_TOLERANCE):
            raise ValueError(f"observation direction must be unit length; |v| = {np.linalg.norm(self.direction)!r}")


@dataclass(frozen=True)
class RaySegment:
    """A node of a ray-path tree.

    ``event_param`` marks where along the segment a diffraction event was
    detected (the closest approach to the wedge edge); the segment itself still
    runs to its surface hit.
    """

    id: int
    parent: int
    origin: Vec3
    direction: Vec3
    length: float
    order: int
    kind: SegmentKind
    hit_triangle: Optional[int] = None
    source_wedge: Optional[int] = None
    event_wedge: Optional[int] = None
    event_param: Optional[float] = None

    @property
    def end(self) -> Vec3:
        return self.origin + self.length * self.direction

    @property
    def is_root(self) -> bool:
        return self.parent < 0


@dataclass(frozen=True)
class RayPathTree:
    """All segments traced back from one observation, in breadth-first order."""

    observation: int
    frame: int
    segments: Tuple[RaySegment, ...]
    children: Tuple[Tuple[int, ...], ...]

    @property
    def root(self) -> RaySegment:
        return self.segments[0]

    def __len__(self) -> int:
        return len(self.segments)

    def children_of(self, node: int) -> List[RaySegment]:
        return [self.segments[child] for child in self.children[node]]

    def reflection_child(self, node: int) -> Optional[RaySegment]:
        for child in self.children_of(node):
            if child.kind is SegmentKind.REFLECTION:
                return child
        return None

    def diffraction_children(self, node: int) -> List[RaySegment]:
        return [child for child in self.children_of(node) if child.kind is SegmentKind.DIFFRACTION]

    @property
    def depth(self) -> int:
        return max(segment.order for segment in self.segments)

    def count_by_kind(self) -> Dict[SegmentKind, int]:
        counts = Counter(segment.kind for segment in self.segments)
        return {kind: counts.get(kind, 0) for kind in SegmentKind}

    def reflection_chain(self) -> List[RaySegment]:
        """Root followed by successive reflection children."""
        chain = [self.root]
        while True:
            child = self.reflection_child(chain[-1].id)
            if child is None:
                return chain
            chain.append(child)

    def to_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for segment in self.segments:
            graph.add_node(segment.id, kind=segment.kind.value, order=segment.order, length=segment.length)
            if not segment.is_root:
                graph.add_edge(segment.parent, segment.id)
        return graph

    def segment_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Origins (M, 3), directions (M, 3) and lengths (M,)."""
        origins = np.array([segment.origin for segment in self.segments]).reshape(-1, 3)
        directions = np.array([segment.direction for segment in self.segments]).reshape(-1, 3)
        lengths = np.array([segment.length for segment in self.segments])
        return origins, directions, lengths
