from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..geometry.vector import Vec3


class FilterParams(BaseModel):
    """Particle-filter parameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_x: int = Field(100, ge=2, description="Particle count")
    sigma_d: float = Field(0.3, gt=0.0, description="Distance-weight standard deviation (m)")
    sigma_s: float = Field(0.2, gt=0.0, description="Motion-perturbation standard deviation (m)")
    sigma_c: float = Field(0.5, gt=0.0, description="Generalized-variance convergence threshold")
    listener_clearance: float = Field(1.0, ge=0.0, description="Radius around the listener with zero likelihood (m)")
    edge_clearance: float = Field(
        1.0, ge=0.0, description="Radius around diffraction edge points with zero likelihood (m); 0 disables"
    )
    bounds_margin: float = Field(0.5, ge=0.0, description="Particles stay inside the scene bounds grown by this (m)")


@dataclass(frozen=True)
class Particle:
    position: Vec3
    weight: float


@dataclass(frozen=True)
class Estimate:
    """Likelihood-weighted mean of the perturbed cloud on a step whose resampled cloud converged."""

    frame: int
    position: Vec3
    generalized_variance: float


@dataclass(frozen=True)
class FilterState:
    """Particle cloud after a step.

    ``step`` counts completed updates; together with ``seed`` it fixes the
    random stream of the next update, so replaying a run is bit-identical.
    """

    positions: np.ndarray
    weights: np.ndarray
    bounds: Tuple[Vec3, Vec3]
    seed: int
    step: int = 0
    generalized_variance: float = float("inf")
    effective_sample_size: float = 0.0
    reinitialized: bool = False

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def particles(self) -> List[Particle]:
        return [Particle(position, float(weight)) for position, weight in zip(self.positions, self.weights)]

    @property
    def centroid(self) -> Vec3:
        return self.positions.mean(axis=0)
