import logging
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config import Settings, settings
from ..errors import ConfigurationError
from ..geometry.vector import VecLike, vec3
from ..raytrace.models import RayPathTree
from .models import Estimate, FilterParams, FilterState
from .resampling import effective_sample_size, systematic_resample
from .weights import clear_around, diffraction_origins, likelihoods, listener_positions

logger = logging.getLogger(__name__)

DISTINCT_TOLERANCE = 1e-12


def init_particles(bounds: Tuple[VecLike, VecLike], n_x: int, seed: int) -> FilterState:
    """``n_x`` particles drawn uniformly inside ``bounds`` with equal weights."""
    if n_x < 2:
        raise ConfigurationError(f"particle count must be at least 2; got {n_x}")
    lo, hi = vec3(bounds[0]), vec3(bounds[1])
    if np.any(hi - lo <= 0.0):
        raise ConfigurationError(f"degenerate particle bounds: {lo.tolist()} .. {hi.tolist()}")
    rng = np.random.default_rng([seed, 0])
    positions = rng.uniform(lo, hi, size=(n_x, 3))
    return FilterState(
        positions=positions,
        weights=np.full(n_x, 1.0 / n_x),
        bounds=(lo, hi),
        seed=seed,
        generalized_variance=generalized_variance(positions),
        effective_sample_size=float(n_x),
    )


def generalized_variance(positions: np.ndarray) -> float:
    """det of the 3x3 position covariance; 0 when fewer than two positions differ."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if len(positions) < 2 or np.all(np.ptp(positions, axis=0) <= DISTINCT_TOLERANCE):
        return 0.0
    return max(float(np.linalg.det(np.cov(positions, rowvar=False))), 0.0)


def _perturb(positions: np.ndarray, sigma_s: float, rng: np.random.Generator) -> np.ndarray:
    directions = rng.standard_normal(positions.shape)
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    directions /= np.where(norms > 0.0, norms, 1.0)
    magnitudes = np.abs(rng.normal(0.0, sigma_s, size=len(positions)))
    return positions + directions * magnitudes[:, None]


def step(
    state: FilterState,
    trees: Sequence[RayPathTree],
    params: FilterParams,
    frame: Optional[int] = None,
) -> Tuple[FilterState, Optional[Estimate]]:
    """Perturb, reweight against the frame's ray paths, resample and test convergence."""
    rng = np.random.default_rng([state.seed, state.step + 1])
    lo, hi = state.bounds
    positions = _perturb(state.positions, params.sigma_s, rng)
    positions = np.clip(positions, lo - params.bounds_margin, hi + params.bounds_margin)

    scores = likelihoods(positions, trees, params.sigma_d)
    if trees:
        clear_around(scores, positions, listener_positions(trees), params.listener_clearance)
        # every parent ray passes through its edge point and every child starts there
        clear_around(scores, positions, diffraction_origins(trees), params.edge_clearance)

    total = float(scores.sum())
    reinitialized = not np.isfinite(total) or total <= 0.0
    if reinitialized:
        weights = np.full(len(positions), 1.0 / len(positions))
    else:
        weights = scores / total
    ess = effective_sample_size(weights)
    weighted_mean = weights @ positions

    indices = systematic_resample(weights, rng, params.n_x)
    positions = positions[indices]
    gv = generalized_variance(positions)

    new_state = replace(
        state,
        positions=positions,
        weights=np.full(params.n_x, 1.0 / params.n_x),
        step=state.step + 1,
        generalized_variance=gv,
        effective_sample_size=ess,
        reinitialized=reinitialized,
    )
    if frame is None:
        frame = trees[0].frame if trees else state.step
    if gv < params.sigma_c:
        return new_state, Estimate(frame=frame, position=weighted_mean, generalized_variance=gv)
    return new_state, None


class SourceLocalizer:
    """Runs the particle filter across a stream of traced frames."""

    def __init__(
        self,
        bounds: Tuple[VecLike, VecLike],
        params: Optional[FilterParams] = None,
        seed: int = 0,
        settings_obj: Settings = settings,
    ):
        self.settings = settings_obj
        self.params = params or FilterParams()
        self.bounds = (vec3(bounds[0]), vec3(bounds[1]))
        self.seed = seed
        self.estimates: List[Estimate] = []
        self.state = init_particles(self.bounds, self.params.n_x, seed)

    def reset(self):
        self.estimates = []
        self.state = init_particles(self.bounds, self.params.n_x, self.seed)

    def update(self, trees: Sequence[RayPathTree], frame: Optional[int] = None) -> Optional[Estimate]:
        self.state, estimate = step(self.state, trees, self.params, frame=frame)
        if self.state.reinitialized and trees:
            logger.debug("frame %s: no particle near any ray path, weights reset", frame)
        if estimate is not None:
            self.estimates.append(estimate)
        return estimate
