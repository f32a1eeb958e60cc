from .models import Estimate, FilterParams, FilterState, Particle
from .particle_filter import SourceLocalizer, generalized_variance, init_particles, step
from .resampling import effective_sample_size, systematic_resample
from .weights import distance_weight, likelihoods, particle_likelihood

__all__ = [
    "Estimate",
    "FilterParams",
    "FilterState",
    "Particle",
    "SourceLocalizer",
    "distance_weight",
    "effective_sample_size",
    "generalized_variance",
    "init_particles",
    "likelihoods",
    "particle_likelihood",
    "step",
    "systematic_resample",
]
