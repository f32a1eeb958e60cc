from .experiment import (
    ExperimentRunner,
    RunConfig,
    compare_modes,
    derive_seeds,
    load_run_config,
    run_config_from_toml,
    run_experiment,
    sweep_nd,
)

__all__ = [
    "ExperimentRunner",
    "RunConfig",
    "compare_modes",
    "derive_seeds",
    "load_run_config",
    "run_config_from_toml",
    "run_experiment",
    "sweep_nd",
]
