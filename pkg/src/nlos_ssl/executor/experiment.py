import logging
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..config import Settings, settings
from ..errors import ConfigurationError
from ..geometry.wedges import extract_wedges
from ..localize.models import FilterParams
from ..localize.particle_filter import SourceLocalizer
from ..raytrace.models import SegmentKind, TraceConfig
from ..raytrace.tracer import AcousticRayTracer
from ..reporting.aggregator import FrameRecord, ResultsAggregator, RunReport
from ..synth.frames import FrameSynthesizer, scenario_mesh
from ..synth.models import Scenario, load_scenario

logger = logging.getLogger(__name__)

Mode = Literal["full", "no-diffraction"]
MODES: Tuple[str, ...] = ("full", "no-diffraction")


class RunConfig(BaseModel):
    """Everything that determines one run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: Union[Path, Scenario]
    trace: TraceConfig = Field(default_factory=TraceConfig)
    filter: FilterParams = Field(default_factory=FilterParams)
    mode: Mode = "full"
    output_dir: Optional[Path] = None
    seed: int = 0
    threads: int = Field(1, ge=1)
    frame_budget_ms: Optional[float] = Field(None, gt=0.0)
    name: str = "run"

    @property
    def effective_trace(self) -> TraceConfig:
        """``no-diffraction`` reduces the tracer to the reflection-only baseline."""
        if self.mode == "no-diffraction":
            return self.trace.model_copy(update={"n_d": 0})
        return self.trace

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        updates = {key: value for key, value in overrides.items() if value is not None}
        if "mode" in updates and updates["mode"] not in MODES:
            raise ConfigurationError(f"unknown mode '{updates['mode']}'; choose from {', '.join(MODES)}")
        if updates.get("threads", 1) < 1:
            raise ConfigurationError(f"threads must be >= 1; got {updates['threads']}")
        return self.model_copy(update=updates)


def run_config_from_toml(data: Dict[str, Any], base_dir: Union[str, Path] = ".") -> RunConfig:
    """``scenario = path`` at top level plus ``[run]``, ``[trace]`` and ``[filter]`` tables."""
    base = Path(base_dir)
    data = dict(data)
    fields: Dict[str, Any] = dict(data.pop("run", {}))
    if "scenario" not in data:
        raise ConfigurationError("run config needs a top-level 'scenario' path")
    scenario = Path(data.pop("scenario"))
    fields["scenario"] = scenario if scenario.is_absolute() else base / scenario
    if "output_dir" in fields:
        output_dir = Path(fields["output_dir"])
        fields["output_dir"] = output_dir if output_dir.is_absolute() else base / output_dir
    fields["trace"] = data.pop("trace", {})
    fields["filter"] = data.pop("filter", {})
    if data:
        raise ConfigurationError(f"unknown run config sections: {', '.join(sorted(data))}")
    try:
        return RunConfig.model_validate(fields)
    except ValidationError as e:
        raise ConfigurationError(f"invalid run config: {e}") from e


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    config = run_config_from_toml(data, base_dir=path.parent)
    return config if config.name != "run" else config.model_copy(update={"name": path.stem})


def derive_seeds(seed: int) -> Tuple[int, int]:
    """Independent (observation-noise, particle-filter) seeds from the run seed."""
    noise, particles = np.random.SeedSequence(seed).spawn(2)
    return int(noise.generate_state(1)[0]), int(particles.generate_state(1)[0])


class ExperimentRunner:
    """Run synth -> trace -> localize frame by frame and collect a report."""

    def __init__(self, config: RunConfig, settings_obj: Settings = settings):
        self.settings = settings_obj
        self.config = config
        self.aggregator = ResultsAggregator(self.settings)
        self.frame_budget_ms = config.frame_budget_ms or self.settings.frame_budget_ms

    def _scenario(self) -> Scenario:
        scenario = self.config.scenario
        if not isinstance(scenario, Scenario):
            scenario = load_scenario(scenario)
        noise_seed, _ = derive_seeds(self.config.seed)
        return scenario.model_copy(update={"seed": noise_seed})

    def run(self) -> RunReport:
        config = self.config
        trace_config = config.effective_trace
        scenario = self._scenario()
        mesh = scenario_mesh(scenario, self.settings)
        wedges = extract_wedges(mesh, trace_config.wedge_threshold)
        synthesizer = FrameSynthesizer(scenario, mesh=mesh, wedges=wedges, settings_obj=self.settings)
        tracer = AcousticRayTracer(mesh, wedges, trace_config, settings_obj=self.settings)
        _, filter_seed = derive_seeds(config.seed)
        localizer = SourceLocalizer(mesh.bounds, config.filter, seed=filter_seed, settings_obj=self.settings)

        records: List[FrameRecord] = []
        for index in range(scenario.frame_count):
            frame = synthesizer.frame(index)

            started = time.perf_counter()
            trees = tracer.trace_frame(frame.observations, threads=config.threads)
            traced = time.perf_counter()
            estimate = localizer.update(trees, frame=index)
            finished = time.perf_counter()

            trace_ms = (traced - started) * 1000.0
            filter_ms = (finished - traced) * 1000.0
            if trace_ms + filter_ms > self.frame_budget_ms:
                logger.warning(
                    "frame %d took %.1f ms (budget %.0f ms)", index, trace_ms + filter_ms, self.frame_budget_ms
                )

            ray_counts = {kind: 0 for kind in SegmentKind}
            for tree in trees:
                for kind, count in tree.count_by_kind().items():
                    ray_counts[kind] += count

            state = localizer.state
            records.append(
                FrameRecord(
                    frame=index,
                    time=frame.time,
                    truth=frame.source,
                    estimate=None if estimate is None else estimate.position,
                    generalized_variance=state.generalized_variance,
                    effective_sample_size=state.effective_sample_size,
                    line_of_sight=frame.line_of_sight,
                    silent=frame.silent,
                    observations=len(frame.observations),
                    ray_counts=ray_counts,
                    trace_ms=trace_ms,
                    filter_ms=filter_ms,
                )
            )

        return self.aggregator.aggregate(
            records,
            name=config.name,
            mode=config.mode,
            n_d=trace_config.n_d,
            seed=config.seed,
            frame_budget_ms=self.frame_budget_ms,
            metadata={"wedges": str(len(wedges)), "triangles": str(mesh.triangle_count)},
        )


def run_experiment(config: RunConfig, settings_obj: Settings = settings) -> RunReport:
    return ExperimentRunner(config, settings_obj).run()


def sweep_nd(config: RunConfig, n_d_values: Sequence[int], settings_obj: Settings = settings) -> List[RunReport]:
    """One full-mode run per N_d value."""
    if any(n_d < 0 for n_d in n_d_values):
        raise ConfigurationError(f"N_d values must be >= 0; got {list(n_d_values)}")
    reports = []
    for n_d in n_d_values:
        variant = config.model_copy(
            update={"mode": "full", "trace": config.trace.model_copy(update={"n_d": n_d}), "name": f"{config.name}-nd{n_d}"}
        )
        reports.append(run_experiment(variant, settings_obj))
    return reports


def compare_modes(config: RunConfig, settings_obj: Settings = settings) -> Tuple[RunReport, RunReport]:
    """(full, no-diffraction) runs of the same config and seed."""
    full = run_experiment(config.model_copy(update={"mode": "full", "name": f"{config.name}-full"}), settings_obj)
    baseline = run_experiment(
        config.model_copy(update={"mode": "no-diffraction", "name": f"{config.name}-no-diffraction"}), settings_obj
    )
    return full, baseline
