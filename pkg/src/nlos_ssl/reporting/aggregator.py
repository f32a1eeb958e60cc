import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import Settings, settings
from ..geometry.vector import Vec3
from ..raytrace.models import SegmentKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameRecord:
    """Per-frame outcome of a run."""

    frame: int
    time: float
    truth: Vec3
    estimate: Optional[Vec3]
    generalized_variance: float
    effective_sample_size: float
    line_of_sight: bool
    silent: bool
    observations: int
    ray_counts: Dict[SegmentKind, int]
    trace_ms: float = 0.0
    filter_ms: float = 0.0

    @property
    def error(self) -> Optional[float]:
        if self.estimate is None:
            return None
        return float(np.linalg.norm(self.estimate - self.truth))

    @property
    def frame_ms(self) -> float:
        return self.trace_ms + self.filter_ms


@dataclass(frozen=True)
class RunSummary:
    frames: int
    frames_with_estimate: int
    nlos_frames: int
    mean_error: float
    worst_error: float
    mean_los_error: float
    mean_nlos_error: float
    mean_rays: Dict[SegmentKind, float]
    mean_trace_ms: float
    mean_filter_ms: float
    median_frame_ms: float
    over_budget_frames: int

    @property
    def estimate_rate(self) -> float:
        return self.frames_with_estimate / self.frames if self.frames else 0.0

    @property
    def mean_frame_ms(self) -> float:
        return self.mean_trace_ms + self.mean_filter_ms


@dataclass
class RunReport:
    """Frame records plus their summary, tagged with the run's identity."""

    name: str
    mode: str
    n_d: int
    seed: int
    frames: List[FrameRecord]
    summary: RunSummary
    frame_budget_ms: float
    metadata: Dict[str, str] = field(default_factory=dict)

    def over_budget(self, record: FrameRecord) -> bool:
        return record.frame_ms > self.frame_budget_ms


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else math.nan


def improvement_percent(baseline_error: float, full_error: float) -> float:
    """(baseline - full) / full * 100, the relative gain of the full tracer."""
    if not (math.isfinite(baseline_error) and math.isfinite(full_error)) or full_error <= 0.0:
        return math.nan
    return (baseline_error - full_error) / full_error * 100.0


class ResultsAggregator:
    """Aggregate per-frame records into a run report."""

    def __init__(self, settings_obj: Settings = settings):
        self.settings = settings_obj

    def summarize(self, records: Sequence[FrameRecord], frame_budget_ms: Optional[float] = None) -> RunSummary:
        budget = self.settings.frame_budget_ms if frame_budget_ms is None else frame_budget_ms
        errors = [r.error for r in records if r.error is not None]
        los_errors = [r.error for r in records if r.error is not None and r.line_of_sight]
        nlos_errors = [r.error for r in records if r.error is not None and not r.line_of_sight]
        frame_ms = [r.frame_ms for r in records]
        return RunSummary(
            frames=len(records),
            frames_with_estimate=len(errors),
            nlos_frames=sum(1 for r in records if not r.line_of_sight),
            mean_error=_mean(errors),
            worst_error=max(errors) if errors else math.nan,
            mean_los_error=_mean(los_errors),
            mean_nlos_error=_mean(nlos_errors),
            mean_rays={kind: _mean([r.ray_counts.get(kind, 0) for r in records]) for kind in SegmentKind},
            mean_trace_ms=_mean([r.trace_ms for r in records]),
            mean_filter_ms=_mean([r.filter_ms for r in records]),
            median_frame_ms=float(np.median(frame_ms)) if frame_ms else math.nan,
            over_budget_frames=sum(1 for ms in frame_ms if ms > budget),
        )

    def aggregate(
        self,
        records: Sequence[FrameRecord],
        name: str,
        mode: str,
        n_d: int,
        seed: int,
        frame_budget_ms: Optional[float] = None,
        metadata: Optional[Dict[str, str]] = None,
    ) -> RunReport:
        budget = self.settings.frame_budget_ms if frame_budget_ms is None else frame_budget_ms
        summary = self.summarize(records, budget)
        logger.info(
            "%s [%s, N_d=%d]: %d/%d frames with estimate, mean error %.3f m (NLOS %.3f m)",
            name,
            mode,
            n_d,
            summary.frames_with_estimate,
            summary.frames,
            summary.mean_error,
            summary.mean_nlos_error,
        )
        return RunReport(
            name=name,
            mode=mode,
            n_d=n_d,
            seed=seed,
            frames=list(records),
            summary=summary,
            frame_budget_ms=budget,
            metadata=dict(metadata or {}),
        )
