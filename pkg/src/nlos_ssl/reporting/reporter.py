import csv
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from jinja2 import Environment, FileSystemLoader, select_autoescape

from ..config import Settings, settings
from ..raytrace.models import SegmentKind
from .aggregator import RunReport, improvement_percent

logger = logging.getLogger(__name__)

FRAMES_CSV_HEADER = [
    "frame",
    "time",
    "truth_x",
    "truth_y",
    "truth_z",
    "estimate_x",
    "estimate_y",
    "estimate_z",
    "error",
    "generalized_variance",
    "effective_sample_size",
    "line_of_sight",
    "silent",
    "observations",
    "direct_rays",
    "reflection_rays",
    "diffraction_rays",
]
SUMMARY_CSV_HEADER = [
    "name",
    "mode",
    "n_d",
    "seed",
    "frames",
    "frames_with_estimate",
    "estimate_rate",
    "nlos_frames",
    "mean_error",
    "worst_error",
    "mean_los_error",
    "mean_nlos_error",
    "mean_direct_rays",
    "mean_reflection_rays",
    "mean_diffraction_rays",
]
ERROR_VS_TIME_CSV_HEADER = ["time", "error", "line_of_sight"]
TIMING_CSV_HEADER = ["frame", "trace_ms", "filter_ms", "frame_ms", "over_budget"]
SWEEP_CSV_HEADER = ["n_d", "mean_error", "mean_nlos_error", "estimate_rate", "mean_frame_ms", "median_frame_ms"]
COMPARISON_CSV_HEADER = ["metric", "full", "no_diffraction", "improvement_percent"]


def _number(value: Optional[float], spec: str = ".6f") -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(value, spec)


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


class RunReporter:
    """Write run reports as CSV files and an optional HTML page."""

    def __init__(self, settings_obj: Settings = settings):
        self.settings = settings_obj
        self.templates_dir = Path(__file__).parent / "templates"

    def write_frames(self, report: RunReport, output_file: Union[str, Path]) -> Path:
        rows = []
        for record in report.frames:
            estimate = record.estimate if record.estimate is not None else [None] * 3
            rows.append(
                [record.frame, f"{record.time:.3f}"]
                + [_number(float(v)) for v in record.truth]
                + [_number(None if v is None else float(v)) for v in estimate]
                + [
                    _number(record.error),
                    _number(record.generalized_variance, ".6g"),
                    _number(record.effective_sample_size, ".3f"),
                    int(record.line_of_sight),
                    int(record.silent),
                    record.observations,
                ]
                + [record.ray_counts.get(kind, 0) for kind in SegmentKind]
            )
        return _write_rows(Path(output_file), FRAMES_CSV_HEADER, rows)

    def write_summary(self, reports: Sequence[RunReport], output_file: Union[str, Path]) -> Path:
        rows = []
        for report in reports:
            s = report.summary
            rows.append(
                [
                    report.name,
                    report.mode,
                    report.n_d,
                    report.seed,
                    s.frames,
                    s.frames_with_estimate,
                    _number(s.estimate_rate, ".4f"),
                    s.nlos_frames,
                    _number(s.mean_error),
                    _number(s.worst_error),
                    _number(s.mean_los_error),
                    _number(s.mean_nlos_error),
                ]
                + [_number(s.mean_rays[kind], ".3f") for kind in SegmentKind]
            )
        return _write_rows(Path(output_file), SUMMARY_CSV_HEADER, rows)

    def write_error_vs_time(self, report: RunReport, output_file: Union[str, Path]) -> Path:
        rows = [[f"{r.time:.3f}", _number(r.error), int(r.line_of_sight)] for r in report.frames]
        return _write_rows(Path(output_file), ERROR_VS_TIME_CSV_HEADER, rows)

    def write_timing(self, report: RunReport, output_file: Union[str, Path]) -> Path:
        rows = [
            [r.frame, f"{r.trace_ms:.3f}", f"{r.filter_ms:.3f}", f"{r.frame_ms:.3f}", int(report.over_budget(r))]
            for r in report.frames
        ]
        return _write_rows(Path(output_file), TIMING_CSV_HEADER, rows)

    def write_sweep(self, reports: Sequence[RunReport], output_file: Union[str, Path]) -> Path:
        rows = [
            [
                r.n_d,
                _number(r.summary.mean_error),
                _number(r.summary.mean_nlos_error),
                _number(r.summary.estimate_rate, ".4f"),
                _number(r.summary.mean_frame_ms, ".3f"),
                _number(r.summary.median_frame_ms, ".3f"),
            ]
            for r in reports
        ]
        return _write_rows(Path(output_file), SWEEP_CSV_HEADER, rows)

    def comparison_rows(self, full: RunReport, baseline: RunReport) -> List[Dict[str, float]]:
        rows = []
        for metric in ("mean_error", "mean_nlos_error", "mean_los_error", "worst_error"):
            full_value = getattr(full.summary, metric)
            baseline_value = getattr(baseline.summary, metric)
            rows.append(
                {
                    "metric": metric,
                    "full": full_value,
                    "no_diffraction": baseline_value,
                    "improvement_percent": improvement_percent(baseline_value, full_value),
                }
            )
        return rows

    def write_comparison(self, full: RunReport, baseline: RunReport, output_file: Union[str, Path]) -> Path:
        rows = [
            [row["metric"], _number(row["full"]), _number(row["no_diffraction"]), _number(row["improvement_percent"], ".1f")]
            for row in self.comparison_rows(full, baseline)
        ]
        return _write_rows(Path(output_file), COMPARISON_CSV_HEADER, rows)

    def generate_html_report(self, reports: Sequence[RunReport], output_file: Union[str, Path], template_path: str = "") -> Path:
        """Render the run summaries with the bundled template (or ``template_path``)."""
        if template_path:
            env = Environment(loader=FileSystemLoader(Path(template_path).parent), autoescape=select_autoescape())
            template = env.get_template(Path(template_path).name)
        else:
            env = Environment(loader=FileSystemLoader(self.templates_dir), autoescape=select_autoescape())
            template = env.get_template("run_report.html.j2")

        html_content = template.render(
            reports=reports,
            kinds=list(SegmentKind),
            fmt=_number,
            timestamp=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        )
        report_path = Path(output_file)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        with open(report_path, "w") as f:
            f.write(html_content)
        return report_path.absolute()

    def write_run(self, report: RunReport, output_dir: Union[str, Path]) -> Dict[str, Path]:
        """All artifacts of one run; only ``timing.csv`` and the HTML page hold wall-clock data."""
        out = Path(output_dir)
        written = {
            "frames": self.write_frames(report, out / "frames.csv"),
            "summary": self.write_summary([report], out / "summary.csv"),
            "error_vs_time": self.write_error_vs_time(report, out / "error_vs_time.csv"),
            "timing": self.write_timing(report, out / "timing.csv"),
        }
        if self.settings.write_html_report:
            written["html"] = self.generate_html_report([report], out / "report.html")
        logger.info("wrote %d report files to %s", len(written), out)
        return written
