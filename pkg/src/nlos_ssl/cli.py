import functools
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

import click
from rich.logging import RichHandler
from rich.progress import Progress, SpinnerColumn, TextColumn

from .config import settings
from .errors import ConfigurationError, NlosSslError
from .executor.experiment import RunConfig, compare_modes, load_run_config, run_experiment, sweep_nd
from .geometry.mesh import load_mesh
from .geometry.wedges import extract_wedges, write_wedges_csv
from .raytrace.export import write_ray_paths_csv
from .raytrace.models import TraceConfig
from .raytrace.tracer import AcousticRayTracer
from .reporting.reporter import RunReporter
from .synth.frames import FrameSynthesizer
from .synth.models import load_scenario
from .synth.scenes import SCENE_BUILDERS, build_scene, write_obj
from .synth.stream import read_observations, write_observations

EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2


def reports_errors(command):
    """Map library errors onto the CLI's exit-code contract."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (FileNotFoundError, ConfigurationError) as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE_ERROR)
        except NlosSslError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_RUNTIME_ERROR)

    return wrapper


def _progress() -> Progress:
    return Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), transient=True)


def _load_config(config: str, out: Optional[str], seed: Optional[int], mode: Optional[str], threads: Optional[int]) -> RunConfig:
    run_config = load_run_config(config)
    return run_config.with_overrides(
        output_dir=Path(out) if out else None,
        seed=seed,
        mode=mode,
        threads=threads,
    )


def _output_dir(run_config: RunConfig) -> Path:
    return run_config.output_dir or settings.output_dir / run_config.name


def _parse_nd_list(value: str) -> List[int]:
    try:
        values = [int(token) for token in value.split(",") if token.strip()]
    except ValueError:
        raise ConfigurationError(f"--nd expects comma-separated integers; got '{value}'") from None
    if not values:
        raise ConfigurationError("--nd needs at least one value")
    return values


@click.group()
@click.option('--log-level', default=settings.log_level, help='Logging level (DEBUG, INFO, WARNING, ...).')
def main(log_level: str):
    """NLOS-SSL CLI: locate sound sources from direction-of-arrival data.

    Backward acoustic ray tracing with specular reflections and edge diffraction
    feeds a particle filter; a forward oracle synthesizes ground-truth
    observations so every run can be scored against the true source position.
    """
    logging.basicConfig(
        level=log_level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )


@main.command()
@click.argument('mesh_path', type=click.Path(dir_okay=False))
@click.option('--theta-w', type=float, default=settings.wedge_threshold_deg, help='Wedge threshold on the interior dihedral angle, in degrees.')
@click.option('--out', default=None, help='Output CSV. Defaults to <output_dir>/wedges.csv.')
@reports_errors
def wedges(mesh_path: str, theta_w: float, out: Optional[str]):
    """
    Extract diffraction wedges from an OBJ mesh and write them as CSV.

    A wedge is an interior edge whose dihedral angle through the solid is
    smaller than --theta-w.
    """
    mesh = load_mesh(mesh_path)
    found = extract_wedges(mesh, math.radians(theta_w))
    output = Path(out) if out else settings.output_dir / "wedges.csv"
    write_wedges_csv(found, output)
    click.echo(f"{len(found)} wedges written to {output}")


@main.command()
@click.option('--scenario', 'scenario_path', required=True, type=click.Path(dir_okay=False), help='Scenario TOML file.')
@click.option('--out', required=True, help='Observation stream CSV to write.')
@click.option('--seed', type=int, default=None, help='Override the scenario noise seed.')
@reports_errors
def simulate(scenario_path: str, out: str, seed: Optional[int]):
    """
    Synthesize the observation stream of a scenario with the forward oracle.
    """
    scenario = load_scenario(scenario_path)
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    with _progress() as progress:
        task = progress.add_task("[cyan]Synthesizing frames...", total=1)
        frames = FrameSynthesizer(scenario).frames()
        progress.update(task, completed=1)
    write_observations([frame.observations for frame in frames], out)
    observed = sum(len(frame.observations) for frame in frames)
    click.echo(f"{len(frames)} frames, {observed} observations written to {out}")


@main.command()
@click.option('--mesh', 'mesh_path', required=True, type=click.Path(dir_okay=False), help='Scene OBJ file.')
@click.option('--observations', 'observations_path', required=True, type=click.Path(dir_okay=False), help='Observation stream CSV.')
@click.option('--out', required=True, help='Ray-path CSV to write.')
@click.option('--config', 'config_path', default=None, type=click.Path(dir_okay=False), help='Run config whose [trace] table sets the tracer.')
@click.option('--mode', type=click.Choice(["full", "no-diffraction"]), default=None, help='no-diffraction forces N_d = 0.')
@click.option('--threads', type=int, default=None, help='Worker threads for tracing one frame.')
@reports_errors
def trace(mesh_path: str, observations_path: str, out: str, config_path: Optional[str], mode: Optional[str], threads: Optional[int]):
    """
    Backward-trace an observation stream and dump every ray segment as CSV.
    """
    if config_path:
        trace_config = load_run_config(config_path).with_overrides(mode=mode).effective_trace
    else:
        trace_config = TraceConfig(n_d=0) if mode == "no-diffraction" else TraceConfig()
    mesh = load_mesh(mesh_path)
    tracer = AcousticRayTracer(mesh, extract_wedges(mesh, trace_config.wedge_threshold), trace_config)
    frames = read_observations(observations_path)
    with _progress() as progress:
        task = progress.add_task("[cyan]Tracing...", total=len(frames))
        trees = []
        for observations in frames:
            trees.extend(tracer.trace_frame(observations, threads=threads))
            progress.advance(task)
    write_ray_paths_csv(trees, out)
    click.echo(f"{sum(len(tree) for tree in trees)} segments from {len(trees)} observations written to {out}")


@main.command()
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False), help='Run config TOML file.')
@click.option('--out', default=None, help='Output directory for the report files.')
@click.option('--seed', type=int, default=None, help='Override the run seed.')
@click.option('--mode', type=click.Choice(["full", "no-diffraction"]), default=None, help='Tracer mode.')
@click.option('--threads', type=int, default=None, help='Worker threads for tracing one frame.')
@reports_errors
def run(config_path: str, out: Optional[str], seed: Optional[int], mode: Optional[str], threads: Optional[int]):
    """
    Run a scenario end to end: synthesize, trace, localize and report.

    Writes frames.csv, summary.csv, error_vs_time.csv and timing.csv (plus
    report.html unless disabled in settings) to the output directory.
    """
    run_config = _load_config(config_path, out, seed, mode, threads)
    with _progress() as progress:
        task = progress.add_task(f"[cyan]Running {run_config.name} ({run_config.mode})...", total=1)
        report = run_experiment(run_config)
        progress.update(task, completed=1)
    output_dir = _output_dir(run_config)
    RunReporter().write_run(report, output_dir)
    s = report.summary
    click.echo(f"Run complete. Reports saved to {output_dir}")
    click.echo(
        f"Summary: {s.frames_with_estimate}/{s.frames} frames with estimate, "
        f"mean error {s.mean_error:.3f} m, NLOS {s.mean_nlos_error:.3f} m, median frame {s.median_frame_ms:.1f} ms"
    )


@main.command(name="sweep-nd")
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False), help='Run config TOML file.')
@click.option('--nd', 'nd_values', default="0,1,2,3,5", help='Comma-separated N_d values.')
@click.option('--out', default=None, help='Output directory for sweep.csv.')
@click.option('--seed', type=int, default=None, help='Override the run seed.')
@click.option('--threads', type=int, default=None, help='Worker threads for tracing one frame.')
@reports_errors
def sweep_nd_command(config_path: str, nd_values: str, out: Optional[str], seed: Optional[int], threads: Optional[int]):
    """
    Repeat a run for several N_d values and tabulate error and frame time.
    """
    values = _parse_nd_list(nd_values)
    run_config = _load_config(config_path, out, seed, None, threads)
    with _progress() as progress:
        task = progress.add_task(f"[cyan]Sweeping N_d over {values}...", total=1)
        reports = sweep_nd(run_config, values)
        progress.update(task, completed=1)
    output = _output_dir(run_config) / "sweep.csv"
    reporter = RunReporter()
    reporter.write_sweep(reports, output)
    reporter.write_summary(reports, output.with_name("sweep_summary.csv"))
    click.echo(f"Sweep written to {output}")
    for report in reports:
        click.echo(f"  N_d={report.n_d}: mean error {report.summary.mean_error:.3f} m, {report.summary.mean_frame_ms:.1f} ms/frame")


@main.command()
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False), help='Run config TOML file.')
@click.option('--out', default=None, help='Output directory for the comparison files.')
@click.option('--seed', type=int, default=None, help='Override the run seed.')
@click.option('--threads', type=int, default=None, help='Worker threads for tracing one frame.')
@reports_errors
def compare(config_path: str, out: Optional[str], seed: Optional[int], threads: Optional[int]):
    """
    Run full and no-diffraction modes on one config and report the improvement.
    """
    run_config = _load_config(config_path, out, seed, None, threads)
    with _progress() as progress:
        task = progress.add_task("[cyan]Running both modes...", total=1)
        full, baseline = compare_modes(run_config)
        progress.update(task, completed=1)
    output_dir = _output_dir(run_config)
    reporter = RunReporter()
    reporter.write_summary([full, baseline], output_dir / "summary.csv")
    reporter.write_comparison(full, baseline, output_dir / "comparison.csv")
    if settings.write_html_report:
        reporter.generate_html_report([full, baseline], output_dir / "report.html")
    click.echo(f"Comparison written to {output_dir}")
    for row in reporter.comparison_rows(full, baseline):
        click.echo(
            f"  {row['metric']}: full {row['full']:.3f} m, no-diffraction {row['no_diffraction']:.3f} m "
            f"({row['improvement_percent']:.0f}%)"
        )


@main.command()
@click.argument('name', type=click.Choice(sorted(SCENE_BUILDERS)))
@click.option('--out', required=True, help='OBJ file to write.')
@reports_errors
def scene(name: str, out: str):
    """
    Write one of the bundled benchmark scenes as a Wavefront OBJ file.
    """
    path = write_obj(build_scene(name), out)
    click.echo(f"Scene '{name}' written to {path}")
