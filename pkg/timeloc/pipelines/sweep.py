import time
from typing import Any, Sequence

from joblib import Parallel, delayed

from timeloc.config import ExperimentConfig, apply_values, numeric_field_names
from timeloc.context import RunContext
from timeloc.errors import ConfigurationError, SweepFailed, TimelocException


def _run_point(config: ExperimentConfig, axis: str, value: float, point_dir: str) -> tuple[float, dict[str, Any] | None, str | None]:
    from timeloc.pipelines import run_experiment  # Stop circular import

    try:
        point_config = apply_values(config, {axis: value, "output_dir": point_dir})
        point_config.validate()
        return value, run_experiment(RunContext(point_config, threads=1, quiet=True)), None
    except TimelocException as exc:
        return value, None, f"{type(exc).__name__}: {exc}"


def run_sweep(context: RunContext, axis: str | None = None, values: Sequence[float] | None = None) -> list[dict[str, Any]]:
    """Runs the configured pipeline once per axis value (in parallel, each into its own sub-directory) and aggregates
    the point summaries in axis order. Failed points are reported after the completed ones are written."""
    config = context.config
    axis = axis or config.axis
    if axis is None or axis not in numeric_field_names():
        raise ConfigurationError(f"A sweep needs a numeric config field as axis (--axis or sweep.axis), got {axis!r}")
    points = sorted(float(value) for value in (config.values if values is None else values))
    started = time.perf_counter()
    context.echo_config()
    context.log(f"Sweeping {axis} over {len(points)} points of {config.experiment}")
    results = Parallel(n_jobs=context.threads)(
        delayed(_run_point)(config, axis, value, str(context.output_dir / "points" / f"{axis}={value!r}")) for value in points
    )
    completed = [{axis: value} | summary for value, summary, _ in results if summary is not None]
    failed = [(value, message) for value, _, message in results if message is not None]

    keys = sorted({key for row in completed for key in row if key != axis})
    rows = [[row[axis], *(float("nan") if row.get(key) is None else row[key] for key in keys)] for row in completed]
    context.write_table("sweep.csv", [axis, *keys], rows, [f"pipeline={config.experiment}"])
    context.manifest_manager.add_summary({"axis": axis, "points": len(points), "failed_points": [value for value, _ in failed]})
    context.manifest_manager.finalize(time.perf_counter() - started)
    if failed:
        for value, message in failed:
            context.log(f"Point {axis}={value!r} failed: {message}")
        raise SweepFailed(f"{len(failed)} of {len(points)} sweep points failed", completed, failed)
    return completed
