import time
from typing import Any, Callable

from timeloc.context import RunContext
from timeloc.errors import UnknownExperiment
from timeloc.pipelines.disorder_audit import run_gen_disorder
from timeloc.pipelines.floquet_runs import run_eigenstate_compare, run_levels
from timeloc.pipelines.helpers import json_ready
from timeloc.pipelines.lattice_runs import run_fig2, run_lattice_sweep
from timeloc.pipelines.loclength import run_born_vs_tm
from timeloc.pipelines.sections import run_sos
from timeloc.pipelines.spectra import run_eff_spectrum

Pipeline = Callable[[RunContext], dict[str, Any]]

PIPELINES: dict[str, Pipeline] = {
    "fig1": run_eff_spectrum,
    "custom": run_eff_spectrum,
    "fig2": run_fig2,
    "lattice-sweep": run_lattice_sweep,
    "born-vs-tm": run_born_vs_tm,
    "sos": run_sos,
    "levels": run_levels,
    "eigenstate-compare": run_eigenstate_compare,
    "gen-disorder": run_gen_disorder,
}


def run_experiment(context: RunContext) -> dict[str, Any]:
    """Runs the configured pipeline, then writes the manifest (config echo, checksums, summary, wall time)."""
    name = context.config.experiment
    if name not in PIPELINES:
        raise UnknownExperiment(f"No pipeline named {name!r}")
    started = time.perf_counter()
    context.echo_config()
    context.log(f"Running {name} into {context.output_dir}")
    summary = json_ready(PIPELINES[name](context))
    context.manifest_manager.add_summary(summary)
    context.manifest_manager.finalize(time.perf_counter() - started)
    context.log(f"Finished {name} in {time.perf_counter() - started:.1f}s")
    return summary
