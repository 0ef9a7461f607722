from typing import Any

from timeloc.context import RunContext
from timeloc.models.disorder import (
    DriveSpec, correlation_length, cutoff_convergence, effective_coefficients, potential_on_grid, ring_ensemble_variance,
    synthesize_line_potential, write_coefficients, write_line_potential,
)  # fmt: skip
from timeloc.pipelines.helpers import cutoff_for, drive_for
from timeloc.utils import uniform_ring_grid


def run_gen_disorder(context: RunContext) -> dict[str, Any]:
    """Coefficient audit files, the ring potential on a grid, a line potential and ensemble statistics."""
    config = context.config
    drive = drive_for(config)
    c = effective_coefficients(drive)
    context.register(write_coefficients(context.output_path("drive_coefficients.txt"), drive, f"seed={config.seed}"))
    context.register(write_coefficients(context.output_path("effective_coefficients.txt"), c, f"seed={config.seed}"))

    grid = uniform_ring_grid(config.grid_points)
    context.write_table("ring_potential.csv", ["Theta", "potential"], zip(grid, potential_on_grid(c, config.V, grid)), ["Theta in radians; potential in energy units"])

    zeta = correlation_length(config.k0)
    h = config.h if config.h is not None else zeta / 10
    L = config.L if config.L is not None else 200 * zeta
    line = synthesize_line_potential(config.k0, config.V, L, h, config.seed)
    for path in write_line_potential(context.output_path("line_potential"), line):
        context.register(path)

    context.log(f"Sampling {config.realizations} ring realizations")
    variance = ring_ensemble_variance(config.k0, cutoff_for(config), config.seed, config.realizations, context.threads) if config.realizations > 1 else float("nan")
    convergence = cutoff_convergence(DriveSpec(config.k0, cutoff_for(config), config.seed))
    return {"cutoff": cutoff_for(config), "zeta": zeta, "ring_variance_over_V2": variance, "cutoff_convergence": convergence, "line_points": int(line.samples.size)}
