import math
from typing import Any

import numpy as np
from joblib import Parallel, delayed

from timeloc.config import ExperimentConfig
from timeloc.context import RunContext
from timeloc.models.effmodel import (
    EigenSolution, PlaneWaveBasis, basis_for, converged_spectrum, lab_frame_series, nearest_state, ring_density, solve, write_spectrum,
    write_state_coefficients,
)  # fmt: skip
from timeloc.models.localization import BornInput, born_xi, fit_tail
from timeloc.pipelines.helpers import cutoff_for, drive_for, effective_spec_for
from timeloc.utils import uniform_ring_grid

FitRow = tuple[int, int, float, float, float, float, bool]


def shell_for(config: ExperimentConfig) -> tuple[float, float]:
    width = config.shell if config.shell is not None else max(1.0, 0.05 * abs(config.energy))
    return config.energy - width, config.energy + width


def _born_at(energy: float, config: ExperimentConfig) -> float:
    if energy <= 0 or config.V == 0:
        return float("nan")
    return born_xi(BornInput(energy, config.k0, config.V)).xi


def shell_fits(solution: EigenSolution, config: ExperimentConfig, realization: int, grid: np.ndarray) -> list[FitRow]:
    """Envelope tail fits of the (at most `states`) shell eigenstates nearest the target energy, with Born at each state's energy."""
    lower, upper = shell_for(config)
    inside = np.flatnonzero((solution.shifted_energies >= lower) & (solution.shifted_energies <= upper))
    nearest = inside[np.argsort(np.abs(solution.shifted_energies[inside] - config.energy), kind="stable")[: config.states]]
    rows = []
    for index in sorted(int(index) for index in nearest):
        energy = float(solution.shifted_energies[index])
        fit = fit_tail(ring_density(solution, index, grid), grid, peaks_only=True)
        rows.append((realization, index, energy, fit.xi, _born_at(energy, config), fit.r_squared, fit.accepted))
    return rows


def _realization_fits(config: ExperimentConfig, basis: PlaneWaveBasis, realization: int, grid: np.ndarray) -> list[FitRow]:
    solution = solve(effective_spec_for(config, drive_for(config, realization)), basis)
    return shell_fits(solution, config, realization, grid)


def run_eff_spectrum(context: RunContext) -> dict[str, Any]:
    """Effective spectrum of the first realization, envelope tail fits of the shell states pooled over realizations, and the
    lab-frame density of the state closest to the target energy."""
    config = context.config
    spec = effective_spec_for(config, drive_for(config))
    basis = basis_for(spec, config.n_halfwidth or cutoff_for(config) + math.ceil(math.sqrt(2 * abs(config.energy) / config.mu)))
    context.log(f"Diagonalizing the effective model on {basis.size} plane waves for {config.realizations} realizations")

    solution, change = converged_spectrum(spec, basis, shell_for(config))
    target = nearest_state(solution, config.energy)
    context.register(write_spectrum(context.output_path("spectrum.csv"), solution, context.provenance()))

    grid = uniform_ring_grid(config.grid_points)
    rows = shell_fits(solution, config, 0, grid)
    others = Parallel(n_jobs=context.threads)(delayed(_realization_fits)(config, basis, realization, grid) for realization in range(1, config.realizations))
    rows += [row for chunk in others for row in chunk]
    context.write_table(
        "tail_fits.csv", ["realization", "index", "E_shifted", "xi_fit", "xi_born", "r_squared", "accepted"], rows,
        ["xi in radians of Theta (density decay length), fitted on the local maxima of the density", f"shell {shell_for(config)}"],
    )  # fmt: skip

    times = np.linspace(0.0, 2 * (2 * math.pi / config.omega), 2 * config.grid_points, endpoint=False)
    series = lab_frame_series(solution, target, 0.0, times)
    context.write_table("lab_series.csv", ["omega_t_over_2pi", "density"], zip(times * config.omega / (2 * math.pi), series), [f"state {target}, theta_fixed=0"])
    context.register(write_state_coefficients(context.output_path("state_coefficients.csv"), solution, target))

    accepted = [row for row in rows if row[6]]
    ratios = [row[3] / row[4] for row in accepted if math.isfinite(row[4])]
    born = born_xi(BornInput(config.energy, config.k0, config.V)) if config.energy > 0 and config.V != 0 else None
    return {
        "basis_size": basis.size, "convergence_change": change, "target_state": target,
        "target_E_shifted": solution.shifted_energies[target], "shell_states": len(rows), "accepted_fits": len(accepted),
        "xi_fit_median": float(np.median([row[3] for row in accepted])) if accepted else float("nan"),
        "xi_ratio_median": float(np.median(ratios)) if ratios else float("nan"), "xi_born": born.xi if born else float("nan"),
        "weak_scattering_indicator": born.indicator if born else float("nan"),
    }  # fmt: skip
