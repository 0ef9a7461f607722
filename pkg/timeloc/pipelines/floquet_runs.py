from typing import Any

import numpy as np
from joblib import Parallel, delayed

from timeloc.config import ExperimentConfig
from timeloc.context import RunContext
from timeloc.models.disorder import DriveCoefficients
from timeloc.models.effmodel import second_order_coefficients
from timeloc.models.floquet import (
    FloquetBasisWindow, compare_levels, default_window, effective_model_for, eigenstate_density_pair, level_residual,
    second_order_check, window_convergence,
)  # fmt: skip
from timeloc.pipelines.helpers import cutoff_for, drive_for, signed_difference
from timeloc.utils import uniform_ring_grid


def window_for(config: ExperimentConfig) -> FloquetBasisWindow:
    window = default_window(config.k0, cutoff_for(config), config.omega, config.alpha)
    return FloquetBasisWindow(window.n_center, config.n_halfwidth or window.n_halfwidth, config.m_halfwidth or window.m_halfwidth)


def _level_rows(drive: DriveCoefficients, config: ExperimentConfig, window: FloquetBasisWindow, V: float) -> list[tuple[float, int, float, float, float]]:
    report, _, effective = compare_levels(drive, V, config.omega, config.alpha, window, config.levels, config.lam, config.s)
    rows = []
    for pair in report.pairs:
        shifted = float(effective.shifted_energies[pair.effective_index])
        rows.append((V, pair.effective_index, shifted, shifted + signed_difference(pair.quasienergy, pair.effective, config.omega), pair.residual))
    return rows


def run_levels(context: RunContext) -> dict[str, Any]:
    """Lowest effective levels against folded quasienergies for each disorder strength in V_values."""
    config = context.config
    drive, window = drive_for(config), window_for(config)
    context.log(f"Floquet matrices of dimension {window.dimension} for V in {config.V_values}")
    results = Parallel(n_jobs=context.threads)(delayed(_level_rows)(drive, config, window, V) for V in config.V_values)
    rows = [row for rows in results for row in rows]
    context.write_table("levels.csv", ["V", "level", "E_eff", "E_F", "residual"], rows, ["E_eff and E_F are measured from omega^2/2; E_F is the paired quasienergy unfolded next to E_eff"])  # fmt: skip
    residuals = [row[4] for row in rows if row[0] == max(config.V_values)] if rows else []
    return {"dimension": window.dimension, "max_residual_at_largest_V": max(residuals) if residuals else 0.0}


def run_eigenstate_compare(context: RunContext) -> dict[str, Any]:
    """Level and eigenstate comparison at one frequency, the second-order check and the window convergence."""
    config = context.config
    drive, window = drive_for(config), window_for(config)
    context.log(f"Comparing {config.levels} levels on a Floquet window of dimension {window.dimension}")
    report, spectrum, effective = compare_levels(drive, config.V, config.omega, config.alpha, window, config.levels, config.lam, config.s)
    context.write_table(
        "comparison.csv", ["level", "E_eff", "E_F", "residual", "overlap"],
        [(pair.effective_index, pair.effective, pair.quasienergy, pair.residual, pair.overlap) for pair in report.pairs],
        [f"energies folded into [{spectrum.e_ref!r}, {spectrum.e_ref + config.omega!r})"],
    )  # fmt: skip

    correction = second_order_coefficients(drive, config.V, config.omega)
    corrected = effective_model_for(drive, config.V, config.omega, config.alpha, window, config.lam, config.s, correction)
    check = second_order_check(effective, corrected, spectrum, config.levels, config.alpha, config.V)

    pair = report.pairs[-1]
    grid = uniform_ring_grid(config.grid_points)
    effective_density, floquet_density = eigenstate_density_pair(spectrum, effective, pair, grid)
    context.write_table("density_effective.csv", ["Theta", "density"], zip(grid, effective_density), [f"effective level {pair.effective_index} at t=0"])
    context.write_table("density_floquet.csv", ["Theta", "density"], zip(grid, floquet_density), [f"paired Floquet state {pair.floquet_index} at t=0"])

    convergence = window_convergence(drive, config.V, config.omega, config.alpha, window, config.levels, config.lam, config.s, baseline=report)
    max_residual, median_residual = level_residual(report)
    return {
        "dimension": window.dimension, "max_residual": max_residual, "median_residual": median_residual,
        "min_overlap": float(np.min(report.overlaps)), "ambiguous_pairing": report.ambiguous,
        "median_residual_with_second_order": check.median_with, "second_order_improves": check.improved,
        "window_convergence_over_omega": convergence,
    }  # fmt: skip
