import math
from typing import Any

import numpy as np
from joblib import Parallel, delayed

from timeloc.config import ExperimentConfig
from timeloc.context import RunContext
from timeloc.models.effmodel import PlaneWaveBasis, lab_frame_series, ring_density, solve
from timeloc.models.lattice import (
    LatticeSpec, band_structure, chain_from_spec, chain_tail_fits, diagonalize_chain, hopping, lattice_xi, mid_band_states,
)  # fmt: skip
from timeloc.models.localization import fit_tail
from timeloc.pipelines.helpers import cutoff_for, drive_for, effective_spec_for
from timeloc.utils import uniform_ring_grid

BAND_INDEX = {"lowest": 0, "first-excited": 1}


def _lattice_spec(config: ExperimentConfig, realization: int) -> LatticeSpec:
    return LatticeSpec(config.s, config.lam, config.V, config.k0, config.seed, config.band, realization)  # type: ignore[arg-type]


def _chain_realization(config: ExperimentConfig, J: float, realization: int) -> tuple[float, np.ndarray]:
    chain = chain_from_spec(_lattice_spec(config, realization), J)
    spectrum = diagonalize_chain(chain)
    fits = [fit.xi for fit in chain_tail_fits(spectrum, mid_band_states(spectrum, min(config.states, config.s))) if fit.accepted]
    return float(np.median(fits)) if fits else float("nan"), chain.onsite


def run_lattice_sweep(context: RunContext) -> dict[str, Any]:
    """Tight-binding chains over disorder realizations: median mid-band tail-fit length against 8 pi J^2 / (s V^2)."""
    config = context.config
    J = hopping(config.lam, config.s, config.band)  # type: ignore[arg-type]
    xi_formula = lattice_xi(J, config.s, config.V)
    context.log(f"J={J:.4f}, xi_formula={xi_formula:.4f}; {config.realizations} chain realizations")
    results = Parallel(n_jobs=context.threads)(delayed(_chain_realization)(config, J, index) for index in range(config.realizations))
    rows = [(index, config.band, J, xi_formula, median) for index, (median, _) in enumerate(results)]
    context.write_table("lattice.csv", ["realization", "band", "J", "xi_formula", "xi_fit_median"], rows, ["lengths in radians of Theta"])
    context.write_table("chain.csv", ["j", "epsilon"], enumerate(results[0][1]), ["on-site energies of realization 0"])
    medians = [median for median, _ in results if math.isfinite(median)]
    return {"J": J, "xi_formula": xi_formula, "xi_fit_median": float(np.median(medians)) if medians else float("nan"), "band": config.band}


def run_fig2(context: RunContext) -> dict[str, Any]:
    """Chain statistics, the exact band structure and a mid-band eigenstate of the full lattice + disorder effective model."""
    config = context.config
    summary = run_lattice_sweep(context)
    band = BAND_INDEX[config.band]
    reports = band_structure(config.lam, config.s, bands=2, mu=config.mu)
    context.write_table(
        "bands.csv", ["band", "lower", "upper", "width", "J_exact", "J_formula"],
        [(report.band, report.lower, report.upper, report.width, report.J_exact, report.J_formula) for report in reports],
    )  # fmt: skip

    spec = effective_spec_for(config, drive_for(config))
    halfwidth = config.n_halfwidth or math.ceil(4 * math.sqrt(2 * config.lam / config.mu)) + max(config.s, cutoff_for(config))
    context.log(f"Diagonalizing the full effective model on {2 * halfwidth + 1} plane waves")
    solution = solve(spec, PlaneWaveBasis.centered(halfwidth, spec.beta))
    band_energies = solution.shifted_energies[band * config.s : (band + 1) * config.s]
    state = band * config.s + int(np.argmin(np.abs(band_energies - np.mean(band_energies))))
    grid = uniform_ring_grid(config.grid_points)
    fit = fit_tail(ring_density(solution, state, grid), grid)

    times = np.linspace(0.0, 2 * math.pi / config.omega, 2 * config.grid_points, endpoint=False)
    series = lab_frame_series(solution, state, 0.0, times)
    context.write_table("lab_series.csv", ["omega_t_over_2pi", "density"], zip(times * config.omega / (2 * math.pi), series), [f"mid-band state {state}"])
    return summary | {"J_exact": reports[band].J_exact, "band_width": reports[band].width, "xi_effective_state": fit.xi, "effective_state_r_squared": fit.r_squared}
