import math
from typing import Any

import numpy as np
from joblib import Parallel, delayed

from timeloc.context import RunContext
from timeloc.models.classical import (
    ClassicalState, IntegratorConfig, RingSystem, Trajectory, fan_initial_conditions, heff_portrait, integrate, poincare,
    section_energy_spread,
)  # fmt: skip
from timeloc.pipelines.helpers import drive_for, effective_spec_for

PORTRAIT_POINTS = 96


def _integrate_chunk(states: list[ClassicalState], system: RingSystem, config: IntegratorConfig, duration: float, sample_every: int) -> Trajectory:
    return integrate(states, system, config, duration, sample_every)


def run_sos(context: RunContext) -> dict[str, Any]:
    """Stroboscopic sections of the exact dynamics from a fan of resonant initial conditions, with the effective portrait."""
    config = context.config
    drive = drive_for(config)
    system = RingSystem(drive, config.V, config.omega, config.alpha, config.lam, config.s)
    integrator = IntegratorConfig.for_system(system, config.steps_per_period)
    steps_per_period = round(system.period / integrator.dt)
    states = fan_initial_conditions(config.trajectories, config.V, config.omega, config.alpha, config.seed)
    context.log(f"Integrating {len(states)} trajectories over {config.periods} periods ({steps_per_period} steps each)")

    size = math.ceil(len(states) / max(1, min(context.threads, len(states))))
    chunks = [states[start : start + size] for start in range(0, len(states), size)]
    duration = config.periods * system.period
    trajectories = Parallel(n_jobs=context.threads)(delayed(_integrate_chunk)(chunk, system, integrator, duration, steps_per_period) for chunk in chunks)
    merged = Trajectory(trajectories[0].times, np.hstack([item.theta for item in trajectories]), np.hstack([item.p for item in trajectories]))
    initial = np.array([[state.theta, state.p - config.alpha - config.omega] for state in states])
    section = poincare(merged, config.omega, config.alpha, initial)

    rows = [
        (trajectory, int(period), section.theta[row, trajectory], section.momentum[row, trajectory])
        for trajectory in range(section.theta.shape[1]) for row, period in enumerate(section.periods)
    ]  # fmt: skip
    context.write_table("section.csv", ["trajectory", "period", "Theta", "P"], rows, ["initial conditions: evenly spaced P fan with uniform Theta"])

    spec = effective_spec_for(config, drive)
    theta_grid = np.linspace(-math.pi, math.pi, PORTRAIT_POINTS, endpoint=False)
    momentum_limit = 1.5 * max(float(np.max(np.abs(section.momentum))), math.sqrt(2 * abs(config.V)))
    momentum_grid = np.linspace(-momentum_limit, momentum_limit, PORTRAIT_POINTS)
    energies = heff_portrait(spec, theta_grid, momentum_grid) - config.omega**2 / 2
    portrait_rows = [(theta, momentum, energies[i, j]) for i, momentum in enumerate(momentum_grid) for j, theta in enumerate(theta_grid)]
    context.write_table("portrait.csv", ["Theta", "P", "H_eff_shifted"], portrait_rows, ["effective energy minus omega^2/2 on a (P, Theta) mesh"])

    spreads, mean_spread = section_energy_spread(section, spec)
    return {"steps_per_period": steps_per_period, "mean_energy_spread": mean_spread, "max_energy_spread": float(np.max(spreads)), "spread_over_V": mean_spread / config.V if config.V else float("nan")}
