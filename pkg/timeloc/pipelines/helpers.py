import math
from typing import Any

import numpy as np

from timeloc.config import ExperimentConfig
from timeloc.models.disorder import DriveCoefficients, DriveSpec, default_cutoff, effective_coefficients, synthesize_drive
from timeloc.models.effmodel import EffectiveModelSpec, default_offset


def cutoff_for(config: ExperimentConfig) -> int:
    return config.cutoff if config.cutoff is not None else default_cutoff(config.k0)


def drive_for(config: ExperimentConfig, realization: int = 0) -> DriveCoefficients:
    return synthesize_drive(DriveSpec(config.k0, cutoff_for(config), config.seed, realization))


def effective_spec_for(config: ExperimentConfig, drive: DriveCoefficients, V: float | None = None) -> EffectiveModelSpec:
    return EffectiveModelSpec(
        effective_coefficients(drive), V=config.V if V is None else V, omega=config.omega, mu=config.mu,
        lam=config.lam, s=config.s, alpha=config.alpha, beta=default_offset(config.omega, config.alpha),
    )  # fmt: skip


def signed_difference(value: float, reference: float, period: float) -> float:
    """value - reference reduced into [-period/2, period/2)."""
    return float(np.mod(value - reference + period / 2, period) - period / 2)


def json_ready(values: dict[str, Any]) -> dict[str, Any]:
    """Plain floats/ints for the manifest summary; non-finite numbers become None."""
    ready: dict[str, Any] = {}
    for key, value in values.items():
        if isinstance(value, (np.floating, float)):
            ready[key] = float(value) if math.isfinite(value) else None
        elif isinstance(value, (np.integer, int)) and not isinstance(value, bool):
            ready[key] = int(value)
        else:
            ready[key] = value
    return ready
