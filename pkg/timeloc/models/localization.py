"""Localization lengths: Born closed form, transfer-matrix Lyapunov exponent and exponential tail fits.

Convention: xi is the decay length of the probability density, |psi|^2 ~ exp(-|x - x0| / xi). The transfer-matrix
amplitude grows at rate gamma_amp, so xi = 1 / (2 gamma_amp). Both closed forms (continuum Born and tight-binding)
are written in this convention.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import scipy.signal
from joblib import Parallel, delayed

from timeloc.errors import InvalidParameterError, ShortSampleWarning
from timeloc.models.disorder import LinePotential, correlation_length, synthesize_line_potential
from timeloc.serializable_abc import Serializable

DEFAULT_CADENCE = 64
DEFAULT_FLOOR = 1e-12
DEFAULT_R2_THRESHOLD = 0.9
RING_VISIBILITY_FRACTION = 0.1


@dataclass(frozen=True, eq=False)
class BornInput(Serializable):
    energy: float
    k0: float
    V: float


@dataclass(frozen=True, eq=False)
class BornResult(Serializable):
    xi: float
    zeta: float
    correlation_energy: float
    indicator: float
    regime: Literal["quantum", "semiclassical"]
    visible_on_ring: bool


@dataclass(frozen=True, eq=False)
class LyapunovEstimate(Serializable):
    gamma: float
    stderr: float
    xi: float
    amplitude_rate: float
    energy: float
    realizations: int
    L: float
    h: float


@dataclass(frozen=True, eq=False)
class TailFit(Serializable):
    xi: float
    center: float
    window: tuple[float, float]
    r_squared: float
    points: int
    accepted: bool


# ========================================================================================================


def correlation_energy(k0: float) -> float:
    """E_zeta = 1 / zeta^2 = k0^2 / 2."""
    return k0**2 / 2


def scattering_regime(energy: float, k0: float) -> Literal["quantum", "semiclassical"]:
    return "quantum" if energy < correlation_energy(k0) else "semiclassical"


def born_xi(born_input: BornInput) -> BornResult:
    energy, k0, V = born_input.energy, born_input.k0, born_input.V
    if energy <= 0:
        raise InvalidParameterError(f"The Born localization length needs a positive energy, got {energy}")
    if V == 0:
        raise InvalidParameterError("The Born localization length diverges without disorder (V = 0)")
    xi = k0 * energy / (math.sqrt(math.pi) * V**2) * math.exp(8 * energy / k0**2)
    e_zeta = correlation_energy(k0)
    return BornResult(
        xi, correlation_length(k0), e_zeta, V**2 / (energy * e_zeta), scattering_regime(energy, k0),
        xi < RING_VISIBILITY_FRACTION * 2 * math.pi,  # fmt: skip
    )


def born_xi_simplified(energy: float, k0: float, V: float) -> float:
    """Quantum-regime limit: xi / zeta = sqrt(2/pi) E_zeta E / V^2."""
    return math.sqrt(2 / math.pi) * correlation_energy(k0) * energy / V**2 * correlation_length(k0)


# ========================================================================================================


def _check_resolution(h: float, k0: float, energy: float) -> None:
    zeta = correlation_length(k0)
    if h > zeta / 10 * (1 + 1e-9):
        raise InvalidParameterError(f"h={h:g} resolves the correlation length {zeta:g} with fewer than 10 points")
    if energy != 0:
        wavelength = 2 * math.pi / math.sqrt(2 * abs(energy))
        if h > wavelength / 10 * (1 + 1e-9):
            raise InvalidParameterError(f"h={h:g} resolves the de Broglie wavelength {wavelength:g} with fewer than 10 points")


def log_growth(samples: np.ndarray, h: float, energy: float, cadence: int = DEFAULT_CADENCE) -> float:
    """ln of the norm of (psi_N, psi_{N-1}) for psi_{j+1} = 2 psi_j - psi_{j-1} + 2 h^2 (V_j - E) psi_j,
    starting from psi_0 = psi_{-1} = 1, rescaling the pair every `cadence` steps."""
    if cadence < 1:
        raise InvalidParameterError(f"The renormalization cadence must be positive, got {cadence}")
    coefficients = (2.0 + 2.0 * h * h * (np.asarray(samples, dtype=float) - energy)).tolist()
    psi_previous, psi = 1.0, 1.0
    log_norm = -0.5 * math.log(2.0)
    for start in range(0, len(coefficients), cadence):
        for coefficient in coefficients[start : start + cadence]:
            psi_previous, psi = psi, coefficient * psi - psi_previous
        norm = math.hypot(psi, psi_previous)
        log_norm += math.log(norm)
        psi, psi_previous = psi / norm, psi_previous / norm
    return log_norm


def _estimate(log_norms: Sequence[float], lengths: Sequence[float], energy: float, h: float) -> LyapunovEstimate:
    rates = np.array(log_norms) / np.array(lengths)
    amplitude_rate = float(np.mean(rates))
    stderr = float(2 * np.std(rates, ddof=1) / math.sqrt(rates.size)) if rates.size > 1 else float("nan")
    gamma = 2 * amplitude_rate
    xi = 1 / gamma if gamma > 0 else float("inf")
    return LyapunovEstimate(gamma, stderr, xi, amplitude_rate, energy, rates.size, float(np.mean(lengths)), h)


def _warn_if_short(L: float, k0: float, V: float, energy: float) -> None:
    if V == 0 or energy <= 0:
        return
    predicted = born_xi(BornInput(energy, k0, V)).xi
    if L < 50 * predicted:
        warnings.warn(f"Line length {L:g} is shorter than 50 predicted localization lengths ({50 * predicted:g})", ShortSampleWarning, stacklevel=3)


def lyapunov(potential: LinePotential | Sequence[LinePotential], energy: float, cadence: int = DEFAULT_CADENCE) -> LyapunovEstimate:
    """Transfer-matrix estimate averaged over the given realizations; stderr is the across-realization standard error."""
    potentials = [potential] if isinstance(potential, LinePotential) else list(potential)
    if not potentials:
        raise InvalidParameterError("At least one potential realization is needed")
    first = potentials[0]
    _check_resolution(first.h, first.k0, energy)
    _warn_if_short(first.L, first.k0, first.V, energy)
    log_norms = [log_growth(item.samples, item.h, energy, cadence) for item in potentials]
    return _estimate(log_norms, [item.L for item in potentials], energy, first.h)


def _realization_growth(k0: float, V: float, L: float, h: float, energy: float, seed: int, realization: int, cadence: int) -> tuple[float, float]:
    potential = synthesize_line_potential(k0, V, L, h, seed, realization)
    return log_growth(potential.samples, potential.h, energy, cadence), potential.L


def lyapunov_ensemble(k0: float, V: float, L: float, h: float, energy: float, realizations: int, seed: int,
                      threads: int = 1, cadence: int = DEFAULT_CADENCE) -> LyapunovEstimate:  # fmt: skip
    """Independent line realizations run in parallel, reduced in realization order."""
    if realizations < 1:
        raise InvalidParameterError(f"At least one realization is needed, got {realizations}")
    _check_resolution(h, k0, energy)
    _warn_if_short(L, k0, V, energy)
    results = Parallel(n_jobs=threads)(
        delayed(_realization_growth)(k0, V, L, h, energy, seed, index, cadence) for index in range(realizations)
    )
    return _estimate([growth for growth, _ in results], [length for _, length in results], energy, h)


# ========================================================================================================


def _offsets(grid: np.ndarray, peak: int, periodic: bool) -> np.ndarray:
    offsets = grid - grid[peak]
    if periodic:
        period = (grid[1] - grid[0]) * grid.size
        offsets = np.mod(offsets + period / 2, period) - period / 2
    return offsets


def _regress(distances: np.ndarray, logs: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(distances, logs, 1)
    predicted = slope * distances + intercept
    total = float(np.sum((logs - np.mean(logs)) ** 2))
    r_squared = 1 - float(np.sum((logs - predicted) ** 2)) / total if total > 0 else 0.0
    return float(slope), r_squared


def fit_tail(density: np.ndarray, grid: np.ndarray, floor: float = DEFAULT_FLOOR, periodic: bool = True,
             r2_threshold: float = DEFAULT_R2_THRESHOLD, peaks_only: bool = False) -> TailFit:  # fmt: skip
    """Pooled regression of log-density against distance from the peak on both flanks.
    Samples within max(xi/2, 3h) of the peak and within the last decade above `floor` are excluded.
    With `peaks_only` the regression runs over the local maxima of the density, the envelope of an oscillating state,
    so the nodes of a standing wave do not pull the slope down."""
    density = np.asarray(density, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise InvalidParameterError(f"A tail fit needs a grid of at least 3 points, got shape {grid.shape}")
    if density.shape != grid.shape:
        raise InvalidParameterError(f"Density shape {density.shape} does not match grid shape {grid.shape}")
    if np.any(density < 0):
        raise InvalidParameterError("Densities must be non-negative")
    peak = int(np.argmax(density))
    distances = np.abs(_offsets(grid, peak, periodic))
    spacing = float(abs(grid[1] - grid[0]))
    usable = density > 10 * floor
    if peaks_only:
        maxima = np.zeros(density.size, dtype=bool)
        maxima[scipy.signal.argrelmax(density, mode="wrap" if periodic else "clip")[0]] = True
        usable &= maxima
    exclusion = 3 * spacing
    xi, r_squared, selected = float("nan"), 0.0, np.zeros_like(usable)
    for _ in range(2):
        selected = usable & (distances > exclusion)
        if np.count_nonzero(selected) < 4:
            break
        slope, r_squared = _regress(distances[selected], np.log(density[selected]))
        if slope >= 0:
            xi, r_squared = float("inf"), 0.0
            break
        xi = -1 / slope
        exclusion = max(xi / 2, 3 * spacing)
    window = (float(np.min(distances[selected])), float(np.max(distances[selected]))) if np.any(selected) else (0.0, 0.0)
    return TailFit(xi, float(grid[peak]), window, r_squared, int(np.count_nonzero(selected)), bool(r_squared > r2_threshold and np.isfinite(xi)))
