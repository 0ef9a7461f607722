"""Exact Floquet Hamiltonian in a joint (spatial harmonic, temporal harmonic) basis and its comparison with the effective model.

Basis states |n, m> carry lab momentum n and time harmonic e^{i m omega t}; the index of |n, m> is
(n - n_min) * (number of m values) + (m - m_min). Near the resonance n_res = round(omega + alpha) the states
|n_res + j, -j> form the quasienergy zone that maps onto effective plane wave l = j + round(delta - beta),
delta = n_res - alpha - omega, with quasienergy E_eff + omega * delta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from timeloc.errors import EigensolverError, InvalidParameterError, PairingAmbiguityWarning
from timeloc.models.disorder import DriveCoefficients, effective_coefficients, fourier_series_on_grid, sawtooth_coefficients
from timeloc.models.effmodel import EigenSolution, EffectiveModelSpec, PlaneWaveBasis, coupling_matrix, default_offset, ring_density, solve
from timeloc.serializable_abc import Serializable

ZONE_WEIGHT_THRESHOLD = 0.5
AMBIGUITY_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class FloquetBasisWindow(Serializable):
    n_center: int
    n_halfwidth: int
    m_halfwidth: int

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.n_center - self.n_halfwidth, self.n_center + self.n_halfwidth + 1)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.m_halfwidth, self.m_halfwidth + 1)

    @property
    def dimension(self) -> int:
        return (2 * self.n_halfwidth + 1) * (2 * self.m_halfwidth + 1)

    def scaled(self, factor: float) -> FloquetBasisWindow:
        return FloquetBasisWindow(self.n_center, math.ceil(self.n_halfwidth * factor), math.ceil(self.m_halfwidth * factor))

    def zone_mask(self) -> np.ndarray:
        """True on the states |n, m> with n - n_center + m = 0, flattened in basis order."""
        return np.add.outer(self.n_values - self.n_center, self.m_values).reshape(-1) == 0


@dataclass(frozen=True, eq=False)
class QuasienergySpectrum(Serializable):
    raw: np.ndarray
    folded: np.ndarray
    vectors: np.ndarray = field(repr=False)
    omega: float
    e_ref: float
    window: FloquetBasisWindow

    def zone_weights(self) -> np.ndarray:
        return np.sum(np.abs(self.vectors[self.window.zone_mask()]) ** 2, axis=0)

    def lab_coefficients(self, index: int) -> np.ndarray:
        """Lab-momentum amplitudes b_n = sum_m a_{n,m} of the state at t = 0, normalized."""
        table = self.vectors[:, index].reshape(self.window.n_values.size, self.window.m_values.size)
        coefficients = table.sum(axis=1)
        return coefficients / np.linalg.norm(coefficients)


@dataclass(frozen=True, eq=False)
class LevelPair(Serializable):
    effective_index: int
    floquet_index: int
    effective: float
    quasienergy: float
    residual: float
    overlap: float
    ambiguous: bool = False


@dataclass(frozen=True, eq=False)
class ComparisonReport(Serializable):
    pairs: list[LevelPair]
    omega: float
    V: float
    k0: float

    @property
    def residuals(self) -> np.ndarray:
        return np.array([pair.residual for pair in self.pairs])

    @property
    def overlaps(self) -> np.ndarray:
        return np.array([pair.overlap for pair in self.pairs])

    @property
    def ambiguous(self) -> bool:
        return any(pair.ambiguous for pair in self.pairs)


@dataclass(frozen=True, eq=False)
class SecondOrderCheck(Serializable):
    median_without: float
    median_with: float
    max_without: float
    max_with: float
    omega: float
    V: float

    @property
    def improved(self) -> bool:
        return self.median_with <= self.median_without


# ========================================================================================================


def resonance(omega: float, alpha: float) -> tuple[int, float]:
    """(n_res, delta) with n_res = round(omega + alpha) and delta = n_res - alpha - omega."""
    n_res = round(omega + alpha)
    return n_res, n_res - alpha - omega


def default_window(k0: float, cutoff: int, omega: float, alpha: float) -> FloquetBasisWindow:
    halfwidth = max(math.ceil(2 * k0), math.ceil(cutoff / 2))
    return FloquetBasisWindow(resonance(omega, alpha)[0], halfwidth, halfwidth)


def effective_shift(omega: float, alpha: float, beta: float) -> int:
    _, delta = resonance(omega, alpha)
    return round(delta - beta)


def effective_basis(window: FloquetBasisWindow, omega: float, alpha: float, beta: float | None = None) -> PlaneWaveBasis:
    """Effective plane waves matching the window's resonant zone one to one."""
    beta = default_offset(omega, alpha) if beta is None else beta
    shift = effective_shift(omega, alpha, beta)
    return PlaneWaveBasis(-window.n_halfwidth + shift, window.n_halfwidth + shift, beta)


def fold(values: np.ndarray | float, omega: float, e_ref: float) -> np.ndarray:
    """Maps energies into [e_ref, e_ref + omega)."""
    return e_ref + np.mod(np.asarray(values, dtype=float) - e_ref, omega)


def circular_distance(first: np.ndarray | float, second: np.ndarray | float, omega: float) -> np.ndarray:
    difference = np.mod(np.asarray(first, dtype=float) - np.asarray(second, dtype=float), omega)
    return np.minimum(difference, omega - difference)


# ========================================================================================================


def build_floquet(drive: DriveCoefficients | None, V: float, lam: float, s: int, omega: float, alpha: float,
                  window: FloquetBasisWindow) -> np.ndarray:  # fmt: skip
    """H_F = (n - alpha)^2/2 + m omega on the diagonal, V g_{n-n'} f_{m-m'} and the four (lambda/4) lattice
    couplings at (n - n', m - m') = (+-s, +-s). The sawtooth is truncated at the drive cutoff, like the classical force."""
    cutoff = drive.cutoff if drive is not None and V != 0 else 0
    if 2 * window.n_halfwidth < cutoff or 2 * window.m_halfwidth < cutoff:
        raise InvalidParameterError(f"Window ({window.n_halfwidth}, {window.m_halfwidth}) clips the drive cutoff {cutoff}")
    n_values, m_values = window.n_values, window.m_values
    n_size, m_size = n_values.size, m_values.size
    matrix = np.zeros((window.dimension, window.dimension), dtype=complex)
    if cutoff:
        sawtooth = coupling_matrix(sawtooth_coefficients(np.arange(-cutoff, cutoff + 1)), n_size)
        matrix += V * np.kron(sawtooth, coupling_matrix(drive.values, m_size))  # type: ignore[union-attr]
    if lam != 0:
        matrix += lam / 4 * np.kron(_shift_pair(s, n_size), _shift_pair(s, m_size))
    diagonal = np.add.outer((n_values - alpha) ** 2 / 2, m_values * omega).reshape(-1)
    matrix[np.diag_indices(window.dimension)] += diagonal
    return matrix


def _shift_pair(s: int, size: int) -> np.ndarray:
    return np.eye(size, k=s) + np.eye(size, k=-s)


def quasienergies(matrix: np.ndarray, omega: float, e_ref: float, window: FloquetBasisWindow) -> QuasienergySpectrum:
    try:
        raw, vectors = scipy.linalg.eigh(matrix)
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"The Floquet eigensolver did not converge: {exc}") from exc
    return QuasienergySpectrum(raw, fold(raw, omega, e_ref), vectors, omega, e_ref, window)


# ========================================================================================================


def effective_lab_coefficients(effective: EigenSolution, index: int, window: FloquetBasisWindow, alpha: float) -> np.ndarray:
    """Effective state expressed over the window's lab momenta at t = 0: b_{n_res + j} = v_{j + shift}."""
    shift = effective_shift(effective.omega, alpha, effective.basis.beta)
    positions = window.n_values - window.n_center + shift - effective.basis.n_min
    inside = (positions >= 0) & (positions < effective.basis.size)
    coefficients = np.zeros(window.n_values.size, dtype=complex)
    coefficients[inside] = effective.vectors[positions[inside], index]
    return coefficients


def compare_with_effective(spectrum: QuasienergySpectrum, effective: EigenSolution, count: int, alpha: float,
                           V: float = 0.0, k0: float = 0.0) -> ComparisonReport:  # fmt: skip
    """Greedy pairing of the lowest `count` effective levels with the nearest unclaimed zone-0 quasienergy (circular
    distance modulo omega); overlaps |<psi_F(t=0)|psi_eff>| use the lab-frame mapping of the effective state."""
    omega = spectrum.omega
    _, delta = resonance(omega, alpha)
    candidates = np.flatnonzero(spectrum.zone_weights() >= ZONE_WEIGHT_THRESHOLD)
    claimed: set[int] = set()
    pairs = []
    for index in range(min(count, effective.energies.size)):
        target = float(fold(effective.energies[index] + omega * delta, omega, spectrum.e_ref))
        free = np.array([candidate for candidate in candidates if candidate not in claimed], dtype=int)
        if free.size == 0:
            raise InvalidParameterError(f"No unclaimed resonant quasienergy left for effective level {index}")
        distances = circular_distance(spectrum.folded[free], target, omega)
        order = np.argsort(distances, kind="stable")
        chosen = int(free[order[0]])
        ambiguous = bool(order.size > 1 and distances[order[1]] < AMBIGUITY_FRACTION * omega)
        if ambiguous:
            warnings.warn(f"Effective level {index} has two quasienergy candidates within {AMBIGUITY_FRACTION:g} omega of its target", PairingAmbiguityWarning, stacklevel=2)
        claimed.add(chosen)
        overlap = abs(np.vdot(spectrum.lab_coefficients(chosen), effective_lab_coefficients(effective, index, spectrum.window, alpha)))
        pairs.append(LevelPair(index, chosen, target, float(spectrum.folded[chosen]), float(distances[order[0]]), float(overlap), ambiguous))
    return ComparisonReport(pairs, omega, V, k0)


def level_residual(report: ComparisonReport) -> tuple[float, float]:
    """(max, median) residual of a comparison."""
    residuals = report.residuals
    if residuals.size == 0:
        return 0.0, 0.0
    return float(np.max(residuals)), float(np.median(residuals))


def effective_model_for(drive: DriveCoefficients | None, V: float, omega: float, alpha: float, window: FloquetBasisWindow,
                        lam: float = 0.0, s: int = 1, extra_potential: np.ndarray | None = None) -> EigenSolution:  # fmt: skip
    """Effective spectrum on the plane waves matching the window's resonant zone."""
    basis = effective_basis(window, omega, alpha)
    c = effective_coefficients(drive) if drive is not None else None
    spec = EffectiveModelSpec(c, V=V if drive is not None else 0.0, omega=omega, lam=lam, s=s, alpha=alpha, beta=basis.beta)
    return solve(spec, basis, extra_potential)


def compare_levels(drive: DriveCoefficients | None, V: float, omega: float, alpha: float, window: FloquetBasisWindow, count: int,
                   lam: float = 0.0, s: int = 1) -> tuple[ComparisonReport, QuasienergySpectrum, EigenSolution]:  # fmt: skip
    """Builds both models on matching bases and compares the lowest `count` levels."""
    effective = effective_model_for(drive, V, omega, alpha, window, lam, s)
    _, delta = resonance(omega, alpha)
    e_ref = float(effective.energies[0] + omega * delta - omega / 2)
    spectrum = quasienergies(build_floquet(drive, V, lam, s, omega, alpha, window), omega, e_ref, window)
    return compare_with_effective(spectrum, effective, count, alpha, V, drive.k0 if drive is not None else 0.0), spectrum, effective


def window_convergence(drive: DriveCoefficients | None, V: float, omega: float, alpha: float, window: FloquetBasisWindow, count: int,
                       lam: float = 0.0, s: int = 1, factor: float = 1.5, baseline: ComparisonReport | None = None) -> float:  # fmt: skip
    """Largest circular shift of the paired quasienergies when the window grows by `factor`, in units of omega."""
    report = baseline or compare_levels(drive, V, omega, alpha, window, count, lam, s)[0]
    wider, _, _ = compare_levels(drive, V, omega, alpha, window.scaled(factor), count, lam, s)
    shifts = circular_distance([pair.quasienergy for pair in report.pairs], [pair.quasienergy for pair in wider.pairs], omega)
    return float(np.max(shifts)) / omega if shifts.size else 0.0


def second_order_check(plain: EigenSolution, corrected: EigenSolution, spectrum: QuasienergySpectrum, count: int, alpha: float,
                       V: float = 0.0) -> SecondOrderCheck:  # fmt: skip
    """Residual statistics of the effective levels against the quasienergies without and with the second-order term."""
    max_without, median_without = level_residual(compare_with_effective(spectrum, plain, count, alpha, V))
    max_with, median_with = level_residual(compare_with_effective(spectrum, corrected, count, alpha, V))
    return SecondOrderCheck(median_without, median_with, max_without, max_with, spectrum.omega, V)


# ========================================================================================================


def eigenstate_density_pair(spectrum: QuasienergySpectrum, effective: EigenSolution, pair: LevelPair, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lab-frame densities at t = 0 of the paired effective and Floquet states, per radian."""
    floquet_amplitudes = fourier_series_on_grid(spectrum.lab_coefficients(pair.floquet_index), spectrum.window.n_values.astype(float), grid)
    return ring_density(effective, pair.effective_index, grid), np.abs(floquet_amplitudes) ** 2 / (2 * math.pi)
