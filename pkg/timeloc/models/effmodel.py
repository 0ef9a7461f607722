"""Rotating-frame (secular) effective Hamiltonians in a plane-wave basis, their spectra and the second-order correction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy.signal import fftconvolve

from timeloc.errors import EigensolverError, InvalidParameterError, InvariantViolation
from timeloc.models.disorder import DriveCoefficients, EffectiveDisorderCoefficients, fourier_series_on_grid, sawtooth_coefficients
from timeloc.serializable_abc import Serializable
from timeloc.utils import write_csv

NORMALIZATION_TOLERANCE = 1e-10
RESIDUAL_TOLERANCE = 1e-8


def default_offset(omega: float, alpha: float) -> float:
    """beta = -frac(alpha + omega) mod 1: rotating-frame momenta are n + beta with n integer."""
    # rounded first so omega = N - alpha gives exactly 0 rather than 1 - 1e-13
    return float(round((-(alpha + omega)) % 1.0, 12) % 1.0)


@dataclass(frozen=True, eq=False)
class EffectiveModelSpec(Serializable):
    c: EffectiveDisorderCoefficients | None
    V: float = 0.0
    omega: float = 0.0
    mu: float = 1.0
    lam: float = 0.0
    s: int = 1
    alpha: float = 0.0
    beta: float = 0.0

    def validate(self) -> None:
        if self.mu <= 0:
            raise InvalidParameterError(f"The kinetic coefficient mu must be positive, got {self.mu}")
        if self.lam != 0 and self.s < 1:
            raise InvalidParameterError(f"The lattice harmonic s must be a positive integer, got {self.s}")
        if not 0 <= self.beta < 1:
            raise InvalidParameterError(f"The momentum offset beta must lie in [0, 1), got {self.beta}")
        if self.V != 0 and self.c is None:
            raise InvalidParameterError("A nonzero disorder strength needs disorder coefficients")

    @property
    def cutoff(self) -> int:
        return self.c.cutoff if self.c is not None and self.V != 0 else 0


@dataclass(frozen=True, eq=False)
class PlaneWaveBasis(Serializable):
    n_min: int
    n_max: int
    beta: float = 0.0

    @classmethod
    def centered(cls, n_halfwidth: int, beta: float = 0.0) -> PlaneWaveBasis:
        return cls(-n_halfwidth, n_halfwidth, beta)

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def scaled(self, factor: float) -> PlaneWaveBasis:
        center = (self.n_min + self.n_max) // 2
        halfwidth = math.ceil((self.n_max - self.n_min) * factor / 2)
        return PlaneWaveBasis(center - halfwidth, center + halfwidth, self.beta)


@dataclass(frozen=True, eq=False)
class EigenSolution(Serializable):
    energies: np.ndarray
    shifted_energies: np.ndarray
    vectors: np.ndarray = field(repr=False)
    basis: PlaneWaveBasis
    omega: float = 0.0


@dataclass(frozen=True, eq=False)
class SecondOrderCorrection(Serializable):
    samples: np.ndarray
    grid: np.ndarray
    coefficients: np.ndarray  # h_q for q in [-Q, Q], index q + Q
    omega: float
    V: float

    @property
    def harmonics(self) -> np.ndarray:
        half = (self.coefficients.size - 1) // 2
        return np.arange(-half, half + 1)


def basis_for(spec: EffectiveModelSpec, n_halfwidth: int | None = None) -> PlaneWaveBasis:
    """Centered basis at least twice as wide as the disorder cutoff (8 k0 for the default K = 4 k0)."""
    minimum = max(spec.cutoff, 2 * spec.s if spec.lam else 0, 8)
    return PlaneWaveBasis.centered(max(n_halfwidth or 0, minimum), spec.beta)


# ========================================================================================================


def _coupling_row(values: np.ndarray, size: int) -> np.ndarray:
    """First column of a Toeplitz matrix whose (n, n') entry is values[n - n'], values given for n - n' in [-Q, Q]."""
    half = (values.size - 1) // 2
    column = np.zeros(size, dtype=complex)
    span = min(half, size - 1)
    column[: span + 1] = values[half : half + span + 1]
    return column


def coupling_matrix(values: np.ndarray, size: int) -> np.ndarray:
    """Hermitian Toeplitz matrix with entries values[n - n'], for coefficients obeying v_{-q} = conj(v_q)."""
    column = _coupling_row(np.asarray(values, dtype=complex), size)
    return scipy.linalg.toeplitz(column, np.conj(column))


def build_matrix(spec: EffectiveModelSpec, basis: PlaneWaveBasis, extra_potential: np.ndarray | None = None) -> np.ndarray:
    """Hermitian matrix of mu P^2/2 + (lam/2) cos(s Theta) + V sum c_k e^{ik Theta} + omega^2/2 (+ an optional extra
    potential given by its Fourier coefficients, centered on index 0)."""
    spec.validate()
    if basis.n_max - basis.n_min < spec.cutoff:
        raise InvalidParameterError(f"Basis span {basis.n_max - basis.n_min} is narrower than the disorder cutoff {spec.cutoff}")
    size = basis.size
    column = np.zeros(size, dtype=complex)
    if spec.V != 0 and spec.c is not None:
        column += spec.V * _coupling_row(spec.c.values, size)
    if extra_potential is not None:
        column += _coupling_row(np.asarray(extra_potential, dtype=complex), size)
    if spec.lam != 0 and spec.s < size:
        column[spec.s] += spec.lam / 4
    constant = float(column[0].real)  # only an extra potential carries a q = 0 term
    column[0] = 0.0
    matrix = scipy.linalg.toeplitz(column, np.conj(column))
    momenta = basis.harmonics + basis.beta
    matrix[np.diag_indices(size)] = spec.mu * momenta**2 / 2 + spec.omega**2 / 2 + constant
    return matrix


def diagonalize(matrix: np.ndarray, basis: PlaneWaveBasis, omega: float = 0.0) -> EigenSolution:
    try:
        energies, vectors = scipy.linalg.eigh(matrix)
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"The Hermitian eigensolver did not converge: {exc}") from exc
    vectors = _fix_phases(vectors)
    norms = np.linalg.norm(vectors, axis=0)
    if np.max(np.abs(norms - 1)) > NORMALIZATION_TOLERANCE:
        raise InvariantViolation("eigenvector-normalization", f"max deviation {np.max(np.abs(norms - 1)):.3e}")
    scale = max(float(np.max(np.abs(energies))), 1.0)
    residuals = np.linalg.norm(matrix @ vectors - vectors * energies, axis=0)
    if np.max(residuals) > RESIDUAL_TOLERANCE * scale:
        raise InvariantViolation("eigenpair-residual", f"max residual {np.max(residuals):.3e} for |H| ~ {scale:.3e}")
    return EigenSolution(energies, energies - omega**2 / 2, vectors, basis, omega)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotates every eigenvector so its largest component is real and positive (deterministic CSV dumps)."""
    pivots = np.argmax(np.abs(vectors), axis=0)
    phases = vectors[pivots, np.arange(vectors.shape[1])]
    return vectors * (np.abs(phases) / phases)


def solve(spec: EffectiveModelSpec, basis: PlaneWaveBasis | None = None, extra_potential: np.ndarray | None = None) -> EigenSolution:
    basis = basis or basis_for(spec)
    return diagonalize(build_matrix(spec, basis, extra_potential), basis, spec.omega)


def converged_spectrum(spec: EffectiveModelSpec, basis: PlaneWaveBasis, shell: tuple[float, float]) -> tuple[EigenSolution, float]:
    """Solves in `basis` and in a 1.5x wider basis; returns the solution and the largest relative eigenvalue change
    among states whose shifted energy lies inside `shell`."""
    solution = solve(spec, basis)
    wider = solve(spec, basis.scaled(1.5))
    inside = np.flatnonzero((solution.shifted_energies >= shell[0]) & (solution.shifted_energies <= shell[1]))
    if inside.size == 0:
        return solution, 0.0
    reference = wider.energies[inside]
    change = np.abs(solution.energies[inside] - reference) / np.maximum(np.abs(reference), 1e-300)
    return solution, float(np.max(change))


def states_in_shell(solution: EigenSolution, lower: float, upper: float) -> np.ndarray:
    return np.flatnonzero((solution.shifted_energies >= lower) & (solution.shifted_energies <= upper))


def nearest_state(solution: EigenSolution, target_shifted_energy: float) -> int:
    return int(np.argmin(np.abs(solution.shifted_energies - target_shifted_energy)))


# ========================================================================================================


def ring_density(solution: EigenSolution, index: int, grid: np.ndarray) -> np.ndarray:
    """|psi(Theta)|^2 per radian, with psi = (2 pi)^(-1/2) sum_n a_n e^{i(n + beta) Theta}."""
    amplitudes = fourier_series_on_grid(solution.vectors[:, index], solution.basis.harmonics.astype(float), grid)
    return np.abs(amplitudes) ** 2 / (2 * math.pi)


def lab_frame_series(solution: EigenSolution, index: int, theta_fixed: float, times: np.ndarray) -> np.ndarray:
    """Density at a fixed laboratory angle versus time, Theta = theta_fixed - omega t."""
    return ring_density(solution, index, theta_fixed - solution.omega * np.asarray(times, dtype=float))


# ========================================================================================================


def _weighted_sawtooth(cutoff: int) -> np.ndarray:
    harmonics = np.arange(-cutoff, cutoff + 1)
    return harmonics * sawtooth_coefficients(harmonics)


def _rotating_harmonic(drive: DriveCoefficients, weighted: np.ndarray, m: int) -> np.ndarray:
    """Coefficients of A_m(Theta) = sum_{|n| <= K} n g_n f_{m-n} e^{in Theta}, index n + K."""
    cutoff = drive.cutoff
    drive_index = m - np.arange(-cutoff, cutoff + 1) + cutoff
    valid = (drive_index >= 0) & (drive_index <= 2 * cutoff)
    return np.where(valid, weighted * drive.values[np.clip(drive_index, 0, 2 * cutoff)], 0j)


def second_order_coefficients(drive: DriveCoefficients, V: float, omega: float) -> np.ndarray:
    """Fourier coefficients h_q (q in [-2K, 2K]) of H2 = -(V^2 / 2 omega^2) sum_{m != 0} A_m A_{-m} / m^2.

    This is sum_{m != 0} [[V_{-m}, H0], V_m] / (2 m^2 omega^2) for the non-secular harmonics V_m of the rotating-frame
    potential, with dV_m/dTheta = i V A_m. Since A_{-m} = -conj(A_m) it equals (V^2 / 2 omega^2) sum |A_m|^2 / m^2 >= 0."""
    cutoff = drive.cutoff
    weighted = _weighted_sawtooth(cutoff)
    total = np.zeros(4 * cutoff + 1, dtype=complex)
    for m in range(1, 2 * cutoff + 1):
        product = fftconvolve(_rotating_harmonic(drive, weighted, m), _rotating_harmonic(drive, weighted, -m))
        total += 2 * product / m**2
    return -(V**2) / (2 * omega**2) * total


def second_order_correction(drive: DriveCoefficients, V: float, omega: float, grid: np.ndarray) -> SecondOrderCorrection:
    coefficients = second_order_coefficients(drive, V, omega)
    half = 2 * drive.cutoff
    values = fourier_series_on_grid(coefficients, np.arange(-half, half + 1), grid)
    scale = max(float(np.max(np.abs(values.real))) if values.size else 0.0, 1e-300)
    if values.size and float(np.max(np.abs(values.imag))) > 1e-8 * scale:
        raise InvariantViolation("realness", "the second-order correction has a non-negligible imaginary part")
    return SecondOrderCorrection(values.real, np.asarray(grid, dtype=float), coefficients, omega, V)


# ========================================================================================================


def write_spectrum(path: str | Path, solution: EigenSolution, comments: list[str] | None = None) -> Path:
    rows = [(index, energy, shifted) for index, (energy, shifted) in enumerate(zip(solution.energies, solution.shifted_energies))]
    return write_csv(path, ["index", "E", "E_shifted"], rows, ["energies in units hbar=m=1; E_shifted = E - omega^2/2", *(comments or [])])


def write_state_coefficients(path: str | Path, solution: EigenSolution, index: int) -> Path:
    vector = solution.vectors[:, index]
    rows = [(n, value.real, value.imag) for n, value in zip(solution.basis.harmonics, vector)]
    return write_csv(path, ["n", "Re", "Im"], rows, [f"state {index}, beta={solution.basis.beta!r}"])


def write_series(path: str | Path, abscissa: np.ndarray, values: np.ndarray, columns: tuple[str, str], comments: list[str] | None = None) -> Path:
    return write_csv(path, list(columns), zip(abscissa, values), comments or [])
