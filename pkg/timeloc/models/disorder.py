"""Spatial sawtooth harmonics, random temporal drive harmonics and the disorder potentials they produce."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from timeloc.errors import InvalidParameterError, InvariantViolation, UnderResolvedWarning
from timeloc.serializable_abc import Serializable
from timeloc.utils import make_rng, uniform_ring_grid

REALNESS_TOLERANCE = 1e-10
_GRID_CHUNK = 2048


def correlation_length(k0: float) -> float:
    return math.sqrt(2.0) / k0


def default_cutoff(k0: float) -> int:
    return max(1, math.ceil(4 * k0))


@dataclass(frozen=True, eq=False)
class DriveSpec(Serializable):
    k0: float
    cutoff: int
    seed: int
    realization: int = 0

    @classmethod
    def with_default_cutoff(cls, k0: float, seed: int, realization: int = 0) -> DriveSpec:
        return cls(k0, default_cutoff(k0), seed, realization)

    def scaled_cutoff(self, factor: float) -> DriveSpec:
        return DriveSpec(self.k0, math.ceil(self.cutoff * factor), self.seed, self.realization)


@dataclass(frozen=True, eq=False)
class DriveCoefficients(Serializable):
    """f_k for k in [-K, K], stored at index k + K."""

    k0: float
    cutoff: int
    seed: int
    realization: int
    values: np.ndarray

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    def at(self, k: int) -> complex:
        if abs(k) > self.cutoff:
            return 0j
        return complex(self.values[k + self.cutoff])


@dataclass(frozen=True, eq=False)
class EffectiveDisorderCoefficients(Serializable):
    """c_k = g_k f_{-k} for k in [-K, K], stored at index k + K."""

    k0: float
    cutoff: int
    values: np.ndarray

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    def at(self, k: int) -> complex:
        if abs(k) > self.cutoff:
            return 0j
        return complex(self.values[k + self.cutoff])


@dataclass(frozen=True, eq=False)
class LinePotential(Serializable):
    samples: np.ndarray
    h: float
    L: float
    V: float
    k0: float
    seed: int
    realization: int = 0

    @property
    def positions(self) -> np.ndarray:
        return self.h * np.arange(self.samples.size)


# ========================================================================================================


def sawtooth_coefficient(n: int) -> complex:
    """g_n = i(-1)^n / (pi n) for the sawtooth g(theta) = theta/pi on [-pi, pi), g_0 = 0."""
    if n == 0:
        return 0j
    return 1j * (-1) ** (n % 2) / (math.pi * n)


def sawtooth_coefficients(harmonics: np.ndarray) -> np.ndarray:
    harmonics = np.asarray(harmonics)
    safe = np.where(harmonics == 0, 1, harmonics)
    signs = np.where(harmonics % 2 == 0, 1.0, -1.0)
    return np.where(harmonics == 0, 0j, 1j * signs / (math.pi * safe))


def envelope(k: np.ndarray | int, k0: float) -> np.ndarray:
    """|g_k f_k| = exp(-k^2 / 2k0^2) / (sqrt(k0) pi^(1/4)), zero at k = 0."""
    k = np.asarray(k, dtype=float)
    magnitude = np.exp(-(k**2) / (2 * k0**2)) / (math.sqrt(k0) * math.pi**0.25)
    return np.where(k == 0, 0.0, magnitude)


def synthesize_drive(spec: DriveSpec) -> DriveCoefficients:
    if spec.cutoff < 1:
        raise InvalidParameterError(f"The drive cutoff K must be at least 1, got {spec.cutoff}")
    if spec.k0 <= 0:
        raise InvalidParameterError(f"The correlation wavenumber k0 must be positive, got {spec.k0}")
    rng = make_rng(spec.seed, "drive", spec.realization)
    phases = rng.uniform(0.0, 2 * math.pi, size=spec.cutoff)
    positive = np.arange(1, spec.cutoff + 1)
    f_positive = envelope(positive, spec.k0) * math.pi * positive * np.exp(1j * phases)  # E(k) / |g_k|
    values = np.zeros(2 * spec.cutoff + 1, dtype=complex)
    values[spec.cutoff + 1 :] = f_positive
    values[: spec.cutoff] = np.conj(f_positive[::-1])
    return DriveCoefficients(spec.k0, spec.cutoff, spec.seed, spec.realization, values)


def effective_coefficients(drive: DriveCoefficients) -> EffectiveDisorderCoefficients:
    harmonics = drive.harmonics
    values = sawtooth_coefficients(harmonics) * drive.values[::-1]  # g_k * f_{-k}
    return EffectiveDisorderCoefficients(drive.k0, drive.cutoff, values)


def fourier_series_on_grid(coefficients: np.ndarray, harmonics: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Complex sum over harmonics of coefficient * exp(i k x), evaluated chunk by chunk over the grid."""
    grid = np.asarray(grid, dtype=float)
    result = np.empty(grid.shape, dtype=complex)
    flat_grid, flat_result = grid.reshape(-1), result.reshape(-1)
    for start in range(0, flat_grid.size, _GRID_CHUNK):
        chunk = flat_grid[start : start + _GRID_CHUNK]
        flat_result[start : start + _GRID_CHUNK] = np.exp(1j * np.outer(chunk, harmonics)) @ coefficients
    return result


def potential_on_grid(c: EffectiveDisorderCoefficients, V: float, grid: np.ndarray) -> np.ndarray:
    values = V * fourier_series_on_grid(c.values, c.harmonics, grid)
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > REALNESS_TOLERANCE * max(abs(V), 1.0):
        raise InvariantViolation("realness", f"imaginary residue {residue:.3e} of the ring potential exceeds {REALNESS_TOLERANCE:g}*V")
    return values.real


def drive_on_grid(drive: DriveCoefficients, omega: float, times: np.ndarray) -> np.ndarray:
    values = fourier_series_on_grid(drive.values, drive.harmonics * omega, np.asarray(times, dtype=float))
    scale = max(float(np.sqrt(np.mean(values.real**2))), 1.0) if values.size else 1.0
    if values.size and float(np.max(np.abs(values.imag))) > REALNESS_TOLERANCE * scale:
        raise InvariantViolation("realness", "the drive f(t) has a non-negligible imaginary part")
    return values.real


def sawtooth_on_grid(cutoff: int, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fourier-truncated sawtooth g(theta) and its derivative g'(theta), both real."""
    positive = np.arange(1, cutoff + 1)
    signs = np.where(positive % 2 == 0, 1.0, -1.0)
    phase = np.outer(np.asarray(grid, dtype=float).reshape(-1), positive)
    # g = sum_n 2 Re(g_n e^{in theta}) = -(2/pi) sum (-1)^n sin(n theta) / n
    g = -(2 / math.pi) * (np.sin(phase) @ (signs / positive))
    g_prime = -(2 / math.pi) * (np.cos(phase) @ signs)
    shape = np.shape(grid)
    return g.reshape(shape), g_prime.reshape(shape)


def synthesize_line_potential(k0: float, V: float, L: float, h: float, seed: int, realization: int = 0) -> LinePotential:
    """Spectral synthesis on one long periodic domain: mode spacing 2pi/L, Gaussian envelope, independent uniform phases."""
    zeta = correlation_length(k0)
    if h > zeta / 2:
        raise InvalidParameterError(f"Grid step h={h:g} under-resolves the disorder (correlation length {zeta:g}, need h <= {zeta / 2:g})")
    if h > zeta / 10:
        warnings.warn(f"Grid step h={h:g} is coarser than zeta/10={zeta / 10:g}", UnderResolvedWarning, stacklevel=2)
    points = max(4, round(L / h))
    length = points * h
    rng = make_rng(seed, "line", realization)
    mode_count = (points - 1) // 2  # strictly below Nyquist
    phases = rng.uniform(0.0, 2 * math.pi, size=mode_count)
    dk = 2 * math.pi / length
    wavenumbers = dk * np.arange(1, mode_count + 1)
    amplitudes = np.sqrt(dk / (math.sqrt(math.pi) * k0)) * np.exp(-(wavenumbers**2) / (2 * k0**2))
    spectrum = np.zeros(points // 2 + 1, dtype=complex)
    spectrum[1 : mode_count + 1] = points * amplitudes * np.exp(1j * phases)
    samples = V * np.fft.irfft(spectrum, n=points)
    return LinePotential(samples, h, length, V, k0, seed, realization)


# ========================================================================================================


def cutoff_convergence(spec: DriveSpec, points: int | None = None) -> float:
    """Relative RMS change of the ring potential when the cutoff grows to 1.5 K (phases of shared harmonics are unchanged)."""
    grid = uniform_ring_grid(points or 4 * spec.cutoff + 8)
    base = potential_on_grid(effective_coefficients(synthesize_drive(spec)), 1.0, grid)
    larger = potential_on_grid(effective_coefficients(synthesize_drive(spec.scaled_cutoff(1.5))), 1.0, grid)
    return float(np.sqrt(np.mean((larger - base) ** 2)) / np.sqrt(np.mean(base**2)))


def _ring_samples(k0: float, cutoff: int, seed: int, realization: int, grid: np.ndarray) -> np.ndarray:
    drive = synthesize_drive(DriveSpec(k0, cutoff, seed, realization))
    return potential_on_grid(effective_coefficients(drive), 1.0, grid)


def ring_ensemble_variance(k0: float, cutoff: int, seed: int, realizations: int, threads: int = 1) -> float:
    """Variance across realizations (per grid point, ddof=1) averaged over a uniform ring grid, in units of V^2."""
    grid = uniform_ring_grid(2 * cutoff + 2)
    samples = Parallel(n_jobs=threads)(delayed(_ring_samples)(k0, cutoff, seed, index, grid) for index in range(realizations))
    return float(np.mean(np.var(np.array(samples), axis=0, ddof=1)))


def _line_autocovariance(k0: float, L: float, h: float, seed: int, realization: int, lags: np.ndarray) -> np.ndarray:
    samples = synthesize_line_potential(k0, 1.0, L, h, seed, realization).samples
    return np.array([np.mean(samples * np.roll(samples, -lag)) for lag in lags])


def line_ensemble_autocovariance(k0: float, L: float, h: float, seed: int, realizations: int, lags: np.ndarray, threads: int = 1) -> np.ndarray:
    """Ensemble- and space-averaged autocovariance at integer sample lags, in units of V^2."""
    rows = Parallel(n_jobs=threads)(delayed(_line_autocovariance)(k0, L, h, seed, index, np.asarray(lags)) for index in range(realizations))
    return np.mean(np.array(rows), axis=0)


# ========================================================================================================


def write_coefficients(path: str | Path, coefficients: DriveCoefficients | EffectiveDisorderCoefficients, comment: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {type(coefficients).__name__} k0={coefficients.k0!r} K={coefficients.cutoff}"]
    if comment:
        lines.append(f"# {comment}")
    lines.append("# k Re Im")
    for k, value in zip(coefficients.harmonics, coefficients.values):
        lines.append(f"{k} {value.real:.17e} {value.imag:.17e}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_coefficients(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (harmonics, complex values) from a file written by `write_coefficients`."""
    table = np.loadtxt(path, comments="#", ndmin=2)
    return table[:, 0].astype(int), table[:, 1] + 1j * table[:, 2]


def write_line_potential(stem: str | Path, potential: LinePotential) -> tuple[Path, Path]:
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    binary_path, header_path = stem.with_suffix(".bin"), stem.with_suffix(".txt")
    potential.samples.astype("<f8").tofile(binary_path)
    header_path.write_text(
        "h L V k0 seed realization\n"
        f"{potential.h!r} {potential.L!r} {potential.V!r} {potential.k0!r} {potential.seed} {potential.realization}\n",
        encoding="utf-8",
    )
    return binary_path, header_path


def read_line_potential(stem: str | Path) -> LinePotential:
    stem = Path(stem)
    header = stem.with_suffix(".txt").read_text(encoding="utf-8").splitlines()[1].split()
    samples = np.fromfile(stem.with_suffix(".bin"), dtype="<f8")
    return LinePotential(samples, float(header[0]), float(header[1]), float(header[2]), float(header[3]), int(header[4]), int(header[5]))
