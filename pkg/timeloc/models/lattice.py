"""Tight-binding reduction of the driven lattice: hopping, on-site disorder at the lattice minima, chain spectra."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg

from timeloc.errors import CorrelatedSitesWarning, EigensolverError, InvalidParameterError, StrongDisorderWarning
from timeloc.models.disorder import DriveSpec, correlation_length, effective_coefficients, potential_on_grid, synthesize_drive
from timeloc.models.effmodel import EffectiveModelSpec, PlaneWaveBasis, solve
from timeloc.models.localization import TailFit, fit_tail
from timeloc.serializable_abc import Serializable

Band = Literal["lowest", "first-excited"]
EXCITED_BAND_FACTOR = 32
NEIGHBOR_CORRELATION_LIMIT = 0.05


@dataclass(frozen=True, eq=False)
class LatticeSpec(Serializable):
    s: int
    lam: float
    V: float
    k0: float
    seed: int
    band: Band = "lowest"
    realization: int = 0

    def validate(self) -> None:
        if self.s < 1:
            raise InvalidParameterError(f"The site count s must be a positive integer, got {self.s}")
        if self.lam <= 0:
            raise InvalidParameterError(f"The lattice depth lambda must be positive, got {self.lam}")
        if self.band not in ("lowest", "first-excited"):
            raise InvalidParameterError(f"Unknown band {self.band!r}")

    @property
    def site_spacing(self) -> float:
        return 2 * math.pi / self.s

    @property
    def depth_ratio(self) -> float:
        """sqrt(lambda)/s; the wavepacket-train regime needs this to be large."""
        return math.sqrt(self.lam) / self.s

    @property
    def uncorrelated_sites(self) -> bool:
        return correlation_length(self.k0) < self.site_spacing


@dataclass(frozen=True, eq=False)
class TightBindingChain(Serializable):
    J: float
    onsite: np.ndarray
    boundary: Literal["periodic"] = "periodic"

    @property
    def sites(self) -> int:
        return int(self.onsite.size)


@dataclass(frozen=True, eq=False)
class ChainSpectrum(Serializable):
    energies: np.ndarray
    vectors: np.ndarray = field(repr=False)
    J: float


@dataclass(frozen=True, eq=False)
class BandReport(Serializable):
    band: int
    lower: float
    upper: float
    width: float
    J_exact: float
    J_formula: float


# ========================================================================================================


def hopping(lam: float, s: int, band: Band = "lowest") -> float:
    """Deep-lattice tunnelling J = (2^5 lambda^3 s^2 / pi^2)^(1/4) exp(-sqrt(32 lambda) / s); 32x larger in the first excited band."""
    if lam <= 0 or s < 1:
        raise InvalidParameterError(f"hopping needs lambda > 0 and s >= 1, got lambda={lam}, s={s}")
    J = (2**5 * lam**3 * s**2 / math.pi**2) ** 0.25 * math.exp(-math.sqrt(32 * lam) / s)
    return EXCITED_BAND_FACTOR * J if band == "first-excited" else J


def lattice_minima(s: int) -> np.ndarray:
    """Theta_j = (2j + 1) pi / s, the minima of cos(s Theta)."""
    return (2 * np.arange(s) + 1) * math.pi / s


def neighbor_correlation(k0: float, s: int) -> float:
    """Normalized disorder autocovariance exp(-k0^2 Delta^2 / 4) at the site spacing Delta = 2 pi / s."""
    return math.exp(-(k0**2) * (2 * math.pi / s) ** 2 / 4)


def sites_to_radians(length: float | np.ndarray, s: int) -> float | np.ndarray:
    return length * 2 * math.pi / s


def radians_to_sites(length: float | np.ndarray, s: int) -> float | np.ndarray:
    return length * s / (2 * math.pi)


def onsite_energies(spec: LatticeSpec) -> np.ndarray:
    spec.validate()
    correlation = neighbor_correlation(spec.k0, spec.s)
    if correlation > NEIGHBOR_CORRELATION_LIMIT:
        warnings.warn(f"Neighbouring sites are correlated ({correlation:.3f} > {NEIGHBOR_CORRELATION_LIMIT})", CorrelatedSitesWarning, stacklevel=2)
    if spec.V == 0:
        return np.zeros(spec.s)
    drive = synthesize_drive(DriveSpec.with_default_cutoff(spec.k0, spec.seed, spec.realization))
    return potential_on_grid(effective_coefficients(drive), spec.V, lattice_minima(spec.s))


def lattice_xi(J: float, s: int, V: float) -> float:
    """Band-centre localization length 8 pi J^2 / (s V^2), in radians of Theta."""
    if V <= 0:
        raise InvalidParameterError(f"The lattice localization length needs V > 0, got {V}")
    if V >= J:
        warnings.warn(f"V={V:g} is not small against J={J:g}; the weak-disorder formula is outside its validity", StrongDisorderWarning, stacklevel=2)
    return 8 * math.pi * J**2 / (s * V**2)


def chain_from_spec(spec: LatticeSpec, J: float | None = None) -> TightBindingChain:
    return TightBindingChain(hopping(spec.lam, spec.s, spec.band) if J is None else J, onsite_energies(spec))


# ========================================================================================================


def chain_matrix(chain: TightBindingChain) -> np.ndarray:
    sites = chain.sites
    matrix = np.diag(np.asarray(chain.onsite, dtype=float))
    for j in range(sites):
        # for s <= 2 the forward and backward bonds land on the same element and add up
        matrix[j, (j + 1) % sites] -= chain.J
        matrix[(j + 1) % sites, j] -= chain.J
    return matrix


def diagonalize_chain(chain: TightBindingChain) -> ChainSpectrum:
    try:
        energies, vectors = scipy.linalg.eigh(chain_matrix(chain))
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"Chain diagonalization failed: {exc}") from exc
    return ChainSpectrum(energies, vectors, chain.J)


def mid_band_states(spectrum: ChainSpectrum, count: int) -> np.ndarray:
    center = float(np.mean(spectrum.energies))
    return np.sort(np.argsort(np.abs(spectrum.energies - center), kind="stable")[:count])


def chain_tail_fits(spectrum: ChainSpectrum, indices: np.ndarray) -> list[TailFit]:
    """Tail fits of site densities, with the site grid expressed in radians so xi comes out in Theta units."""
    sites = spectrum.vectors.shape[0]
    grid = lattice_minima(sites)
    return [fit_tail(np.abs(spectrum.vectors[:, index]) ** 2, grid, periodic=True) for index in indices]


# ========================================================================================================


def band_structure(lam: float, s: int, bands: int = 2, mu: float = 1.0, n_halfwidth: int | None = None) -> list[BandReport]:
    """Exact bands of mu P^2/2 + (lambda/2) cos(s Theta) on the ring: band b holds the eigenvalues with index in [b s, (b+1) s)."""
    if bands < 1:
        raise InvalidParameterError(f"At least one band must be requested, got {bands}")
    halfwidth = n_halfwidth or math.ceil(4 * math.sqrt(2 * lam / mu)) + s
    solution = solve(EffectiveModelSpec(None, lam=lam, s=s, mu=mu), PlaneWaveBasis.centered(halfwidth))
    reports = []
    for band in range(bands):
        energies = solution.energies[band * s : (band + 1) * s]
        width = float(energies[-1] - energies[0])
        formula = hopping(lam, s, "lowest") * (EXCITED_BAND_FACTOR if band == 1 else 1)
        reports.append(BandReport(band, float(energies[0]), float(energies[-1]), width, width / 4, formula if band < 2 else float("nan")))
    return reports
