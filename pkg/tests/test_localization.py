import math

import numpy as np
import pytest

from timeloc.errors import InvalidParameterError, ShortSampleWarning
from timeloc.models.disorder import LinePotential, correlation_length, synthesize_line_potential
from timeloc.models.localization import (
    BornInput, born_xi, born_xi_simplified, correlation_energy, fit_tail, lyapunov, lyapunov_ensemble, scattering_regime,
)  # fmt: skip
from timeloc.utils import uniform_ring_grid


def flat_line(energy_scale_h: float = 1e-3, length: float = 100.0) -> LinePotential:
    points = round(length / energy_scale_h)
    return LinePotential(np.zeros(points), energy_scale_h, length, 0.0, 1.0, 0)


class TestBorn:
    def test_closed_form(self) -> None:
        result = born_xi(BornInput(8e3, 1e3, 4e3))
        expected = 1e3 * 8e3 / (math.sqrt(math.pi) * 4e3**2) * math.exp(8 * 8e3 / 1e3**2)
        assert result.xi == pytest.approx(expected, rel=1e-12)
        assert result.xi == pytest.approx(0.30, abs=5e-3)
        assert result.zeta == pytest.approx(math.sqrt(2) / 1e3)
        assert result.correlation_energy == pytest.approx(5e5)
        assert result.indicator == pytest.approx(4e3**2 / (8e3 * 5e5))
        assert result.regime == "quantum"
        assert result.visible_on_ring

    def test_semiclassical_regime(self) -> None:
        assert scattering_regime(100.0, 10.0) == "semiclassical"
        assert scattering_regime(10.0, 10.0) == "quantum"
        assert correlation_energy(10.0) == 50.0

    def test_simplified_form_drops_the_exponential(self) -> None:
        energy, k0, V = 20.0, 30.0, 7.0
        ratio = born_xi(BornInput(energy, k0, V)).xi / born_xi_simplified(energy, k0, V)
        assert ratio == pytest.approx(math.exp(8 * energy / k0**2), rel=1e-12)

    def test_invalid_inputs(self) -> None:
        with pytest.raises(InvalidParameterError):
            born_xi(BornInput(0.0, 10.0, 1.0))
        with pytest.raises(InvalidParameterError):
            born_xi(BornInput(5.0, 10.0, 0.0))


class TestTransferMatrix:
    def test_under_barrier_decay_sets_the_convention(self) -> None:
        # density of an evanescent wave falls as exp(-2 kappa x), so xi = 1 / (2 kappa)
        kappa = 2.0
        estimate = lyapunov(flat_line(), -(kappa**2) / 2)
        assert estimate.amplitude_rate == pytest.approx(kappa, rel=0.01)
        assert estimate.xi == pytest.approx(1 / (2 * kappa), rel=0.01)
        assert math.isnan(estimate.stderr)

    def test_free_propagation_does_not_grow(self) -> None:
        estimate = lyapunov(flat_line(), 2.0)
        assert abs(estimate.amplitude_rate) < 0.05

    def test_cadence_does_not_change_the_growth(self) -> None:
        line = flat_line(length=20.0)
        assert lyapunov(line, -2.0, cadence=16).gamma == pytest.approx(lyapunov(line, -2.0, cadence=128).gamma, rel=1e-9)

    def test_resolution_checks(self) -> None:
        k0 = 2.0
        coarse = LinePotential(np.zeros(100), correlation_length(k0) / 5, 10.0, 1.0, k0, 0)
        with pytest.raises(InvalidParameterError):
            lyapunov(coarse, 1.0)
        with pytest.raises(InvalidParameterError):
            lyapunov(flat_line(0.01, 10.0), 2e4)
        with pytest.raises(InvalidParameterError):
            lyapunov_ensemble(2.0, 5.0, 300.0, 0.05, 2.0, 0, seed=1)

    def test_short_line_warns(self) -> None:
        with pytest.warns(ShortSampleWarning):
            lyapunov_ensemble(2.0, 5.0, 20.0, correlation_length(2.0) / 10, 2.0, 1, seed=1)

    def test_ensemble_is_independent_of_worker_count(self) -> None:
        arguments = {"k0": 2.0, "V": 5.0, "L": 300.0, "h": correlation_length(2.0) / 10, "energy": 2.0, "realizations": 4, "seed": 13}
        serial = lyapunov_ensemble(**arguments, threads=1)  # type: ignore[arg-type]
        parallel = lyapunov_ensemble(**arguments, threads=2)  # type: ignore[arg-type]
        assert serial.gamma == parallel.gamma
        assert serial.stderr == parallel.stderr
        assert serial.realizations == 4
        assert serial.stderr > 0

    def test_stderr_is_the_standard_error_of_the_rates(self) -> None:
        k0, V, h = 2.0, 5.0, correlation_length(2.0) / 10
        lines = [synthesize_line_potential(k0, V, 300.0, h, 13, index) for index in range(8)]
        once, repeated = lyapunov(lines, 2.0), lyapunov(lines * 4, 2.0)
        assert repeated.gamma == pytest.approx(once.gamma, rel=1e-12)
        # same spread of rates, four times the sample: std(ddof=1) / sqrt(N) shrinks by sqrt((31 * 8) / (7 * 32) * 4)
        assert once.stderr / repeated.stderr == pytest.approx(math.sqrt(992 / 224), rel=1e-9)

    @pytest.mark.statistical
    def test_stderr_shrinks_as_one_over_root_n(self) -> None:
        arguments = {"k0": 2.0, "V": 5.0, "L": 300.0, "h": correlation_length(2.0) / 10, "energy": 2.0, "seed": 29}
        few = lyapunov_ensemble(**arguments, realizations=16)  # type: ignore[arg-type]
        many = lyapunov_ensemble(**arguments, realizations=64)  # type: ignore[arg-type]
        assert 1.3 < few.stderr / many.stderr < 3.0


class TestTailFit:
    def setup_method(self) -> None:
        self.grid = uniform_ring_grid(1024)

    def test_recovers_an_exponential(self) -> None:
        density = np.exp(-np.abs(self.grid) / 0.2)
        fit = fit_tail(density, self.grid)
        assert fit.xi == pytest.approx(0.2, rel=1e-6)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.center == 0.0
        assert fit.accepted

    def test_peak_across_the_seam(self) -> None:
        distance = np.abs(np.mod(self.grid - 3.0 + math.pi, 2 * math.pi) - math.pi)
        fit = fit_tail(np.exp(-distance / 0.3), self.grid)
        assert fit.xi == pytest.approx(0.3, rel=1e-3)
        assert fit.accepted

    def test_flat_density_is_rejected(self) -> None:
        assert not fit_tail(np.ones(self.grid.size), self.grid).accepted

    def test_floor_drops_tiny_values(self) -> None:
        density = np.exp(-np.abs(self.grid) / 0.05)
        fit = fit_tail(density, self.grid, floor=1e-6)
        assert fit.window[1] < 0.05 * math.log(1e5) + 1e-9

    def test_negative_density(self) -> None:
        with pytest.raises(InvalidParameterError):
            fit_tail(-np.ones(8), np.arange(8.0))

    def test_envelope_of_an_oscillating_state(self) -> None:
        density = np.exp(-np.abs(self.grid) / 0.2) * np.cos(20 * self.grid) ** 2
        envelope = fit_tail(density, self.grid, peaks_only=True)
        raw = fit_tail(density, self.grid)
        assert envelope.xi == pytest.approx(0.2, rel=0.02)
        assert envelope.accepted
        assert envelope.r_squared > raw.r_squared

    def test_recovers_xi_under_multiplicative_noise(self) -> None:
        rng = np.random.default_rng(5)
        density = np.exp(-np.abs(self.grid) / 0.2) * rng.uniform(0.8, 1.2, self.grid.size)
        fit = fit_tail(density, self.grid)
        assert fit.xi == pytest.approx(0.2, rel=0.05)
        assert fit.accepted

    def test_grid_too_short(self) -> None:
        with pytest.raises(InvalidParameterError):
            fit_tail(np.ones(2), np.arange(2.0))
        with pytest.raises(InvalidParameterError):
            fit_tail(np.ones(8), np.arange(9.0))
