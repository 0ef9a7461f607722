import math

import numpy as np
import pytest

from timeloc.models.disorder import correlation_length, default_cutoff, envelope, line_ensemble_autocovariance, ring_ensemble_variance
from timeloc.models.effmodel import second_order_coefficients
from timeloc.models.floquet import compare_levels, default_window, effective_model_for, level_residual, second_order_check
from timeloc.models.lattice import band_structure, hopping
from timeloc.models.localization import BornInput, born_xi, lyapunov_ensemble
from timeloc.pipelines import run_experiment
from timeloc.utils import read_csv

from tests.setup_context import setup_context, small_drive

GOLDEN = (math.sqrt(5) - 1) / 2
SLOW_OMEGA = 300 - GOLDEN
FAST_OMEGA = 2000 - GOLDEN


def compare_at(omega: float, seed: int = 7, V: float = 20.0, k0: float = 10.0, levels: int = 8):  # type: ignore[no-untyped-def]
    drive = small_drive(k0, seed)
    window = default_window(k0, drive.cutoff, omega, GOLDEN)
    return drive, window, compare_levels(drive, V, omega, GOLDEN, window, levels)


@pytest.mark.slow
@pytest.mark.acceptance
@pytest.mark.statistical
class TestBornAgainstTransferMatrix:
    def test_weak_scattering_lengths_agree(self) -> None:
        energy, k0, V = 8e3, 1e3, 4e3
        born = born_xi(BornInput(energy, k0, V))
        assert born.indicator < 0.01
        h = min(correlation_length(k0), 2 * math.pi / math.sqrt(2 * energy)) / 10
        estimate = lyapunov_ensemble(k0, V, 200 * born.xi, h, energy, realizations=24, seed=2024, threads=4)
        assert estimate.xi == pytest.approx(born.xi, rel=0.05)
        assert estimate.stderr / estimate.gamma < 0.05


@pytest.mark.slow
@pytest.mark.acceptance
@pytest.mark.statistical
class TestEigenstateLocalization:
    def test_shell_states_follow_born(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        overrides = ["physics.k0=10", "physics.V=20", "physics.energy=12", "numerics.shell=3", "numerics.realizations=24", "numerics.states=10"]
        context = setup_context(tmp_path, "custom", overrides, threads=4)
        summary = run_experiment(context)
        _, table = read_csv(context.output_path("tail_fits.csv"))
        accepted = table[table[:, 6] == 1]
        assert summary["accepted_fits"] == accepted.shape[0]
        assert accepted.shape[0] >= 20
        assert len(set(accepted[:, 0])) >= 5
        assert np.all(accepted[:, 5] > 0.9)
        assert 0.5 <= summary["xi_ratio_median"] <= 2.0


@pytest.mark.slow
@pytest.mark.acceptance
@pytest.mark.filterwarnings("ignore::timeloc.errors.PairingAmbiguityWarning")
class TestSecularValidity:
    def test_residuals_shrink_with_frequency(self) -> None:
        _, _, (slow, _, _) = compare_at(SLOW_OMEGA)
        _, _, (fast, _, _) = compare_at(FAST_OMEGA)
        assert level_residual(slow)[0] / level_residual(fast)[0] >= 10
        assert np.min(fast.overlaps) >= 0.99

    @pytest.mark.parametrize("seed", [7, 11])
    def test_second_order_term_reduces_the_residual(self, seed: int) -> None:
        drive, window, (_, spectrum, effective) = compare_at(SLOW_OMEGA, seed)
        correction = second_order_coefficients(drive, 20.0, SLOW_OMEGA)
        corrected = effective_model_for(drive, 20.0, SLOW_OMEGA, GOLDEN, window, extra_potential=correction)
        check = second_order_check(effective, corrected, spectrum, 8, GOLDEN, 20.0)
        assert check.improved
        assert check.median_with < check.median_without

    def test_classical_sections_follow_the_effective_energy(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        fast = run_experiment(setup_context(tmp_path / "fast", "sos", [f"physics.omega={FAST_OMEGA!r}"], threads=4))
        slow = run_experiment(setup_context(tmp_path / "slow", "sos", [f"physics.omega={SLOW_OMEGA!r}"], threads=4))
        assert fast["spread_over_V"] <= 0.05
        assert slow["spread_over_V"] > fast["spread_over_V"]


@pytest.mark.acceptance
@pytest.mark.statistical
class TestDisorderStatistics:
    def test_ring_variance(self) -> None:
        k0 = 100.0
        cutoff = default_cutoff(k0)
        expected = float(np.sum(envelope(np.arange(-cutoff, cutoff + 1), k0) ** 2))
        variance = ring_ensemble_variance(k0, cutoff, seed=9, realizations=100, threads=4)
        assert 0.98 <= variance <= 1.02
        assert variance == pytest.approx(expected, rel=0.02)

    def test_line_autocovariance_at_one_correlation_length(self) -> None:
        k0 = 100.0
        zeta = correlation_length(k0)
        covariance = line_ensemble_autocovariance(k0, 400 * zeta, zeta / 10, seed=5, realizations=100, lags=np.array([0, 10]), threads=4)
        assert covariance[0] == pytest.approx(1.0, rel=0.02)
        assert covariance[1] == pytest.approx(math.exp(-0.5), rel=0.03)
        assert covariance[1] / covariance[0] == pytest.approx(math.exp(-0.5), rel=0.03)


@pytest.mark.slow
@pytest.mark.acceptance
class TestBandWidth:
    def test_lowest_band_width_is_four_hoppings(self) -> None:
        lowest = band_structure(2e4, 100, bands=1)[0]
        assert lowest.width == pytest.approx(4 * hopping(2e4, 100), rel=0.15)
