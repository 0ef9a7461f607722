import math

import numpy as np
import pytest

from timeloc.errors import InvalidParameterError
from timeloc.models.classical import (
    ClassicalState, IntegratorConfig, RingSystem, fan_initial_conditions, force, heff_energy, heff_gradient, heff_portrait, integrate,
    poincare, section_energy_spread,
)  # fmt: skip
from timeloc.models.disorder import effective_coefficients
from timeloc.models.effmodel import EffectiveModelSpec
from timeloc.utils import wrap_angle

from tests.setup_context import small_drive


class TestIntegrator:
    def setup_method(self) -> None:
        self.drive = small_drive(k0=1.0, seed=5)
        self.system = RingSystem(self.drive, V=2.0, omega=20.0, alpha=0.3, lam=0.5, s=2)
        self.config = IntegratorConfig.for_system(self.system)

    def test_default_step_divides_the_period(self) -> None:
        assert self.config.dt == pytest.approx(self.system.period / 64)
        assert self.config.fourier_cutoff == 4

    def test_free_motion(self) -> None:
        system = RingSystem(None, V=0.0, omega=10.0, alpha=0.3)
        config = IntegratorConfig.for_system(system)
        trajectory = integrate(ClassicalState(0.1, 2.0), system, config, 5 * system.period)
        assert np.allclose(trajectory.p, 2.0)
        assert trajectory.theta[-1, 0] == pytest.approx(0.1 + 1.7 * 5 * system.period)

    def test_no_force_without_drive_or_lattice(self) -> None:
        system = RingSystem(None, V=0.0, omega=10.0)
        assert np.all(force(np.linspace(-3, 3, 7), 0.2, system) == 0)

    def test_force_cutoff_cannot_exceed_the_drive(self) -> None:
        with pytest.raises(InvalidParameterError):
            force(0.1, 0.0, self.system, cutoff=10)

    def test_time_reversal(self) -> None:
        states = [ClassicalState(0.4, 20.5), ClassicalState(-2.0, 19.0)]
        duration = 3 * self.system.period
        forward = integrate(states, self.system, self.config, duration)
        ends = [ClassicalState(float(forward.theta[-1, i]), float(forward.p[-1, i]), float(forward.times[-1])) for i in range(2)]
        backward = integrate(ends, self.system, self.config, -duration)
        assert np.allclose(backward.theta[-1], [0.4, -2.0], atol=1e-8)
        assert np.allclose(backward.p[-1], [20.5, 19.0], atol=1e-8)
        assert backward.times[-1] == pytest.approx(0.0, abs=1e-12)

    def test_trajectories_do_not_depend_on_grouping(self) -> None:
        states = [ClassicalState(0.4, 20.5), ClassicalState(-2.0, 19.0)]
        duration = 2 * self.system.period
        together = integrate(states, self.system, self.config, duration)
        alone = integrate(states[1], self.system, self.config, duration)
        assert np.allclose(together.theta[:, 1], alone.theta[:, 0], atol=1e-9)
        assert np.allclose(together.p[:, 1], alone.p[:, 0], atol=1e-9)

    def test_second_order_convergence(self) -> None:
        states = [ClassicalState(0.4, 20.5), ClassicalState(-2.0, 19.0)]
        duration = self.system.period

        def end_point(steps_per_period: int) -> np.ndarray:
            trajectory = integrate(states, self.system, IntegratorConfig.for_system(self.system, steps_per_period), duration)
            return np.concatenate([trajectory.theta[-1], trajectory.p[-1]])

        reference = end_point(2048)
        coarse = np.linalg.norm(end_point(128) - reference)
        fine = np.linalg.norm(end_point(256) - reference)
        assert 3.5 < coarse / fine < 4.5

    def test_step_too_large(self) -> None:
        with pytest.raises(InvalidParameterError):
            IntegratorConfig(self.system.period / 10, 4).validate(self.system.omega)

    def test_duration_must_be_whole_steps(self) -> None:
        with pytest.raises(InvalidParameterError):
            integrate(ClassicalState(0.0, 1.0), self.system, self.config, 1.5 * self.config.dt)

    def test_start_times_must_match(self) -> None:
        with pytest.raises(InvalidParameterError):
            integrate([ClassicalState(0.0, 1.0), ClassicalState(0.0, 1.0, 0.5)], self.system, self.config, self.system.period)

    def test_state_is_wrapped(self) -> None:
        trajectory = integrate(ClassicalState(3.1, 25.0), self.system, self.config, self.system.period)
        state = trajectory.state(-1)
        assert -math.pi <= state.theta < math.pi


class TestSections:
    def setup_method(self) -> None:
        self.omega, self.alpha = 20.0, 0.3

    def test_section_samples_whole_periods(self) -> None:
        system = RingSystem(None, V=0.0, omega=self.omega, alpha=self.alpha)
        config = IntegratorConfig.for_system(system)
        trajectory = integrate(ClassicalState(0.2, self.omega + self.alpha + 0.5), system, config, 4 * system.period, sample_every=16)
        section = poincare(trajectory, self.omega, self.alpha)
        assert list(section.periods) == [0, 1, 2, 3, 4]
        assert np.allclose(section.momentum, 0.5)
        expected = wrap_angle(0.2 + (self.omega + 0.5) * system.period * np.arange(5))
        assert np.allclose(np.cos(section.theta[:, 0]), np.cos(expected))

    def test_free_sections_conserve_the_effective_energy(self) -> None:
        system = RingSystem(None, V=0.0, omega=self.omega, alpha=self.alpha)
        config = IntegratorConfig.for_system(system)
        states = fan_initial_conditions(3, 4.0, self.omega, self.alpha, seed=1)
        section = poincare(integrate(states, system, config, 3 * system.period), self.omega, self.alpha)
        spreads, mean_spread = section_energy_spread(section, EffectiveModelSpec(None, omega=self.omega))
        assert np.all(spreads < 1e-9)
        assert mean_spread < 1e-9

    def test_fan_initial_conditions(self) -> None:
        states = fan_initial_conditions(5, 8.0, self.omega, self.alpha, seed=2)
        momenta = [state.p - self.alpha - self.omega for state in states]
        assert momenta == pytest.approx(list(np.linspace(-2.0, 2.0, 5)))
        assert all(-math.pi <= state.theta < math.pi for state in states)
        again = fan_initial_conditions(5, 8.0, self.omega, self.alpha, seed=2)
        assert [state.theta for state in again] == [state.theta for state in states]


class TestEffectiveEnergy:
    def setup_method(self) -> None:
        drive = small_drive(k0=1.5, seed=8)
        self.spec = EffectiveModelSpec(effective_coefficients(drive), V=3.0, omega=20.0, lam=1.5, s=3)

    def test_free_energy(self) -> None:
        spec = EffectiveModelSpec(None, omega=20.0, mu=2.0)
        assert heff_energy(0.7, 1.5, spec) == pytest.approx(2.0 * 1.5**2 / 2 + 200.0)

    def test_gradient_matches_finite_differences(self) -> None:
        theta, momentum, step = 0.37, -1.2, 1e-6
        d_theta, d_momentum = heff_gradient(theta, momentum, self.spec)
        numeric_theta = (heff_energy(theta + step, momentum, self.spec) - heff_energy(theta - step, momentum, self.spec)) / (2 * step)
        assert float(d_theta) == pytest.approx(float(numeric_theta), rel=1e-5, abs=1e-6)
        assert float(d_momentum) == pytest.approx(-1.2)

    def test_portrait_shape(self) -> None:
        portrait = heff_portrait(self.spec, np.linspace(-3, 3, 11), np.linspace(-2, 2, 5))
        assert portrait.shape == (5, 11)
        assert portrait[0, 0] == pytest.approx(float(heff_energy(-3.0, -2.0, self.spec)))
