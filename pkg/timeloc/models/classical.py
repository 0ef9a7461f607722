"""Exact classical dynamics of the driven ring, stroboscopic sections in the rotating frame, effective-energy portraits.

The lab-frame Hamiltonian is H = (p - alpha)^2/2 + V g(theta) f(t) + lambda cos(s theta) cos(s omega t), with g and f the
Fourier-truncated sawtooth and drive. With Theta = theta - omega t and P = p - alpha - omega its secular average is the
effective Hamiltonian of `timeloc.models.effmodel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from timeloc.errors import InvalidParameterError
from timeloc.models.disorder import DriveCoefficients, fourier_series_on_grid, potential_on_grid
from timeloc.models.effmodel import EffectiveModelSpec
from timeloc.serializable_abc import Serializable
from timeloc.utils import make_rng, wrap_angle

MAX_PHASE_STEP = 2 * math.pi / 50
MIN_STEPS_PER_PERIOD = 64


@dataclass(frozen=True, eq=False)
class ClassicalState(Serializable):
    theta: float
    p: float
    t: float = 0.0

    def wrapped(self) -> ClassicalState:
        return ClassicalState(float(wrap_angle(self.theta)), self.p, self.t)


@dataclass(frozen=True, eq=False)
class RingSystem(Serializable):
    drive: DriveCoefficients | None
    V: float
    omega: float
    alpha: float = 0.0
    lam: float = 0.0
    s: int = 1
    cutoff: int | None = None

    @property
    def force_cutoff(self) -> int:
        if self.drive is None:
            return 0
        return self.drive.cutoff if self.cutoff is None else self.cutoff

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega


@dataclass(frozen=True, eq=False)
class IntegratorConfig(Serializable):
    dt: float
    fourier_cutoff: int
    scheme: str = "drift-kick-drift"

    @classmethod
    def for_system(cls, system: RingSystem, steps_per_period: int | None = None) -> IntegratorConfig:
        """Step dividing the drive period exactly, at least max(64, 8 K) steps per period."""
        steps = steps_per_period or max(MIN_STEPS_PER_PERIOD, 8 * system.force_cutoff)
        return cls(system.period / steps, system.force_cutoff)

    def validate(self, omega: float) -> None:
        if self.dt <= 0:
            raise InvalidParameterError(f"The integrator step must be positive, got {self.dt}")
        if self.dt * omega > MAX_PHASE_STEP * (1 + 1e-12):
            raise InvalidParameterError(f"dt*omega={self.dt * omega:.4g} exceeds 2pi/50; the fast drive is not resolved")
        if self.scheme != "drift-kick-drift":
            raise InvalidParameterError(f"Unknown integration scheme {self.scheme!r}")


@dataclass(frozen=True, eq=False)
class Trajectory(Serializable):
    times: np.ndarray
    theta: np.ndarray  # (samples, trajectories), unwrapped
    p: np.ndarray

    def state(self, sample: int, trajectory: int = 0) -> ClassicalState:
        return ClassicalState(float(self.theta[sample, trajectory]), float(self.p[sample, trajectory]), float(self.times[sample])).wrapped()


@dataclass(frozen=True, eq=False)
class PoincareSection(Serializable):
    theta: np.ndarray  # (crossings, trajectories), wrapped to [-pi, pi)
    momentum: np.ndarray
    periods: np.ndarray
    omega: float
    alpha: float
    initial: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))


# ========================================================================================================


def _drive_values(drive: DriveCoefficients, cutoff: int, omega: float, times: np.ndarray) -> np.ndarray:
    harmonics = np.arange(-cutoff, cutoff + 1)
    values = drive.values[drive.cutoff - cutoff : drive.cutoff + cutoff + 1]
    return fourier_series_on_grid(values, harmonics * omega, times).real


def _sawtooth_slope(theta: np.ndarray, cutoff: int) -> np.ndarray:
    """g'(theta) = -(2/pi) sum_{n=1}^{cutoff} (-1)^n cos(n theta)."""
    harmonics = np.arange(1, cutoff + 1)
    signs = np.where(harmonics % 2 == 0, 1.0, -1.0)
    # row-wise sums keep each trajectory independent of how many are integrated together
    return -(2 / math.pi) * np.sum(np.cos(np.multiply.outer(theta, harmonics)) * signs, axis=-1)


def force(theta: np.ndarray | float, t: float, system: RingSystem, cutoff: int | None = None) -> np.ndarray:
    cutoff = system.force_cutoff if cutoff is None else cutoff
    if system.drive is not None and cutoff > system.drive.cutoff:
        raise InvalidParameterError(f"Force cutoff {cutoff} exceeds the drive cutoff {system.drive.cutoff}")
    theta = np.asarray(theta, dtype=float)
    total = np.zeros_like(theta)
    if system.V != 0 and system.drive is not None and cutoff > 0:
        drive_value = _drive_values(system.drive, cutoff, system.omega, np.array([t]))[0]
        total -= system.V * _sawtooth_slope(theta, cutoff) * drive_value
    if system.lam != 0:
        total += system.lam * system.s * np.sin(system.s * theta) * math.cos(system.s * system.omega * t)
    return total


def integrate(states: ClassicalState | Sequence[ClassicalState], system: RingSystem, config: IntegratorConfig,
              duration: float, sample_every: int = 1) -> Trajectory:  # fmt: skip
    """Drift(dt/2), kick(dt) at the midpoint time, drift(dt/2). A negative duration runs the same scheme backwards.
    Every state must share one start time; `sample_every` counts steps between stored samples."""
    states = [states] if isinstance(states, ClassicalState) else list(states)
    config.validate(system.omega)
    start = states[0].t
    if any(state.t != start for state in states):
        raise InvalidParameterError("All initial states must share the same start time")
    steps = round(abs(duration) / config.dt)
    if not math.isclose(steps * config.dt, abs(duration), rel_tol=1e-9, abs_tol=1e-12):
        raise InvalidParameterError(f"duration {duration:g} is not a whole number of steps dt={config.dt:g}")
    dt = math.copysign(config.dt, duration) if duration else config.dt
    theta = np.array([state.theta for state in states], dtype=float)
    p = np.array([state.p for state in states], dtype=float)
    cutoff = min(config.fourier_cutoff, system.force_cutoff)

    # One period of midpoint forcing values is enough when dt divides the period.
    period_steps = steps
    if system.omega and math.isclose(round(system.period / config.dt) * config.dt, system.period, rel_tol=1e-12):
        period_steps = max(1, round(system.period / config.dt))
    midpoints = start + (np.arange(min(steps, period_steps)) + 0.5) * dt
    drive_mid = np.zeros(midpoints.size)
    if system.V != 0 and system.drive is not None and cutoff > 0:
        drive_mid = system.V * _drive_values(system.drive, cutoff, system.omega, midpoints)
    lattice_mid = system.lam * system.s * np.cos(system.s * system.omega * midpoints)

    times, theta_samples, p_samples = [start], [theta.copy()], [p.copy()]
    for step in range(steps):
        phase = step % midpoints.size if midpoints.size else 0
        theta += (p - system.alpha) * dt / 2
        kick = np.zeros_like(theta)
        if drive_mid.any():
            kick -= _sawtooth_slope(theta, cutoff) * drive_mid[phase]
        if system.lam != 0:
            kick += np.sin(system.s * theta) * lattice_mid[phase]
        p += kick * dt
        theta += (p - system.alpha) * dt / 2
        if (step + 1) % sample_every == 0:
            times.append(start + (step + 1) * dt)
            theta_samples.append(theta.copy())
            p_samples.append(p.copy())
    return Trajectory(np.array(times), np.array(theta_samples), np.array(p_samples))


def poincare(trajectory: Trajectory, omega: float, alpha: float, initial: np.ndarray | None = None) -> PoincareSection:
    """(Theta, P) = (theta - omega t, p - alpha - omega) at the samples lying on whole drive periods t_n = n 2pi/omega."""
    period = 2 * math.pi / omega
    cycles = trajectory.times / period
    on_period = np.isclose(cycles, np.round(cycles), rtol=0, atol=1e-6)
    periods = np.round(cycles[on_period]).astype(int)
    # omega t_n = 2 pi n, so the rotating angle is the wrapped lab angle
    theta = wrap_angle(trajectory.theta[on_period])
    momentum = trajectory.p[on_period] - alpha - omega
    return PoincareSection(theta, momentum, periods, omega, alpha, np.zeros((0, 2)) if initial is None else initial)


# ========================================================================================================


def fan_initial_conditions(count: int, V: float, omega: float, alpha: float, seed: int, realization: int = 0) -> list[ClassicalState]:
    """P spread evenly over [-0.5, 0.5] sqrt(2V) around the resonance, Theta uniform on the ring."""
    rng = make_rng(seed, "classical", realization)
    thetas = rng.uniform(-math.pi, math.pi, size=count)
    momenta = np.linspace(-0.5, 0.5, count) * math.sqrt(2 * abs(V)) if count > 1 else np.zeros(count)
    return [ClassicalState(float(theta), float(P + alpha + omega), 0.0) for theta, P in zip(thetas, momenta)]


def heff_energy(theta: np.ndarray | float, momentum: np.ndarray | float, spec: EffectiveModelSpec) -> np.ndarray:
    """mu P^2/2 + V sum_k c_k e^{ik Theta} + (lambda/2) cos(s Theta) + omega^2/2."""
    theta = np.asarray(theta, dtype=float)
    momentum = np.asarray(momentum, dtype=float)
    energy = spec.mu * momentum**2 / 2 + spec.omega**2 / 2
    if spec.V != 0 and spec.c is not None:
        energy = energy + potential_on_grid(spec.c, spec.V, theta)
    if spec.lam != 0:
        energy = energy + spec.lam / 2 * np.cos(spec.s * theta)
    return energy


def heff_gradient(theta: np.ndarray | float, momentum: np.ndarray | float, spec: EffectiveModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """(dH/dTheta, dH/dP) of `heff_energy`."""
    theta = np.asarray(theta, dtype=float)
    d_theta = np.zeros_like(theta)
    if spec.V != 0 and spec.c is not None:
        d_theta = d_theta + spec.V * fourier_series_on_grid(1j * spec.c.harmonics * spec.c.values, spec.c.harmonics, theta).real
    if spec.lam != 0:
        d_theta = d_theta - spec.lam * spec.s / 2 * np.sin(spec.s * theta)
    return d_theta, spec.mu * np.asarray(momentum, dtype=float)


def section_energy_spread(section: PoincareSection, spec: EffectiveModelSpec) -> tuple[np.ndarray, float]:
    """Per-trajectory standard deviation of the effective energy along the section, and its mean."""
    energies = heff_energy(section.theta, section.momentum, spec)
    spreads = np.std(energies, axis=0)
    return spreads, float(np.mean(spreads))


def heff_portrait(spec: EffectiveModelSpec, theta_grid: np.ndarray, momentum_grid: np.ndarray) -> np.ndarray:
    """Effective energies on the (P, Theta) mesh, shape (len(momentum_grid), len(theta_grid))."""
    theta_mesh, momentum_mesh = np.meshgrid(np.asarray(theta_grid, dtype=float), np.asarray(momentum_grid, dtype=float))
    return heff_energy(theta_mesh, momentum_mesh, spec)
