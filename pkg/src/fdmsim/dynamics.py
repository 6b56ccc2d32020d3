"""Two-level dynamics in the drive rotating frame.

Bloch equations with drive along x, detuning delta and rates in rad/s:

    dx/dt = -delta * y - G2 * x
    dy/dt = +delta * x - W * z - G2 * y
    dz/dt = +W * y - gamma * (z + 1)

where W = 2*pi * rabi_rate_per_unit_amplitude * amplitude,
G2 = gamma/2 + gamma_phi, and relaxation drives z toward -1 (ground).
From the ground state on resonance this gives the excited population
P_e(t) = sin^2(pi * f_rabi * t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StepSizeError
from .seeding import derive_rng

# Largest allowed (rate * step) product for a single integrator step.
MAX_STEP_PRODUCT = 0.1


@dataclass(frozen=True)
class BlochState:
    """Bloch vector; |r| may not exceed 1 (beyond numerical slack)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if norm > 1 + 1e-9:
            raise ConfigError(f"Bloch vector norm {norm} exceeds 1")

    @property
    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    @property
    def excited_population(self) -> float:
        return 0.5 * (1.0 + self.z)


GROUND = BlochState(0.0, 0.0, -1.0)


@dataclass(frozen=True)
class DriveSpec:
    """Resonant-frame drive: rabi_rate_per_unit_amplitude (Hz per unit
    drive amplitude), amplitude (dimensionless), detuning (Hz, drive
    minus qubit), duration (s)."""

    rabi_rate_per_unit_amplitude: float
    amplitude: float
    detuning: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.rabi_rate_per_unit_amplitude < 0:
            raise ConfigError(
                f"rabi_rate_per_unit_amplitude must be >= 0, got {self.rabi_rate_per_unit_amplitude}"
            )
        if self.amplitude < 0:
            raise ConfigError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.duration < 0:
            raise ConfigError(f"duration must be >= 0, got {self.duration}")


def rabi_frequency(drive: DriveSpec) -> float:
    """Generalized Rabi frequency in Hz: hypot(rate * amplitude, detuning).

    Linear in drive amplitude on resonance.
    """
    return math.hypot(drive.rabi_rate_per_unit_amplitude * drive.amplitude, drive.detuning)


def _derivative(state, omega, delta, gamma, g2):
    x, y, z = state
    return (
        -delta * y - g2 * x,
        delta * x - omega * z - g2 * y,
        omega * y - gamma * (z + 1.0),
    )


def evolve(
    state: BlochState,
    drive: DriveSpec,
    gamma: float,
    gamma_phi: float,
    dt: float,
) -> BlochState:
    """One classical Runge-Kutta (4th order) step of length dt seconds.

    gamma: energy relaxation rate (rad/s); gamma_phi: pure dephasing
    (rad/s).  Rejects steps with dt * (2*pi*f_rabi + gamma) >
    MAX_STEP_PRODUCT, where the local error is no longer negligible.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    if gamma < 0 or gamma_phi < 0:
        raise ConfigError("decoherence rates must be >= 0")
    omega_total = 2 * math.pi * rabi_frequency(drive)
    if dt * (omega_total + gamma) > MAX_STEP_PRODUCT:
        raise StepSizeError(
            f"dt * (Omega + gamma) = {dt * (omega_total + gamma):.3g} exceeds "
            f"{MAX_STEP_PRODUCT}; reduce the step"
        )
    omega = 2 * math.pi * drive.rabi_rate_per_unit_amplitude * drive.amplitude
    delta = 2 * math.pi * drive.detuning
    g2 = gamma / 2.0 + gamma_phi

    s0 = (state.x, state.y, state.z)
    k1 = _derivative(s0, omega, delta, gamma, g2)
    s1 = tuple(s + 0.5 * dt * k for s, k in zip(s0, k1))
    k2 = _derivative(s1, omega, delta, gamma, g2)
    s2 = tuple(s + 0.5 * dt * k for s, k in zip(s0, k2))
    k3 = _derivative(s2, omega, delta, gamma, g2)
    s3 = tuple(s + dt * k for s, k in zip(s0, k3))
    k4 = _derivative(s3, omega, delta, gamma, g2)
    out = tuple(
        s + dt / 6.0 * (a + 2 * b + 2 * c + d)
        for s, a, b, c, d in zip(s0, k1, k2, k3, k4)
    )
    return BlochState(*out)


def evolve_for(
    state: BlochState,
    drive: DriveSpec,
    gamma: float,
    gamma_phi: float,
    duration: float,
    rel_step: float = 0.02,
) -> BlochState:
    """Integrate for a total duration, subdividing into compliant steps.

    rel_step sets the per-step (rate * dt) product; 0.02 keeps the
    accumulated error below ~1e-8 per Rabi period.
    """
    if duration < 0:
        raise ConfigError(f"duration must be >= 0, got {duration}")
    if duration == 0:
        return state
    if not 0 < rel_step <= MAX_STEP_PRODUCT:
        raise ConfigError(f"rel_step must lie in (0, {MAX_STEP_PRODUCT}]")
    rate = 2 * math.pi * rabi_frequency(drive) + gamma + gamma_phi
    n_steps = max(1, math.ceil(duration * rate / rel_step))
    dt = duration / n_steps
    for _ in range(n_steps):
        state = evolve(state, drive, gamma, gamma_phi, dt)
    return state


def steady_state_excited(drive: DriveSpec, gamma: float, gamma_phi: float) -> float:
    """Steady-state excited population under continuous drive.

    Saturation solution of the Bloch equations:

        P_e = (s/2) / (1 + (delta/G2)^2 + s),   s = W^2 / (gamma * G2)

    with W the resonant Rabi rate and G2 = gamma/2 + gamma_phi.  Requires
    gamma > 0 (without relaxation there is no steady state).
    """
    if gamma <= 0:
        raise ConfigError("steady state requires gamma > 0")
    g2 = gamma / 2.0 + gamma_phi
    omega = 2 * math.pi * drive.rabi_rate_per_unit_amplitude * drive.amplitude
    delta = 2 * math.pi * drive.detuning
    s = omega * omega / (gamma * g2)
    return 0.5 * s / (1.0 + (delta / g2) ** 2 + s)


@dataclass(frozen=True)
class TelegraphSpectrum:
    """Averaged spectrum of a telegraph-modulated carrier.

    frequencies: Hz, one-sided (power at +-f folded together).
    power: normalized to unit total.
    carson_bandwidth: rad/s, full width 2*(shift + 2*gamma).
    out_of_band_fraction: spectral power outside |f| <= carson/2.
    """

    frequencies: np.ndarray
    power: np.ndarray
    carson_bandwidth: float
    out_of_band_fraction: float
    n_trajectories: int


def relaxation_telegraph_spectrum(
    gamma: float,
    shift: float,
    duration: float,
    n_trajectories: int,
    seed: int = 0,
    sample_rate: float | None = None,
) -> TelegraphSpectrum:
    """Monte-Carlo spectrum of a carrier frequency-modulated by qubit jumps.

    The resonator frequency hops by 2*shift (rad/s) whenever the qubit
    state flips.  Flip times are Poisson with rate gamma/2 per trajectory,
    so the state autocorrelation decays at the energy relaxation rate
    gamma; initial states are drawn +-1 with equal probability.  Each
    trajectory contributes |FFT(exp(i*phi(t)))|^2 with
    phi(t) = integral of sigma_z(t') * shift dt'.

    Returns the folded one-sided spectrum and the fraction of power
    outside the Carson band of full width 2*(shift + 2*gamma) centered on
    the carrier.
    """
    if gamma <= 0:
        raise ConfigError(f"gamma must be > 0, got {gamma}")
    if shift < 0:
        raise ConfigError(f"shift must be >= 0, got {shift}")
    if n_trajectories < 1:
        raise ConfigError("need at least one trajectory")
    half_width_hz = (shift + 2 * gamma) / (2 * math.pi)
    if sample_rate is None:
        sample_rate = 16.0 * max(half_width_hz, 1.0 / duration)
    n = int(round(duration * sample_rate))
    if n < 16:
        raise ConfigError("duration too short for the requested resolution")
    dt = 1.0 / sample_rate

    rng = derive_rng(seed)
    flip_rate = gamma / 2.0
    psd = np.zeros(n)
    chunk = max(1, min(n_trajectories, 2_000_000 // n))
    remaining = n_trajectories
    while remaining > 0:
        m = min(chunk, remaining)
        # Parity of Poisson flip counts gives the exact state on the grid.
        counts = rng.poisson(flip_rate * dt, size=(m, n))
        start = rng.choice((-1.0, 1.0), size=(m, 1))
        sigma = start * (1.0 - 2.0 * (np.cumsum(counts, axis=1) % 2))
        phase = np.cumsum(sigma, axis=1) * (shift * dt)
        signal = np.exp(1j * phase)
        psd += np.sum(np.abs(np.fft.fft(signal, axis=1)) ** 2, axis=0)
        remaining -= m
    psd /= psd.sum()

    freqs = np.fft.fftfreq(n, d=dt)
    in_band = np.abs(freqs) <= half_width_hz
    out_fraction = float(1.0 - psd[in_band].sum())

    # Fold bin -j onto bin +j (bin n/2 of an even-length FFT is its own mirror).
    half = n // 2
    f_one = np.arange(half + 1) * (sample_rate / n)
    p_one = np.zeros(half + 1)
    p_one[0] = psd[0]
    j = np.arange(1, half + 1)
    mirror = n - j
    p_one[1:] = psd[j] + psd[mirror] * (mirror != j)
    return TelegraphSpectrum(
        frequencies=f_one,
        power=p_one,
        carson_bandwidth=2.0 * (shift + 2.0 * gamma),
        out_of_band_fraction=out_fraction,
        n_trajectories=n_trajectories,
    )
