"""Qubit-loaded notch resonators on a shared feedline.

Units convention used throughout the package: plain frequencies
(resonator centers, qubit gaps, couplings) are in Hz; linewidths, decay
rates and dispersive shifts are angular (rad/s).  Functions state which
they take.  Flux is in units of the flux quantum.

The flux qubit is modeled by its two-level spectrum

    f_q(flux) = sqrt(gap_delta**2 + eps**2),
    eps = flux_sensitivity * (flux - symmetry_flux)

and each resonator by a notch-type transmission dip

    S21(w) = 1 - (kappa_ext/2) / (i*(w - w_r - shift) + kappa/2)

whose center is pulled by the qubit state.  Far from the qubit-resonator
crossing the pull is the second-order dispersive shift g~^2/Delta * sigma_z;
within a window of the crossing the exact normal-mode frequencies of the
two-level Jaynes-Cummings doublet are substituted instead, so flux sweeps
across the anticrossing stay finite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateDetuningError

# Detuning window (in units of the angular coupling) inside which the
# exact two-level normal modes replace the dispersive formula.
EXACT_WINDOW_G = 5.0

# dispersive_shift refuses detunings below this fraction of the resonator
# frequency; the perturbative formula has diverged long before that.
DEGENERATE_DETUNING_FRACTION = 1e-6


class QubitStateLabel(enum.IntEnum):
    """Qubit energy eigenstate as a sigma_z eigenvalue."""

    GROUND = -1
    EXCITED = +1


@dataclass(frozen=True)
class QubitParams:
    """Flux qubit two-level parameters.

    gap_delta: Hz, minimum splitting at the symmetry point.
    flux_sensitivity: Hz per flux quantum, slope of the energy bias.
    symmetry_flux: flux quantum units, location of the symmetry point.
    relaxation_rate_gamma: rad/s, energy relaxation rate.
    """

    gap_delta: float
    flux_sensitivity: float
    symmetry_flux: float
    relaxation_rate_gamma: float

    def __post_init__(self):
        if self.gap_delta < 0:
            raise ConfigError(f"gap_delta must be >= 0, got {self.gap_delta}")
        if self.relaxation_rate_gamma < 0:
            raise ConfigError(
                f"relaxation_rate_gamma must be >= 0, got {self.relaxation_rate_gamma}"
            )


@dataclass(frozen=True)
class ResonatorParams:
    """Notch resonator parameters.

    bare_frequency: Hz.  total_linewidth_kappa, external_linewidth and
    coupling_g (qubit-resonator coupling): rad/s, with 0 < external <=
    total.
    """

    bare_frequency: float
    total_linewidth_kappa: float
    external_linewidth: float
    coupling_g: float

    def __post_init__(self):
        if self.bare_frequency <= 0:
            raise ConfigError(f"bare_frequency must be > 0, got {self.bare_frequency}")
        if self.total_linewidth_kappa <= 0:
            raise ConfigError(
                f"total_linewidth_kappa must be > 0, got {self.total_linewidth_kappa}"
            )
        if not 0 < self.external_linewidth <= self.total_linewidth_kappa:
            raise ConfigError(
                "external_linewidth must satisfy 0 < ext <= kappa, got "
                f"ext={self.external_linewidth}, kappa={self.total_linewidth_kappa}"
            )
        if self.coupling_g < 0:
            raise ConfigError(f"coupling_g must be >= 0, got {self.coupling_g}")


@dataclass(frozen=True)
class DeviceRecord:
    """One qubit-resonator pair hanging off the shared feedline."""

    device_id: int
    qubit: QubitParams
    resonator: ResonatorParams


@dataclass(frozen=True)
class Chip:
    """Ordered collection of devices sharing one feedline."""

    name: str
    devices: tuple[DeviceRecord, ...]

    def __post_init__(self):
        ids = [d.device_id for d in self.devices]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate device ids in chip {self.name!r}: {ids}")

    def device(self, device_id: int) -> DeviceRecord:
        for d in self.devices:
            if d.device_id == device_id:
                return d
        from .errors import UnknownDeviceError

        raise UnknownDeviceError(f"no device {device_id} on chip {self.name!r}")

    @property
    def device_ids(self) -> tuple[int, ...]:
        return tuple(d.device_id for d in self.devices)


def qubit_frequency(qubit: QubitParams, flux):
    """Transition frequency in Hz at the given applied flux (flux quanta).

    Even in flux about the symmetry point and never below gap_delta.
    Accepts scalars or arrays.
    """
    eps = qubit.flux_sensitivity * (np.asarray(flux, dtype=float) - qubit.symmetry_flux)
    f = np.hypot(qubit.gap_delta, eps)
    return float(f) if np.isscalar(flux) else f


def dispersive_shift(resonator: ResonatorParams, omega_q: float, state: float) -> float:
    """Second-order dispersive pull of the resonator, rad/s.

    omega_q is the angular qubit frequency; state is the sigma_z value
    (+1 excited, -1 ground; intermediate values represent ensemble
    averages and scale the shift linearly).

    Raises DegenerateDetuningError when the qubit-resonator detuning is
    below 1e-6 of the resonator frequency, where the perturbative
    formula is meaningless.
    """
    omega_r = 2 * math.pi * resonator.bare_frequency
    detuning = omega_q - omega_r
    if abs(detuning) < DEGENERATE_DETUNING_FRACTION * omega_r:
        raise DegenerateDetuningError(
            f"|omega_q - omega_r| = {abs(detuning):.3e} rad/s is below "
            f"{DEGENERATE_DETUNING_FRACTION:g} of the resonator frequency"
        )
    g = resonator.coupling_g
    return g * g / detuning * state


def exact_state_shift(resonator: ResonatorParams, omega_q: float, state: float) -> float:
    """Resonator pull from the exact two-level normal modes, rad/s.

    Diagonalizing the one-excitation doublet gives modes at
    (w_r + w_q)/2 +- sqrt(detuning^2 + 4 g~^2)/2.  The branch with
    predominant resonator character sits sqrt(..)/2 - |detuning|/2 away
    from the bare frequency, on the side away from the qubit.  The pull
    is odd in sigma_z and reduces to g~^2/detuning far from the crossing.
    At zero detuning the two states map onto the vacuum-Rabi doublet
    w_r -+ g~ (ground state on the lower branch by convention).
    """
    omega_r = 2 * math.pi * resonator.bare_frequency
    detuning = omega_q - omega_r
    magnitude = 0.5 * (math.hypot(detuning, 2 * resonator.coupling_g) - abs(detuning))
    sign = 1.0 if detuning >= 0 else -1.0
    return state * sign * magnitude


def state_dependent_shift(resonator: ResonatorParams, omega_q: float, state: float) -> float:
    """Resonator pull used by the feedline model, rad/s.

    Dispersive formula outside EXACT_WINDOW_G angular couplings of the
    crossing, exact normal-mode substitution inside it.  Zero coupling
    gives zero shift regardless of detuning.
    """
    g = resonator.coupling_g
    if g == 0.0:
        return 0.0
    omega_r = 2 * math.pi * resonator.bare_frequency
    detuning = omega_q - omega_r
    if abs(detuning) < EXACT_WINDOW_G * g:
        return exact_state_shift(resonator, omega_q, state)
    return dispersive_shift(resonator, omega_q, state)


def s21_single(resonator: ResonatorParams, probe_omega, shift: float = 0.0):
    """Complex notch transmission at angular probe frequency probe_omega.

    shift (rad/s) displaces the resonance from its bare position.
    Accepts scalar or array probe_omega; |S21| <= 1 everywhere.
    """
    omega_r = 2 * math.pi * resonator.bare_frequency
    kappa = resonator.total_linewidth_kappa
    ext = resonator.external_linewidth
    delta = np.asarray(probe_omega, dtype=float) - omega_r - shift
    s = 1.0 - (ext / 2.0) / (1j * delta + kappa / 2.0)
    return complex(s) if np.isscalar(probe_omega) else s


def s21_feedline(chip: Chip, probe_omega, states: Sequence[float], fluxes) -> np.ndarray | complex:
    """Composite feedline transmission: product of all device notches.

    states: one sigma_z value per device, in chip order.
    fluxes: one applied flux per device, or a single scalar applied to all.
    Each device's resonance is pulled by its own state-dependent shift.
    With all couplings zero the result is flux-independent.
    """
    n = len(chip.devices)
    if len(states) != n:
        raise ConfigError(f"expected {n} states, got {len(states)}")
    flux_arr = np.broadcast_to(np.asarray(fluxes, dtype=float), (n,))
    s = np.ones_like(np.asarray(probe_omega, dtype=float), dtype=complex)
    for dev, state, flux in zip(chip.devices, states, flux_arr):
        omega_q = 2 * math.pi * qubit_frequency(dev.qubit, float(flux))
        shift = state_dependent_shift(dev.resonator, omega_q, float(state))
        s = s * s21_single(dev.resonator, probe_omega, shift)
    return complex(s) if np.isscalar(probe_omega) else s


def dressed_resonance(dev: DeviceRecord, flux: float, state: float = QubitStateLabel.GROUND) -> float:
    """State-pulled resonator center in Hz at the given applied flux."""
    omega_q = 2 * math.pi * qubit_frequency(dev.qubit, flux)
    shift = state_dependent_shift(dev.resonator, omega_q, float(state))
    return dev.resonator.bare_frequency + shift / (2 * math.pi)
