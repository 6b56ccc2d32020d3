"""Canned experiments: flux sweeps, spectroscopy, Rabi readout.

Each experiment returns a SweepResult, a small table container with one
independent axis, named per-device (or composite) columns, and metadata
that rides along into the CSV/JSON writers.  Output files are
deterministic: same chip, same seed, byte-identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.optimize
import scipy.signal

from .device import Chip, QubitStateLabel, dressed_resonance, s21_feedline
from .dynamics import GROUND, BlochState, DriveSpec, evolve_for, rabi_frequency
from .errors import ConfigError, UnknownDeviceError
from .rxchain import (
    AdcSpec,
    ToneMeasurement,
    add_awgn,
    adc_quantize,
    apply_feedline,
    channelize,
    downconvert,
)
from .seeding import child_seed
from .txchain import IQTrace, ToneSpec, synthesize_multitone, upconvert_ssb

CSV_FORMAT_TAG = "fdmsim-sweep-v1"


@dataclass
class SweepResult:
    """One independent axis, several named tables of shape (n_axis, n_columns)."""

    kind: str
    axis_name: str
    axis_values: np.ndarray
    columns: tuple[str, ...]
    tables: dict[str, np.ndarray]
    device_ids: tuple[int, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_values = np.asarray(self.axis_values, dtype=float)
        if self.axis_values.ndim != 1 or self.axis_values.size == 0:
            raise ConfigError("axis_values must be a non-empty 1-d array")
        shape = (self.axis_values.size, len(self.columns))
        for name, table in self.tables.items():
            table = np.asarray(table, dtype=float)
            if table.shape != shape:
                raise ConfigError(
                    f"table {name!r} has shape {table.shape}, expected {shape}"
                )
            self.tables[name] = table

    def column(self, table: str, label: str | int) -> np.ndarray:
        """One column as a 1-d array; an int label means a device id."""
        if isinstance(label, int):
            label = f"dev{label}"
        try:
            j = self.columns.index(label)
        except ValueError:
            raise ConfigError(f"no column {label!r}; have {self.columns}") from None
        return self.tables[table][:, j]


# ---------------------------------------------------------------------------
# multiplexed acquisition


@dataclass(frozen=True)
class ReadoutSetup:
    """Frozen front-end configuration for multiplexed acquisition.

    Channel baseband frequencies sit on the acquisition DFT grid
    (sample_rate / n_samples), so bin-centered channelization is exact.
    """

    device_ids: tuple[int, ...]
    lo_frequency: float
    baseband_frequencies: tuple[float, ...]
    sample_rate: float = 1e9
    n_samples: int = 4000
    amplitude: float = 0.1
    window: str = "rectangular"

    @property
    def channel_frequencies(self) -> tuple[float, ...]:
        return tuple(self.lo_frequency + f for f in self.baseband_frequencies)


def make_readout_setup(
    chip: Chip,
    device_ids: Sequence[int] | None = None,
    *,
    lo_frequency: float | None = None,
    sample_rate: float = 1e9,
    n_samples: int = 4000,
    amplitude: float = 0.1,
    window: str = "rectangular",
) -> ReadoutSetup:
    """Probe tones at each device's ground-state dressed resonance.

    Each qubit is taken at its own symmetry flux.  The default LO is the
    mean channel frequency snapped to the DFT grid; channels are then
    snapped to LO + k * grid (a shift of at most half a bin, well inside
    any practical linewidth).
    """
    if device_ids is None:
        device_ids = chip.device_ids
    device_ids = tuple(int(d) for d in device_ids)
    if not device_ids:
        raise ConfigError("need at least one device to read out")
    targets = {}
    for dev_id in device_ids:
        dev = chip.device(dev_id)
        targets[dev_id] = dressed_resonance(dev, dev.qubit.symmetry_flux)
    grid = sample_rate / n_samples
    if lo_frequency is None:
        lo_frequency = grid * round(float(np.mean(list(targets.values()))) / grid)
    baseband = tuple(
        grid * round((targets[d] - lo_frequency) / grid) for d in device_ids
    )
    span = max(abs(f) for f in baseband)
    if span > sample_rate / 2:
        raise ConfigError(
            f"channels span {span:.6g} Hz from the LO, beyond Nyquist "
            f"{sample_rate / 2:.6g} Hz; raise sample_rate or move the LO"
        )
    return ReadoutSetup(
        device_ids=device_ids,
        lo_frequency=float(lo_frequency),
        baseband_frequencies=baseband,
        sample_rate=sample_rate,
        n_samples=n_samples,
        amplitude=amplitude,
        window=window,
    )


def _probe_trace(setup: ReadoutSetup) -> IQTrace:
    tones = [
        ToneSpec(baseband_frequency=f, amplitude=setup.amplitude)
        for f in setup.baseband_frequencies
    ]
    baseband = synthesize_multitone(tones, setup.n_samples, setup.sample_rate)
    return upconvert_ssb(baseband, setup.lo_frequency)


def acquire(
    chip: Chip,
    setup: ReadoutSetup,
    states: Sequence[float],
    fluxes,
    *,
    adc: AdcSpec | None = None,
    noise_std: float = 0.0,
    seed: int = 0,
    probe: IQTrace | None = None,
) -> list[ToneMeasurement]:
    """One multiplexed shot: synthesize, feedline, receive, channelize.

    states and fluxes describe every device on the chip (chip order);
    fluxes may be a scalar.  probe allows reusing the synthesized trace
    across repeated shots with identical setup.
    """
    if probe is None:
        probe = _probe_trace(setup)
    rf = apply_feedline(probe, chip, states, fluxes)
    rx = downconvert(rf, setup.lo_frequency)
    if noise_std > 0 and adc is None:
        rx = add_awgn(rx, noise_std, seed)
    if adc is not None:
        rx = adc_quantize(rx, adc, noise_std=noise_std, seed=seed)
    return channelize(rx, setup.baseband_frequencies, window=setup.window)


# ---------------------------------------------------------------------------
# flux sweep


def run_flux_sweep(
    chip: Chip,
    flux_values,
    *,
    device_ids: Sequence[int] | None = None,
    setup: ReadoutSetup | None = None,
    states: Sequence[float] | None = None,
    adc: AdcSpec | None = None,
    noise_std: float = 0.0,
    seed: int = 0,
    config_hash: str | None = None,
) -> SweepResult:
    """Sweep a common applied flux and record every channel's response.

    The probe comb stays fixed at the symmetry-point channels while the
    sweep moves each qubit through its resonator crossing, where the
    level repulsion throws the notch off the probe and the channel
    amplitude rises toward unity.  Each sweep point draws its noise from
    an independent child stream of `seed`.
    """
    flux_values = np.asarray(flux_values, dtype=float)
    if flux_values.ndim != 1 or flux_values.size == 0:
        raise ConfigError("flux_values must be a non-empty 1-d array")
    if setup is None:
        setup = make_readout_setup(chip, device_ids)
    if states is None:
        states = [float(QubitStateLabel.GROUND)] * len(chip.devices)
    probe = _probe_trace(setup)
    n_ch = len(setup.device_ids)
    amp = np.empty((flux_values.size, n_ch))
    phase = np.empty_like(amp)
    for i, flux in enumerate(flux_values):
        meas = acquire(
            chip, setup, states, float(flux),
            adc=adc, noise_std=noise_std, seed=child_seed(seed, i), probe=probe,
        )
        amp[i] = [m.amplitude for m in meas]
        phase[i] = [m.phase for m in meas]
    metadata = {
        "kind": "flux_sweep",
        "seed": seed,
        "noise_std": noise_std,
        "lo_frequency_hz": setup.lo_frequency,
        "sample_rate_hz": setup.sample_rate,
        "n_samples": setup.n_samples,
        "probe_amplitude": setup.amplitude,
        "window": setup.window,
        "chip": chip.name,
        "device_ids": " ".join(str(d) for d in setup.device_ids),
    }
    if adc is not None:
        metadata["adc_bits"] = adc.bits
        metadata["adc_full_scale"] = adc.full_scale
    if config_hash is not None:
        metadata["config_hash"] = config_hash
    return SweepResult(
        kind="flux_sweep",
        axis_name="flux_phi0",
        axis_values=flux_values,
        columns=tuple(f"dev{d}" for d in setup.device_ids),
        tables={"amplitude": amp, "phase": phase},
        device_ids=setup.device_ids,
        metadata=metadata,
    )


def detect_flux_features(
    result: SweepResult,
    *,
    table: str = "amplitude",
    prominence: float = 0.3,
) -> dict[int, np.ndarray]:
    """Flux values where each channel's response peaks.

    Peaks in channel amplitude mark qubit-resonator crossings (the notch
    is repelled off the probe, lifting the channel toward full
    transmission).  prominence is a fraction of each column's full range,
    so detection is independent of probe drive units.  Flat-topped peaks
    report their midpoints.  Returns {device_id: sorted flux values}.
    """
    if table not in result.tables:
        raise ConfigError(f"result has no table {table!r}")
    if not result.device_ids:
        raise ConfigError("result carries no device ids")
    if not 0 < prominence < 1:
        raise ConfigError(f"prominence must lie in (0, 1), got {prominence}")
    features = {}
    for j, dev_id in enumerate(result.device_ids):
        y = result.tables[table][:, j]
        span = float(y.max() - y.min())
        if span == 0.0:
            features[dev_id] = result.axis_values[:0]
            continue
        peaks, _ = scipy.signal.find_peaks(y, prominence=prominence * span)
        features[dev_id] = result.axis_values[peaks]
    return features


# ---------------------------------------------------------------------------
# spectroscopy


def run_spectroscopy(
    chip: Chip,
    probe_frequencies,
    *,
    states: Sequence[float] | None = None,
    fluxes=None,
    config_hash: str | None = None,
) -> SweepResult:
    """Feedline transmission versus probe frequency, evaluated directly.

    No SDR chain: each grid point is the closed-form composite S21 for
    the frozen states and fluxes (defaults: all ground, each qubit at its
    own symmetry flux).
    """
    probe_frequencies = np.asarray(probe_frequencies, dtype=float)
    if probe_frequencies.ndim != 1 or probe_frequencies.size == 0:
        raise ConfigError("probe_frequencies must be a non-empty 1-d array")
    if states is None:
        states = [float(QubitStateLabel.GROUND)] * len(chip.devices)
    if fluxes is None:
        fluxes = [d.qubit.symmetry_flux for d in chip.devices]
    s21 = s21_feedline(chip, 2 * np.pi * probe_frequencies, states, fluxes)
    metadata = {
        "kind": "spectroscopy",
        "chip": chip.name,
        "states": " ".join(repr(float(s)) for s in states),
    }
    if config_hash is not None:
        metadata["config_hash"] = config_hash
    return SweepResult(
        kind="spectroscopy",
        axis_name="probe_hz",
        axis_values=probe_frequencies,
        columns=("feedline",),
        tables={
            "s21_amplitude": np.abs(s21)[:, None],
            "s21_phase": np.angle(s21)[:, None],
        },
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# Rabi


def run_rabi(
    chip: Chip,
    durations,
    *,
    device_ids: Sequence[int] | None = None,
    rabi_rate_per_unit_amplitude: float = 5e6,
    amplitude_scales: Sequence[float] | None = None,
    detuning: float = 0.0,
    gamma: float | None = None,
    gamma_phi: float = 0.0,
    rel_step: float = 0.02,
    readout: bool = True,
    setup: ReadoutSetup | None = None,
    adc: AdcSpec | None = None,
    noise_std: float = 0.0,
    seed: int = 0,
    config_hash: str | None = None,
) -> SweepResult:
    """Drive each qubit for a grid of durations and read the result out.

    Every selected device starts in the ground state and is driven
    resonantly (or at the given detuning, Hz) with its own drive
    amplitude amplitude_scales[j]; the Rabi rate is
    rabi_rate_per_unit_amplitude * scale, in Hz per unit amplitude.
    Populations come from Bloch integration carried incrementally from
    one duration to the next, so durations must be non-negative and
    strictly increasing.

    gamma overrides every device's relaxation rate (rad/s) when given;
    gamma=0 yields the ideal P_e = sin^2(pi * f_rabi * t).

    With readout=True each duration is pushed through the full
    multiplexed chain, with the feedline evaluated at the instantaneous
    Bloch z of each qubit (the resonator adiabatically tracks the mean
    qubit polarization, valid for shifts well inside the linewidth).
    Unselected chip devices stay in the ground state.
    """
    durations = np.asarray(durations, dtype=float)
    if durations.ndim != 1 or durations.size == 0:
        raise ConfigError("durations must be a non-empty 1-d array")
    if durations[0] < 0 or np.any(np.diff(durations) <= 0):
        raise ConfigError("durations must be non-negative and strictly increasing")
    if setup is None:
        setup = make_readout_setup(chip, device_ids)
    elif device_ids is not None and tuple(device_ids) != setup.device_ids:
        raise ConfigError("device_ids disagrees with the supplied setup")
    ids = setup.device_ids
    if amplitude_scales is None:
        amplitude_scales = [1.0] * len(ids)
    if len(amplitude_scales) != len(ids):
        raise ConfigError(
            f"got {len(amplitude_scales)} amplitude scales for {len(ids)} devices"
        )

    z = np.empty((durations.size, len(ids)))
    rabi_hz = []
    for j, dev_id in enumerate(ids):
        dev = chip.device(dev_id)
        g = dev.qubit.relaxation_rate_gamma if gamma is None else float(gamma)
        drive = DriveSpec(
            rabi_rate_per_unit_amplitude=rabi_rate_per_unit_amplitude,
            amplitude=float(amplitude_scales[j]),
            detuning=detuning,
        )
        rabi_hz.append(rabi_frequency(drive))
        state = GROUND
        prev = 0.0
        for i, t in enumerate(durations):
            state = evolve_for(state, drive, g, gamma_phi, t - prev, rel_step=rel_step)
            prev = t
            z[i, j] = state.z

    tables = {"excited_population": (z + 1.0) / 2.0}
    if readout:
        ground = {d.device_id: float(QubitStateLabel.GROUND) for d in chip.devices}
        fluxes = [d.qubit.symmetry_flux for d in chip.devices]
        probe = _probe_trace(setup)
        amp = np.empty_like(z)
        phase = np.empty_like(z)
        for i in range(durations.size):
            states = dict(ground)
            for j, dev_id in enumerate(ids):
                states[dev_id] = z[i, j]
            state_list = [states[d.device_id] for d in chip.devices]
            meas = acquire(
                chip, setup, state_list, fluxes,
                adc=adc, noise_std=noise_std, seed=child_seed(seed, i), probe=probe,
            )
            amp[i] = [m.amplitude for m in meas]
            phase[i] = [m.phase for m in meas]
        tables["iq_amplitude"] = amp
        tables["iq_phase"] = phase

    metadata = {
        "kind": "rabi",
        "seed": seed,
        "noise_std": noise_std,
        "chip": chip.name,
        "device_ids": " ".join(str(d) for d in ids),
        "rabi_rate_per_unit_amplitude_hz": rabi_rate_per_unit_amplitude,
        "amplitude_scales": " ".join(repr(float(a)) for a in amplitude_scales),
        "detuning_hz": detuning,
        "rabi_frequencies_hz": " ".join(repr(float(f)) for f in rabi_hz),
        "readout": int(readout),
    }
    if config_hash is not None:
        metadata["config_hash"] = config_hash
    return SweepResult(
        kind="rabi",
        axis_name="duration_s",
        axis_values=durations,
        columns=tuple(f"dev{d}" for d in ids),
        tables=tables,
        device_ids=ids,
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# damped-sinusoid fitting


@dataclass(frozen=True)
class DampedSinusoidFit:
    """y(t) = offset + amplitude * exp(-decay_rate t) * cos(2 pi frequency t + phase)"""

    frequency: float
    decay_rate: float
    amplitude: float
    phase: float
    offset: float
    r_squared: float
    valid: bool

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.offset + self.amplitude * np.exp(-self.decay_rate * t) * np.cos(
            2 * np.pi * self.frequency * t + self.phase
        )


def _sinusoid_model(t, amplitude, decay_rate, frequency, phase, offset):
    return offset + amplitude * np.exp(-decay_rate * t) * np.cos(
        2 * np.pi * frequency * t + phase
    )


def fit_damped_sinusoid(times, values) -> DampedSinusoidFit:
    """Least-squares damped-cosine fit with a DFT-seeded start.

    The start frequency is the largest non-DC DFT magnitude (first such
    bin on ties, i.e. the lowest frequency).  Requires a uniform time
    grid of at least 8 points.  Never raises on fit failure: falls back
    to the seed parameters with valid=False, so batch callers can fit
    many traces and inspect the flags afterwards.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != y.shape or t.size < 8:
        raise ConfigError("need matching 1-d arrays of at least 8 samples")
    dt = np.diff(t)
    if dt.min() <= 0 or (dt.max() - dt.min()) > 1e-6 * dt.mean():
        raise ConfigError("time grid must be uniform and increasing")
    step = float(dt.mean())
    n = t.size

    offset0 = float(y.mean())
    resid = y - offset0
    spectrum = np.fft.rfft(resid)
    k = 1 + int(np.argmax(np.abs(spectrum[1:])))
    freq0 = k / (n * step)
    amp0 = 2.0 * abs(spectrum[k]) / n
    phase0 = float(np.angle(spectrum[k]) - 2 * np.pi * freq0 * t[0])
    phase0 = math.remainder(phase0, 2 * math.pi)
    half = n // 2
    rms1 = float(np.sqrt(np.mean(resid[:half] ** 2)))
    rms2 = float(np.sqrt(np.mean(resid[half:] ** 2)))
    span = t[-1] - t[0]
    decay0 = 2.0 / span * math.log(rms1 / rms2) if rms1 > 0 and rms2 > 0 else 0.0
    decay0 = min(max(decay0, 0.0), 10.0 / span)

    p0 = [max(amp0, 1e-12), decay0, freq0, phase0, offset0]
    bounds = (
        [0.0, 0.0, 0.0, -2 * np.pi, -np.inf],
        [np.inf, np.inf, 0.5 / step, 2 * np.pi, np.inf],
    )
    valid = True
    try:
        popt, _ = scipy.optimize.curve_fit(
            _sinusoid_model, t, y, p0=p0, bounds=bounds, maxfev=20000
        )
    except (RuntimeError, ValueError):
        popt = p0
        valid = False
    model = _sinusoid_model(t, *popt)
    ss_res = float(np.sum((y - model) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # constant traces leave ss_tot at rounding-noise level, not exactly 0
    floor = y.size * (1e-12 * max(float(np.max(np.abs(y))), 1e-30)) ** 2
    if ss_tot > floor:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res <= floor else 0.0
    return DampedSinusoidFit(
        frequency=float(popt[2]),
        decay_rate=float(popt[1]),
        amplitude=float(popt[0]),
        phase=float(popt[3]),
        offset=float(popt[4]),
        r_squared=r2,
        valid=valid,
    )


# ---------------------------------------------------------------------------
# serialization


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return repr(int(v))
    return str(v)


def _csv_columns(result: SweepResult) -> list[tuple[str, str]]:
    return [
        (table, col)
        for table in sorted(result.tables)
        for col in result.columns
    ]


def _csv_header_lines(result: SweepResult) -> list[str]:
    lines = [f"# {CSV_FORMAT_TAG}"]
    for key in sorted(result.metadata):
        lines.append(f"# {key}={_format_value(result.metadata[key])}")
    names = [result.axis_name] + [f"{t}_{c}" for t, c in _csv_columns(result)]
    lines.append(",".join(names))
    return lines


def _csv_data_lines(result: SweepResult) -> list[str]:
    cols = _csv_columns(result)
    lines = []
    for i, x in enumerate(result.axis_values):
        cells = [repr(float(x))]
        for table, col in cols:
            j = result.columns.index(col)
            cells.append(repr(float(result.tables[table][i, j])))
        lines.append(",".join(cells))
    return lines


def write_sweep_csv(path: str | Path, result: SweepResult, append: bool = False) -> None:
    """Write a sweep as CSV with '#' metadata header lines.

    Floats are serialized with repr() so re-runs are byte-identical.
    With append=True and an existing file, the new rows must come from
    the same configuration: the file's config_hash header is compared
    against result.metadata['config_hash'] and a mismatch is refused.
    """
    path = Path(path)
    if append and path.exists():
        existing = _read_header_metadata(path)
        ours = result.metadata.get("config_hash")
        theirs = existing.get("config_hash")
        if ours is None or theirs is None or str(ours) != str(theirs):
            raise ConfigError(
                f"refusing to append to {path}: config_hash "
                f"{theirs!r} does not match {ours!r}"
            )
        body = "\n".join(_csv_data_lines(result)) + "\n"
        with open(path, "a", newline="\n") as fh:
            fh.write(body)
        return
    lines = _csv_header_lines(result) + _csv_data_lines(result)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_header_metadata(path: Path) -> dict[str, str]:
    metadata = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            text = line[1:].strip()
            if "=" in text:
                key, _, value = text.partition("=")
                metadata[key.strip()] = value.strip()
    return metadata


def read_sweep_csv(path: str | Path) -> SweepResult:
    """Inverse of write_sweep_csv (metadata comes back as strings)."""
    path = Path(path)
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                text = line[1:].strip()
                if "=" in text:
                    key, _, value = text.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(c) for c in line.split(",")])
    if header is None or not rows:
        raise ConfigError(f"{path} holds no sweep data")
    data = np.array(rows)
    axis_name = header[0]
    kind = metadata.get("kind", "unknown")
    device_ids = tuple(
        int(tok) for tok in metadata.get("device_ids", "").split() if tok
    )
    # Column names are table_column; recover both by matching known columns.
    if device_ids:
        columns = tuple(f"dev{d}" for d in device_ids)
    else:
        columns = (header[1].rpartition("_")[2],)
    tables: dict[str, np.ndarray] = {}
    n_cols = len(columns)
    for block in range((len(header) - 1) // n_cols):
        first = header[1 + block * n_cols]
        table = first[: -(len(columns[0]) + 1)]
        tables[table] = data[:, 1 + block * n_cols : 1 + (block + 1) * n_cols]
    return SweepResult(
        kind=kind,
        axis_name=axis_name,
        axis_values=data[:, 0],
        columns=columns,
        tables=tables,
        device_ids=device_ids,
        metadata=metadata,
    )


def write_sweep_json(path: str | Path, result: SweepResult) -> None:
    """JSON twin of the CSV writer (sorted keys, lists for arrays)."""
    payload = {
        "format": CSV_FORMAT_TAG,
        "kind": result.kind,
        "axis_name": result.axis_name,
        "axis_values": [float(x) for x in result.axis_values],
        "columns": list(result.columns),
        "device_ids": list(result.device_ids),
        "tables": {
            name: [[float(v) for v in row] for row in table]
            for name, table in sorted(result.tables.items())
        },
        "metadata": {k: _format_value(v) for k, v in sorted(result.metadata.items())},
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
