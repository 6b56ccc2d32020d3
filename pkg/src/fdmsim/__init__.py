"""fdmsim: frequency-division-multiplexed dispersive readout, end to end.

A desk-scale simulator of multiplexed readout of flux qubits through
notch resonators on a shared feedline: multi-tone synthesis, ideal SSB
conversion, the qubit-state-dependent feedline response, digitization,
DFT channelization, Bloch-equation dynamics, and channel-capacity
bookkeeping.  Frequencies are plain Hz; linewidths, rates, and shifts
are angular (rad/s); applied flux is in units of the flux quantum.
"""

from .chipfile import builtin_chip_path, config_hash, load_chip
from .device import (
    Chip,
    DeviceRecord,
    QubitParams,
    QubitStateLabel,
    ResonatorParams,
    dispersive_shift,
    dressed_resonance,
    exact_state_shift,
    qubit_frequency,
    s21_feedline,
    s21_single,
    state_dependent_shift,
)
from .dynamics import (
    GROUND,
    BlochState,
    DriveSpec,
    TelegraphSpectrum,
    evolve,
    evolve_for,
    rabi_frequency,
    relaxation_telegraph_spectrum,
    steady_state_excited,
)
from .errors import (
    ConfigError,
    DegenerateDetuningError,
    FdmSimError,
    InfeasiblePlanError,
    LoMismatchError,
    NyquistError,
    StepSizeError,
    TraceFormatError,
    TraceMismatchError,
    UnknownDeviceError,
)
from .experiments import (
    DampedSinusoidFit,
    ReadoutSetup,
    SweepResult,
    acquire,
    detect_flux_features,
    fit_damped_sinusoid,
    make_readout_setup,
    read_sweep_csv,
    run_flux_sweep,
    run_rabi,
    run_spectroscopy,
    write_sweep_csv,
    write_sweep_json,
)
from .planner import (
    CapacityQuery,
    CapacityResult,
    FrequencyPlan,
    SpacingRule,
    adjacent_crosstalk,
    carson_bandwidth,
    crosstalk_limited_spacing,
    format_plan_report,
    generate_plan,
    max_channels,
    plan_for_chip,
    snr_proxy,
)
from .rxchain import (
    AdcSpec,
    ToneMeasurement,
    adc_quantize,
    add_awgn,
    apply_feedline,
    channelize,
    downconvert,
    measure_crosstalk,
    rail_fraction,
    write_measurements_csv,
)
from .seeding import child_seed, derive_rng
from .traceio import read_trace, write_trace
from .txchain import (
    EnvelopeShape,
    IQTrace,
    PulseEnvelope,
    ToneSpec,
    combine,
    synthesize_multitone,
    trace_energy,
    upconvert_ssb,
)

__version__ = "0.1.0"

__all__ = [
    "AdcSpec",
    "BlochState",
    "CapacityQuery",
    "CapacityResult",
    "Chip",
    "ConfigError",
    "DampedSinusoidFit",
    "DegenerateDetuningError",
    "DeviceRecord",
    "DriveSpec",
    "EnvelopeShape",
    "FdmSimError",
    "FrequencyPlan",
    "GROUND",
    "IQTrace",
    "InfeasiblePlanError",
    "LoMismatchError",
    "NyquistError",
    "PulseEnvelope",
    "QubitParams",
    "QubitStateLabel",
    "ReadoutSetup",
    "ResonatorParams",
    "SpacingRule",
    "StepSizeError",
    "SweepResult",
    "TelegraphSpectrum",
    "ToneMeasurement",
    "ToneSpec",
    "TraceFormatError",
    "TraceMismatchError",
    "UnknownDeviceError",
    "acquire",
    "adc_quantize",
    "add_awgn",
    "adjacent_crosstalk",
    "apply_feedline",
    "builtin_chip_path",
    "carson_bandwidth",
    "channelize",
    "child_seed",
    "combine",
    "config_hash",
    "crosstalk_limited_spacing",
    "derive_rng",
    "detect_flux_features",
    "dispersive_shift",
    "downconvert",
    "dressed_resonance",
    "evolve",
    "evolve_for",
    "exact_state_shift",
    "fit_damped_sinusoid",
    "format_plan_report",
    "generate_plan",
    "load_chip",
    "make_readout_setup",
    "max_channels",
    "measure_crosstalk",
    "plan_for_chip",
    "qubit_frequency",
    "rabi_frequency",
    "rail_fraction",
    "read_sweep_csv",
    "read_trace",
    "relaxation_telegraph_spectrum",
    "run_flux_sweep",
    "run_rabi",
    "run_spectroscopy",
    "s21_feedline",
    "s21_single",
    "snr_proxy",
    "state_dependent_shift",
    "steady_state_excited",
    "synthesize_multitone",
    "trace_energy",
    "upconvert_ssb",
    "write_measurements_csv",
    "write_sweep_csv",
    "write_sweep_json",
    "write_trace",
]
