"""Binary IQ trace files.

Layout (all little-endian):

    offset  size  field
    0       8     magic, the ASCII bytes b"FDMTRACE"
    8       4     format version, uint32, currently 1
    12      4     reserved, uint32, written as 0
    16      8     sample_rate, float64, samples per second
    24      8     n_samples, uint64
    32      -     payload: n_samples pairs of float64 (I, Q), interleaved

The payload is the baseband complex envelope only; carrier frequency and
start time are not persisted.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import TraceFormatError
from .txchain import IQTrace

MAGIC = b"FDMTRACE"
VERSION = 1
_HEADER = struct.Struct("<8sIIdQ")
assert _HEADER.size == 32


def write_trace(path: str | Path, trace: IQTrace) -> None:
    """Write a trace in the documented binary layout."""
    payload = np.empty(2 * trace.n_samples, dtype="<f8")
    payload[0::2] = trace.samples.real
    payload[1::2] = trace.samples.imag
    header = _HEADER.pack(MAGIC, VERSION, 0, float(trace.sample_rate), trace.n_samples)
    Path(path).write_bytes(header + payload.tobytes())


def read_trace(path: str | Path) -> IQTrace:
    """Read a trace written by write_trace.

    Raises TraceFormatError on bad magic, unsupported version, or a
    payload whose length disagrees with the header.
    """
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise TraceFormatError(f"{path}: file shorter than the 32-byte header")
    magic, version, _reserved, sample_rate, n_samples = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise TraceFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise TraceFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 16 * n_samples
    if len(blob) != expected:
        raise TraceFormatError(
            f"{path}: payload length {len(blob) - _HEADER.size} does not match "
            f"header n_samples {n_samples}"
        )
    flat = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    samples = flat[0::2] + 1j * flat[1::2]
    return IQTrace(samples=samples, sample_rate=sample_rate)
