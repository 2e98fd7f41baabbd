"""WAV ingestion, normalization, framing and length conditioning.

All functions are pure; :class:`Signal` and :class:`FrameSequence` are
frozen after construction and safe to share across threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import WavError

PCM_FORMAT_TAG = 1
INT16_FULL_SCALE = 32768.0

WINDOW_RECTANGULAR = "rectangular"
WINDOW_HAMMING = "hamming"


@dataclass(frozen=True)
class Signal:
    """Mono signal with amplitudes in [-1, 1] at a known sample rate."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise WavError("signal must be a non-empty 1-D sample array",
                           code="empty-signal")
        if not np.all(np.isfinite(samples)):
            raise WavError("signal contains non-finite samples",
                           code="non-finite-signal")
        if int(self.sample_rate) <= 0:
            raise WavError("sample rate must be positive", code="bad-sample-rate")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class FrameSequence:
    """Fixed-length windowed frames cut from a signal."""

    frames: np.ndarray  # shape (n_frames, frame_len)
    frame_len: int
    hop: int
    sample_rate: int
    padded: bool = False  # signal shorter than one frame, zero-padded

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[1] != self.frame_len:
            raise ValueError("frames must be (n_frames, frame_len)")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return self.frames.shape[0]


def _require(cond, message, code):
    if not cond:
        raise WavError(message, code=code)


def read_wav(path) -> Signal:
    """Read a RIFF/WAVE file with 16-bit PCM data into a Signal.

    Multichannel audio is averaged to mono; int16 samples map to [-1, 1)
    by division by 32768. Chunks other than fmt/data are skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise WavError(f"no such file: {path}", code="missing-file")
    raw = path.read_bytes()
    _require(len(raw) >= 12 and raw[:4] == b"RIFF" and raw[8:12] == b"WAVE",
             f"not a RIFF/WAVE file: {path}", "not-riff")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (chunk_size,) = struct.unpack("<I", raw[pos + 4:pos + 8])
        body = raw[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            data = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    _require(fmt is not None and len(fmt) >= 16, f"missing fmt chunk: {path}", "missing-fmt")
    tag, n_channels, sample_rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
    _require(tag == PCM_FORMAT_TAG, f"not PCM (format tag {tag}): {path}", "not-pcm")
    _require(bits == 16, f"only 16-bit PCM supported, got {bits}-bit: {path}", "not-pcm")
    _require(n_channels >= 1, f"bad channel count: {path}", "bad-fmt")
    _require(data is not None, f"missing data chunk: {path}", "missing-data")
    _require(len(data) > 0, f"empty data chunk: {path}", "empty-data")

    n_samples = len(data) // (2 * n_channels)
    _require(n_samples > 0, f"empty data chunk: {path}", "empty-data")
    ints = np.frombuffer(data[:n_samples * 2 * n_channels], dtype="<i2")
    samples = ints.astype(np.float64) / INT16_FULL_SCALE
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    return Signal(samples=samples, sample_rate=sample_rate, source_id=str(path))


def write_wav(path, signal: Signal) -> None:
    """Write a Signal as mono 16-bit PCM, clipping to full scale."""
    ints = np.clip(np.rint(signal.samples * INT16_FULL_SCALE),
                   -32768, 32767).astype("<i2")
    data = ints.tobytes()
    fmt = struct.pack("<HHIIHH", PCM_FORMAT_TAG, 1, signal.sample_rate,
                      signal.sample_rate * 2, 2, 16)
    riff_size = 4 + (8 + len(fmt)) + (8 + len(data))
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", riff_size) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<I", len(fmt)) + fmt)
        fh.write(b"data" + struct.pack("<I", len(data)) + data)
        if len(data) & 1:
            fh.write(b"\x00")


def peak_normalize(signal: Signal) -> Signal:
    """Scale so max |sample| is 1.0; an all-zero signal is returned as is."""
    peak = float(np.max(np.abs(signal.samples)))
    if peak == 0.0:
        return signal
    return Signal(samples=signal.samples / peak,
                  sample_rate=signal.sample_rate,
                  source_id=signal.source_id)


def window_coefficients(window: str, length: int) -> np.ndarray:
    if window == WINDOW_RECTANGULAR:
        return np.ones(length)
    if window == WINDOW_HAMMING:
        return np.hamming(length)
    raise ValueError(f"unknown window: {window!r}")


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    """Number of full frames; 1 for the degenerate zero-padded case."""
    if n_samples < frame_len:
        return 1
    return (n_samples - frame_len) // hop + 1


def frame_signal(signal: Signal, frame_ms: float, hop_ms: float,
                 window: str = WINDOW_HAMMING) -> FrameSequence:
    """Cut a signal into windowed frames, discarding the trailing partial.

    A signal shorter than one frame yields a single zero-padded frame with
    the ``padded`` flag set.
    """
    if not (frame_ms >= hop_ms > 0):
        raise ValueError("require frame_ms >= hop_ms > 0")
    frame_len = max(int(round(frame_ms * signal.sample_rate / 1000.0)), 1)
    hop = max(int(round(hop_ms * signal.sample_rate / 1000.0)), 1)
    coeffs = window_coefficients(window, frame_len)

    x = signal.samples
    if x.size < frame_len:
        frame = np.zeros(frame_len)
        frame[:x.size] = x
        return FrameSequence(frames=(frame * coeffs)[None, :], frame_len=frame_len,
                             hop=hop, sample_rate=signal.sample_rate, padded=True)

    n = frame_count(x.size, frame_len, hop)
    idx = hop * np.arange(n)[:, None] + np.arange(frame_len)[None, :]
    return FrameSequence(frames=x[idx] * coeffs, frame_len=frame_len, hop=hop,
                         sample_rate=signal.sample_rate)


def fit_length(signal: Signal, target: int) -> Signal:
    """Center-crop longer signals, symmetrically zero-pad shorter ones."""
    if target <= 0:
        raise ValueError("target length must be positive")
    x = signal.samples
    if x.size == target:
        return signal
    if x.size > target:
        start = (x.size - target) // 2
        out = x[start:start + target]
    else:
        left = (target - x.size) // 2
        out = np.zeros(target)
        out[left:left + x.size] = x
    return Signal(samples=out, sample_rate=signal.sample_rate,
                  source_id=signal.source_id)
