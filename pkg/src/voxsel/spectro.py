"""Spectrogram computation and deterministic grayscale image export.

The spectrogram stores raw STFT magnitudes (non-negative); the log view
and the 8-bit quantization happen at export so energy checks can run on
the linear values.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import Signal, frame_signal, WINDOW_HAMMING
from .dsp import LOG_FLOOR_EPS, next_pow2

DEFAULT_IMAGE_SIDE = 227
CONSTANT_GRAY = 128  # degenerate min==max normalization maps here


@dataclass(frozen=True)
class Spectrogram:
    """time x frequency STFT magnitude matrix."""

    magnitudes: np.ndarray  # (n_frames, n_fft//2 + 1), all >= 0
    frame_ms: float
    hop_ms: float
    sample_rate: int

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if mags.ndim != 2 or (mags < 0).any():
            raise ValueError("magnitudes must be a non-negative 2-D matrix")
        mags.setflags(write=False)
        object.__setattr__(self, "magnitudes", mags)

    def log_compressed(self) -> np.ndarray:
        """Natural-log magnitudes with the standard 1e-10 floor."""
        return np.log(np.maximum(self.magnitudes, LOG_FLOOR_EPS))


def spectrogram(signal: Signal, frame_ms: float = 25.0,
                hop_ms: float = 10.0) -> Spectrogram:
    """STFT magnitude over Hamming-windowed frames, next-pow2 FFT size."""
    frames = frame_signal(signal, frame_ms, hop_ms, WINDOW_HAMMING)
    n_fft = next_pow2(frames.frame_len)
    mags = np.abs(np.fft.rfft(frames.frames, n_fft, axis=1))
    return Spectrogram(magnitudes=mags, frame_ms=frame_ms, hop_ms=hop_ms,
                       sample_rate=signal.sample_rate)


def bilinear_resize(matrix: np.ndarray, out_rows: int, out_cols: int) -> np.ndarray:
    """Bilinear resampling with the pixel-center coordinate convention."""
    src = np.asarray(matrix, dtype=np.float64)
    in_rows, in_cols = src.shape

    def axis_coords(n_out, n_in):
        coords = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        return np.clip(coords, 0.0, n_in - 1.0)

    r = axis_coords(out_rows, in_rows)
    c = axis_coords(out_cols, in_cols)
    r0 = np.floor(r).astype(np.intp)
    c0 = np.floor(c).astype(np.intp)
    r1 = np.minimum(r0 + 1, in_rows - 1)
    c1 = np.minimum(c0 + 1, in_cols - 1)
    fr = (r - r0)[:, None]
    fc = (c - c0)[None, :]
    top = src[np.ix_(r0, c0)] * (1 - fc) + src[np.ix_(r0, c1)] * fc
    bot = src[np.ix_(r1, c0)] * (1 - fc) + src[np.ix_(r1, c1)] * fc
    return top * (1 - fr) + bot * fr


def render_image(sp: Spectrogram, side: int = DEFAULT_IMAGE_SIDE) -> np.ndarray:
    """Log-compress, min-max normalize, resize to side x side, quantize
    to uint8. A constant matrix maps to mid-gray."""
    if side <= 0:
        raise ValueError("side must be positive")
    logm = sp.log_compressed()
    lo, hi = float(logm.min()), float(logm.max())
    if hi == lo:
        norm = np.full_like(logm, 0.5)
    else:
        norm = (logm - lo) / (hi - lo)
    resized = bilinear_resize(norm, side, side)
    return np.clip(np.rint(resized * 255.0), 0, 255).astype(np.uint8)


def export_image(sp: Spectrogram, path, side: int = DEFAULT_IMAGE_SIDE) -> None:
    """Write the spectrogram as binary PGM (P5, maxval 255, row-major)."""
    pixels = render_image(sp, side)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())
