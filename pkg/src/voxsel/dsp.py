"""Signal-processing primitives behind the 84-feature vector.

Pitch and HNR work on rectangular frames via normalized cross-correlation;
MFCC/FBE and formants expect the usual Hamming-windowed frames. Everything
here is deterministic and allocation-only (no global state).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import FrameSequence, Signal

LOG_FLOOR_EPS = 1e-10
INTENSITY_FLOOR_DB = -120.0
HNR_MIN_DB = -20.0
HNR_MAX_DB = 40.0
FORMANT_MAX_BANDWIDTH_HZ = 400.0
# candidate lags within this fraction of the best peak may be promoted to
# the shortest one, which suppresses octave-doubling errors
PITCH_PEAK_TOLERANCE = 0.95

DEFAULT_PITCH_MIN_HZ = 50.0
DEFAULT_PITCH_MAX_HZ = 500.0
DEFAULT_VOICING_THRESHOLD = 0.3


def next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


# --------------------------------------------------------------------------
# mel filter bank and cepstrum
# --------------------------------------------------------------------------

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """Triangular mel filters over the rfft bins, spanning 0 .. fs/2.

    Returns a (n_filters, n_fft//2 + 1) weight matrix; each row rises
    linearly to its center frequency and falls to the next, peak 1.
    """
    edges = mel_to_hz(np.linspace(0.0, float(hz_to_mel(sample_rate / 2.0)),
                                  n_filters + 2))
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)
    weights = np.zeros((n_filters, bin_freqs.size))
    for k in range(n_filters):
        lo, mid, hi = edges[k], edges[k + 1], edges[k + 2]
        rise = (bin_freqs - lo) / (mid - lo)
        fall = (hi - bin_freqs) / (hi - mid)
        weights[k] = np.clip(np.minimum(rise, fall), 0.0, None)
    return weights


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix; row 0 is the DC basis vector."""
    j = np.arange(n)
    k = np.arange(n)[:, None]
    mat = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * j + 1) * k / (2.0 * n))
    mat[0] = np.sqrt(1.0 / n)
    return mat


def extract_fbe(frames: FrameSequence, n_filters: int = 13) -> np.ndarray:
    """Per-frame log mel filter-bank energies, floored at log(1e-10)."""
    if frames.frame_len < 2:
        raise ValueError("frames too short for a spectrum")
    n_fft = next_pow2(frames.frame_len)
    power = np.abs(np.fft.rfft(frames.frames, n_fft, axis=1)) ** 2
    weights = mel_filterbank(n_filters, n_fft, frames.sample_rate)
    energies = power @ weights.T
    return np.log(np.maximum(energies, LOG_FLOOR_EPS))


def extract_mfcc(frames: FrameSequence, n_filters: int = 13) -> np.ndarray:
    """Per-frame cepstra: orthonormal DCT-II of the log filter-bank energies."""
    fbe = extract_fbe(frames, n_filters)
    return fbe @ dct_matrix(n_filters).T


# --------------------------------------------------------------------------
# pitch / harmonicity via normalized cross-correlation
# --------------------------------------------------------------------------

def normalized_autocorrelation(frame: np.ndarray) -> np.ndarray:
    """rho[tau] = sum x[n]x[n+tau] / sqrt(head-energy * tail-energy).

    The per-lag energy normalization keeps rho(period) near 1 for periodic
    signals regardless of how large the lag is relative to the frame.
    """
    x = np.asarray(frame, dtype=np.float64)
    x = x - x.mean()
    n = x.size
    corr = np.correlate(x, x, mode="full")[n - 1:]
    sq = np.concatenate(([0.0], np.cumsum(x * x)))
    taus = np.arange(n)
    head = sq[n - taus]          # energy of x[0 : n-tau]
    tail = sq[n] - sq[taus]      # energy of x[tau : n]
    denom = np.sqrt(np.maximum(head * tail, 0.0))
    out = np.zeros(n)
    np.divide(corr, denom, out=out, where=denom > 0)
    return out


def _parabolic_vertex(y0, y1, y2):
    """(lag offset, height) of the quadratic through three equi-spaced
    points centered on the middle one; (0, y1) when not concave."""
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0:
        return 0.0, y1
    delta = float(np.clip(0.5 * (y0 - y2) / denom, -0.5, 0.5))
    height = y1 - 0.25 * (y0 - y2) * delta
    return delta, float(height)


def _frame_pitch(frame, sample_rate, fmin, fmax, threshold):
    """(f0_hz, peak_rho) for one rectangular frame; (0, peak) if unvoiced.

    Candidate periods are the local autocorrelation maxima scored by their
    parabolic-interpolated height (integer-lag values understate peaks at
    non-integer periods); the shortest lag within tolerance of the best
    height wins, which suppresses period-doubling errors.
    """
    n = frame.size
    lag_min = max(2, int(np.ceil(sample_rate / fmax)))
    # lags beyond half the frame have too little overlap to be trusted
    lag_max = min(int(np.floor(sample_rate / fmin)), n // 2)
    if lag_max < lag_min:
        return 0.0, 0.0
    rho = normalized_autocorrelation(frame)
    band = rho[lag_min:lag_max + 1]
    is_max = np.ones(band.size, dtype=bool)
    is_max[1:] &= band[1:] >= band[:-1]
    is_max[:-1] &= band[:-1] >= band[1:]
    candidates = np.flatnonzero(is_max)
    if candidates.size == 0:
        return 0.0, float(band.max())

    lags = lag_min + candidates
    deltas = np.zeros(lags.size)
    heights = np.empty(lags.size)
    for i, lag in enumerate(lags):
        if 0 < lag < n - 1:
            deltas[i], heights[i] = _parabolic_vertex(rho[lag - 1], rho[lag],
                                                      rho[lag + 1])
        else:
            heights[i] = rho[lag]
    best = float(heights.max())
    if best < threshold:
        return 0.0, best
    chosen = int(np.flatnonzero(heights >= PITCH_PEAK_TOLERANCE * best)[0])
    return sample_rate / (lags[chosen] + deltas[chosen]), best


def frame_pitch_track(frames: FrameSequence,
                      fmin: float = DEFAULT_PITCH_MIN_HZ,
                      fmax: float = DEFAULT_PITCH_MAX_HZ,
                      threshold: float = DEFAULT_VOICING_THRESHOLD):
    """Per-frame (f0, peak) arrays; f0 is 0 where the frame is unvoiced."""
    if frames.sample_rate < 2 * fmax:
        raise ValueError("sample rate below twice the pitch search ceiling")
    f0 = np.zeros(len(frames))
    peaks = np.zeros(len(frames))
    for i, frame in enumerate(frames.frames):
        f0[i], peaks[i] = _frame_pitch(frame, frames.sample_rate,
                                       fmin, fmax, threshold)
    return f0, peaks


def extract_pitch(frames: FrameSequence,
                  fmin: float = DEFAULT_PITCH_MIN_HZ,
                  fmax: float = DEFAULT_PITCH_MAX_HZ,
                  threshold: float = DEFAULT_VOICING_THRESHOLD) -> float:
    """Median pitch over voiced frames in Hz; 0 when nothing is voiced."""
    f0, _ = frame_pitch_track(frames, fmin, fmax, threshold)
    voiced = f0[f0 > 0]
    return float(np.median(voiced)) if voiced.size else 0.0


def hnr_db_from_peak(r: float) -> float:
    """Map an autocorrelation peak to HNR dB, clamped to [-20, 40]."""
    r = min(max(float(r), 0.0), 1.0)
    ratio = r / max(1.0 - r, 1e-12)
    if ratio <= 0.0:
        return HNR_MIN_DB
    return float(np.clip(10.0 * np.log10(ratio), HNR_MIN_DB, HNR_MAX_DB))


def extract_hnr(frames: FrameSequence,
                fmin: float = DEFAULT_PITCH_MIN_HZ,
                fmax: float = DEFAULT_PITCH_MAX_HZ,
                threshold: float = DEFAULT_VOICING_THRESHOLD) -> float:
    """Mean harmonic-to-noise ratio over voiced frames; -20 dB floor."""
    f0, peaks = frame_pitch_track(frames, fmin, fmax, threshold)
    voiced = f0 > 0
    if not voiced.any():
        return HNR_MIN_DB
    return float(np.mean([hnr_db_from_peak(r) for r in peaks[voiced]]))


# --------------------------------------------------------------------------
# intensity, zero crossings, signal statistics
# --------------------------------------------------------------------------

def extract_intensity(signal: Signal) -> float:
    """20*log10(RMS) in dB, floored at -120 for silence."""
    rms = float(np.sqrt(np.mean(signal.samples ** 2)))
    if rms <= 0.0:
        return INTENSITY_FLOOR_DB
    return max(20.0 * np.log10(rms), INTENSITY_FLOOR_DB)


def extract_zcr(signal: Signal) -> tuple[float, float]:
    """(sign changes per sample interval, sign changes per second)."""
    x = signal.samples
    if x.size < 2:
        raise ValueError("need at least two samples")
    signs = np.where(x >= 0.0, 1, -1)  # zeros count as positive
    changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
    return changes / (x.size - 1), changes / signal.duration


@dataclass(frozen=True)
class SignalStats:
    minimum: float
    mean: float
    variance: float
    maximum: float
    std: float
    percentile: float
    autocorrelation: float


def signal_statistics(signal: Signal, percentile_q: float = 90.0) -> SignalStats:
    """Amplitude statistics: population variance, |x| percentile, lag-1 NCC."""
    x = signal.samples
    if x.size < 2:
        raise ValueError("need at least two samples")
    mean = float(x.mean())
    var = float(x.var())  # population (divide by N)
    d = x - mean
    num = float(np.dot(d[:-1], d[1:]))
    den = float(np.sqrt(np.dot(d[:-1], d[:-1]) * np.dot(d[1:], d[1:])))
    autocorr = num / den if den > 0 else 1.0  # constant signal convention
    return SignalStats(
        minimum=float(x.min()),
        mean=mean,
        variance=var,
        maximum=float(x.max()),
        std=float(np.sqrt(var)),
        percentile=float(np.percentile(np.abs(x), percentile_q)),
        autocorrelation=autocorr,
    )


# --------------------------------------------------------------------------
# formants via linear prediction
# --------------------------------------------------------------------------

def levinson_durbin(autocorr: np.ndarray, order: int):
    """Solve the Toeplitz normal equations; returns LPC coefficients
    [1, a1..ap] or None when the recursion degenerates."""
    r = np.asarray(autocorr, dtype=np.float64)
    if r[0] <= 0.0:
        return None
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1:0:-1])
        if err <= 0.0:
            return None
        k = -acc / err
        a[1:i + 1] = a[1:i + 1] + k * a[i - 1::-1][:i]
        err *= (1.0 - k * k)
        if not np.isfinite(err):
            return None
    return a


def lpc_order(sample_rate: int) -> int:
    """Conventional formant-analysis order: 2 + fs/1000."""
    return 2 + int(round(sample_rate / 1000.0))


def _frame_formants(frame, sample_rate, order):
    n = frame.size
    r = np.correlate(frame, frame, mode="full")[n - 1:n + order]
    a = levinson_durbin(r, order)
    if a is None:
        return None
    roots = np.roots(a)
    roots = roots[roots.imag > 0]
    if roots.size == 0:
        return None
    freqs = np.arctan2(roots.imag, roots.real) * sample_rate / (2.0 * np.pi)
    mags = np.abs(roots)
    with np.errstate(divide="ignore"):
        bandwidths = -(sample_rate / np.pi) * np.log(mags)
    keep = (bandwidths > 0) & (bandwidths < FORMANT_MAX_BANDWIDTH_HZ)
    freqs = np.sort(freqs[keep])
    if freqs.size == 0:
        return None
    return freqs[:3]


def extract_formants(frames: FrameSequence, order: int | None = None) -> np.ndarray:
    """Per-frame (f1, f2, f3) resonance tracks in Hz, ascending per frame.

    A frame contributes as many of its narrow-bandwidth LPC resonances as
    it has (up to three); absent ones are NaN. Frames with none at all are
    dropped. Returns an (n_kept, 3) array, possibly empty.
    """
    if order is None:
        order = lpc_order(frames.sample_rate)
    rows = []
    for frame in frames.frames:
        freqs = _frame_formants(frame, frames.sample_rate, order)
        if freqs is None:
            continue
        row = np.full(3, np.nan)
        row[:freqs.size] = freqs
        rows.append(row)
    if not rows:
        return np.zeros((0, 3))
    return np.vstack(rows)
