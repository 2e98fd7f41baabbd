"""Assembly of the 84-dimensional feature vector from a signal.

The extractor is a stateless sklearn-style transformer so feature
extraction composes with ordinary pipelines: ``transform`` maps a list of
:class:`~voxsel.audio.Signal` to an (n, 84) matrix laid out per the
feature catalogue.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import dsp
from .audio import Signal, frame_signal, WINDOW_HAMMING, WINDOW_RECTANGULAR
from .catalog import N_FEATURES
from .errors import DataError


@dataclass(frozen=True)
class ExtractionConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    pitch_min_hz: float = dsp.DEFAULT_PITCH_MIN_HZ
    pitch_max_hz: float = dsp.DEFAULT_PITCH_MAX_HZ
    voicing_threshold: float = dsp.DEFAULT_VOICING_THRESHOLD
    n_filters: int = 13
    percentile_q: float = 90.0

    def __post_init__(self):
        if self.n_filters != 13:
            # the vector layout hard-codes 13 cepstral / filter channels
            raise DataError("n_filters is fixed at 13", code="bad-config")
        if not (self.frame_ms >= self.hop_ms > 0):
            raise DataError("require frame_ms >= hop_ms > 0", code="bad-config")
        if not (0 < self.pitch_min_hz < self.pitch_max_hz):
            raise DataError("require 0 < pitch_min_hz < pitch_max_hz",
                            code="bad-config")

    @property
    def pitch_frame_ms(self) -> float:
        """Rectangular analysis window for pitch/HNR: at least two periods
        of the lowest searchable pitch."""
        return max(self.frame_ms, 2000.0 / self.pitch_min_hz)


_CONFIG_FIELDS = {f: t for f, t in ExtractionConfig.__annotations__.items()}


def read_config(path) -> ExtractionConfig:
    """Parse a key=value extraction config file; missing keys use defaults."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such config file: {path}", code="missing-config")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key=value",
                            code="bad-config")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELDS:
            raise DataError(f"{path}:{lineno}: unknown key {key!r}",
                            code="bad-config")
        caster = int if key == "n_filters" else float
        try:
            values[key] = caster(val.strip())
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad value for {key}: {val!r}",
                            code="bad-config") from exc
    return ExtractionConfig(**values)


def write_config(path, config: ExtractionConfig) -> None:
    lines = [f"{key}={value}" for key, value in asdict(config).items()]
    Path(path).write_text("\n".join(lines) + "\n")


def _formant_block(tracks: np.ndarray) -> np.ndarray:
    """x1..x20 from the (n, 3) formant tracks; zeros for empty tracks.

    Tracks are ragged (NaN-padded): each statistic runs over the frames
    where that formant exists.
    """
    block = np.zeros(20)
    if tracks.shape[0] == 0:
        return block
    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
        block[0:3] = np.nanmax(tracks, axis=0)
        block[3:6] = np.nanmin(tracks, axis=0)
        block[6:9] = np.nanstd(tracks, axis=0)
        block[9:12] = np.nanmean(tracks, axis=0)
        block[12:15] = np.nanmedian(tracks, axis=0)
    block = np.nan_to_num(block, nan=0.0)
    for i in range(5):
        block[15 + i] = block[3 * i:3 * i + 3].mean()
    return block


def extract_feature_vector(signal: Signal,
                           config: ExtractionConfig | None = None) -> np.ndarray:
    """Compute the full 84-entry feature vector for one signal.

    Sub-extractor failures surface as sentinel values (0 for formants and
    pitch, the documented floors elsewhere); the result is always finite.
    """
    cfg = config or ExtractionConfig()
    if len(signal) < 2:
        # degenerate one-sample input: pad so the statistics are defined
        signal = Signal(np.pad(signal.samples, (0, 1)), signal.sample_rate,
                        signal.source_id)

    spectral = frame_signal(signal, cfg.frame_ms, cfg.hop_ms, WINDOW_HAMMING)
    pitch_frames = frame_signal(signal, cfg.pitch_frame_ms, cfg.hop_ms,
                                WINDOW_RECTANGULAR)

    stats = dsp.signal_statistics(signal, cfg.percentile_q)
    zcr, zcr_density = dsp.extract_zcr(signal)
    mfcc = dsp.extract_mfcc(spectral, cfg.n_filters)
    fbe = dsp.extract_fbe(spectral, cfg.n_filters)

    vec = np.zeros(N_FEATURES)
    vec[0:20] = _formant_block(dsp.extract_formants(spectral))
    vec[20] = dsp.extract_intensity(signal)
    vec[21] = stats.std
    vec[22] = stats.autocorrelation
    vec[23] = dsp.extract_pitch(pitch_frames, cfg.pitch_min_hz,
                                cfg.pitch_max_hz, cfg.voicing_threshold)
    vec[24] = dsp.extract_hnr(pitch_frames, cfg.pitch_min_hz,
                              cfg.pitch_max_hz, cfg.voicing_threshold)
    vec[25] = stats.minimum
    vec[26] = stats.mean
    vec[27] = stats.variance
    vec[28] = stats.maximum
    vec[29] = stats.percentile
    vec[30] = zcr
    vec[31] = zcr_density
    vec[32:45] = mfcc.std(axis=0)
    vec[45:58] = mfcc.mean(axis=0)
    vec[58:71] = fbe.std(axis=0)
    vec[71:84] = fbe.mean(axis=0)
    return np.nan_to_num(vec, nan=0.0, posinf=0.0, neginf=0.0)


class FeatureVectorExtractor(BaseEstimator, TransformerMixin):
    """Transformer from signals to 84-dimensional feature rows."""

    def __init__(self, config: ExtractionConfig | None = None):
        self.config = config

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return np.vstack([extract_feature_vector(s, self.config) for s in X])
