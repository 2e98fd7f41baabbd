"""Labeled feature datasets, corpus manifests, and the synthetic corpus.

The dataset CSV schema is ``sample_id,corpus,label,x1,...,x84`` with values
printed to 9 significant digits, which round-trips bit-stably through
float64. The synthetic corpus stands in for the licensed emotional-speech
corpora: sawtooth-plus-noise utterances whose pitch and amplitude bands
are class-disjoint while noise level and spectral tilt are shared
nuisances.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import Signal, write_wav
from .catalog import N_FEATURES
from .errors import DataError, VoxselError
from .extraction import ExtractionConfig, extract_feature_vector
from .audio import read_wav

CANONICAL_EMOTIONS = ("anger", "fear", "happiness", "neutral", "sadness")

DATASET_HEADER = ["sample_id", "corpus", "label"] + [f"x{i}" for i in range(1, N_FEATURES + 1)]


@dataclass
class LabeledDataset:
    """N feature rows with emotion labels and per-row corpus tags."""

    X: np.ndarray
    labels: list[str]
    corpora: list[str]
    sample_ids: list[str]

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2 or self.X.shape[1] != N_FEATURES:
            raise DataError(f"dataset must have {N_FEATURES} columns",
                            code="bad-dataset")
        n = self.X.shape[0]
        if n == 0:
            raise DataError("dataset is empty", code="bad-dataset")
        if not (len(self.labels) == len(self.corpora) == len(self.sample_ids) == n):
            raise DataError("dataset metadata lengths disagree", code="bad-dataset")
        if not np.all(np.isfinite(self.X)):
            raise DataError("dataset contains non-finite values", code="bad-dataset")

    def __len__(self):
        return self.X.shape[0]

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.labels)

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels))

    @property
    def corpus_id(self) -> str:
        uniq = sorted(set(self.corpora))
        return uniq[0] if len(uniq) == 1 else "mixed"


def dataset_to_csv(dataset: LabeledDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for sid, corpus, label, row in zip(dataset.sample_ids, dataset.corpora,
                                       dataset.labels, dataset.X):
        writer.writerow([sid, corpus, label] + [f"{v:.9g}" for v in row])
    return buf.getvalue()


def save_dataset_csv(path, dataset: LabeledDataset) -> None:
    Path(path).write_text(dataset_to_csv(dataset))


def load_dataset_csv(path) -> LabeledDataset:
    text = Path(path).read_text()
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0] != DATASET_HEADER:
        raise DataError(f"bad dataset header in {path}", code="bad-dataset")
    body = rows[1:]
    if not body:
        raise DataError(f"dataset {path} has no rows", code="bad-dataset")
    try:
        X = np.array([[float(v) for v in r[3:]] for r in body])
    except ValueError as exc:
        raise DataError(f"bad value in {path}: {exc}", code="bad-dataset") from exc
    return LabeledDataset(
        X=X,
        labels=[r[2] for r in body],
        corpora=[r[1] for r in body],
        sample_ids=[r[0] for r in body],
    )


@dataclass
class CorpusManifest:
    """(wav path, emotion label) entries plus the corpus tag."""

    entries: list  # of (path str, label str)
    corpus_id: str
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        paths = [p for p, _ in self.entries]
        if len(set(paths)) != len(paths):
            raise DataError("manifest has duplicate paths", code="bad-manifest")
        if not self.entries:
            raise DataError("manifest is empty", code="bad-manifest")

    def resolved(self):
        return [(self.root / p, label) for p, label in self.entries]


def save_manifest(path, manifest: CorpusManifest) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["path", "label"])
    for p, label in manifest.entries:
        writer.writerow([p, label])
    Path(path).write_text(buf.getvalue())


def load_manifest(path, corpus_id: str = "") -> CorpusManifest:
    path = Path(path)
    rows = list(csv.reader(path.read_text().splitlines()))
    if not rows or rows[0] != ["path", "label"]:
        raise DataError(f"bad manifest header in {path}", code="bad-manifest")
    entries = [(r[0], r[1]) for r in rows[1:]]
    return CorpusManifest(entries=entries, corpus_id=corpus_id or path.stem,
                          root=path.parent)


def _extract_one(args):
    wav_path, config = args
    try:
        signal = read_wav(wav_path)
        return extract_feature_vector(signal, config), None
    except VoxselError as exc:
        return None, (str(wav_path), exc.code, str(exc))


def build_dataset(manifest: CorpusManifest,
                  config: ExtractionConfig | None = None, jobs: int = 1):
    """Extract one feature row per manifest entry, in manifest order.

    Returns (dataset, errors); unreadable or unextractable files are
    skipped and reported as (path, code, message) tuples. ``jobs`` > 1
    extracts files in parallel processes with identical output.
    """
    resolved = manifest.resolved()
    tasks = [(wav_path, config) for wav_path, _ in resolved]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=4))
    else:
        results = [_extract_one(t) for t in tasks]

    rows, labels, ids, errors = [], [], [], []
    for (wav_path, label), (vec, err) in zip(resolved, results):
        if err is not None:
            errors.append(err)
            continue
        rows.append(vec)
        labels.append(label)
        ids.append(Path(wav_path).name)
    if not rows:
        raise DataError("no extractable files in manifest", code="empty-dataset")
    dataset = LabeledDataset(
        X=np.vstack(rows),
        labels=labels,
        corpora=[manifest.corpus_id] * len(labels),
        sample_ids=ids,
    )
    return dataset, errors


# --------------------------------------------------------------------------
# synthetic corpus
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthClassSpec:
    """Acoustic parameter ranges for one synthetic emotion class.

    Pitch and RMS bands are class-disjoint (the planted discriminative
    cues); the vowel-like resonances, rolloff and noise floor share one
    distribution across classes so spectral-shape features stay nuisances.
    """

    name: str
    f0_hz: tuple                   # fundamental band
    rms: tuple                     # target RMS band
    noise: tuple = (0.006, 0.006)  # noise floor relative to RMS
    tilt: tuple = (1.4, 1.8)       # harmonic rolloff exponent
    # (center band, bandwidth band) per random resonance
    resonances: tuple = (((480.0, 560.0), (220.0, 300.0)),
                         ((1150.0, 1350.0), (260.0, 380.0)),
                         ((2500.0, 2700.0), (300.0, 400.0)))
    duration_s: float = 1.0


DEFAULT_SYNTH_CLASSES = (
    SynthClassSpec("anger", f0_hz=(85.0, 95.0), rms=(0.0295, 0.0305)),
    SynthClassSpec("fear", f0_hz=(135.0, 145.0), rms=(0.0645, 0.0655)),
    SynthClassSpec("happiness", f0_hz=(185.0, 195.0), rms=(0.0995, 0.1005)),
    SynthClassSpec("neutral", f0_hz=(235.0, 245.0), rms=(0.1345, 0.1355)),
    SynthClassSpec("sadness", f0_hz=(285.0, 295.0), rms=(0.1695, 0.1705)),
)


def _resonator_gain(freqs_hz, center_hz, bandwidth_hz, sample_rate):
    """|H| of a two-pole resonator at the given frequencies."""
    r = np.exp(-np.pi * bandwidth_hz / sample_rate)
    theta = 2.0 * np.pi * center_hz / sample_rate
    omega = 2.0 * np.pi * np.asarray(freqs_hz) / sample_rate
    z = np.exp(1j * omega)
    denom = (1.0 - r * np.exp(1j * theta) / z) * (1.0 - r * np.exp(-1j * theta) / z)
    return np.abs(1.0 / denom)


@dataclass(frozen=True)
class SynthParams:
    """One utterance's drawn parameters (separated from rendering so the
    random stream stays identical regardless of worker parallelism)."""

    f0: float
    rms: float
    noise: float
    tilt: float
    resonances: tuple  # of (center_hz, bandwidth_hz)
    duration_s: float


def draw_params(rng, spec: SynthClassSpec) -> SynthParams:
    return SynthParams(
        f0=rng.uniform(*spec.f0_hz),
        rms=rng.uniform(*spec.rms),
        noise=rng.uniform(*spec.noise),
        tilt=rng.uniform(*spec.tilt),
        resonances=tuple((rng.uniform(*c), rng.uniform(*b))
                         for c, b in spec.resonances),
        duration_s=spec.duration_s,
    )


def render_utterance(params: SynthParams, sample_rate: int,
                     noise_seed: int) -> Signal:
    """Harmonic stack shaped by the resonances and 1/k^tilt rolloff, plus
    a white noise floor, scaled to the exact RMS target."""
    n = int(round(params.duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    n_harm = max(int(0.45 * sample_rate / params.f0), 1)
    k = np.arange(1, n_harm + 1)
    amps = 1.0 / (k ** params.tilt)
    for center, bandwidth in params.resonances:
        amps = amps * _resonator_gain(k * params.f0, center, bandwidth,
                                      sample_rate)
    wave = (amps[None, :]
            * np.sin(2.0 * np.pi * params.f0 * t[:, None] * k[None, :])).sum(axis=1)
    noise = np.random.default_rng(noise_seed).standard_normal(n)
    wave += params.noise * float(np.sqrt(np.mean(wave ** 2))) * noise
    wave *= params.rms / np.sqrt(np.mean(wave ** 2))
    return Signal(np.clip(wave, -1.0, 1.0), sample_rate)


def synth_utterance(rng, spec: SynthClassSpec, sample_rate: int,
                    noise_seed: int = 0) -> Signal:
    return render_utterance(draw_params(rng, spec), sample_rate, noise_seed)


def _render_one(args):
    path, params, sample_rate, noise_seed = args
    write_wav(path, render_utterance(params, sample_rate, noise_seed))


def synth_corpus(out_dir, classes=DEFAULT_SYNTH_CLASSES, n_per_class: int = 40,
                 seed: int = 0, sample_rate: int = 16000,
                 corpus_id: str = "synthetic", jobs: int = 1) -> CorpusManifest:
    """Write a deterministic WAV corpus plus manifest.csv; returns the
    manifest. Output bytes depend only on (classes, n_per_class, seed,
    sample_rate), not on ``jobs``."""
    if len(classes) < 2:
        raise DataError("need at least two classes", code="bad-config")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    tasks = []
    for spec in classes:
        for i in range(n_per_class):
            name = f"{spec.name}_{i:03d}.wav"
            params = draw_params(rng, spec)
            noise_seed = int(rng.integers(0, 2 ** 31 - 1))
            tasks.append((out_dir / name, params, sample_rate, noise_seed))
            entries.append((name, spec.name))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_render_one, tasks, chunksize=8))
    else:
        for task in tasks:
            _render_one(task)
    manifest = CorpusManifest(entries=entries, corpus_id=corpus_id, root=out_dir)
    save_manifest(out_dir / "manifest.csv", manifest)
    return manifest
