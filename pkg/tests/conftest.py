import numpy as np
import pytest

from voxsel.audio import Signal
from voxsel.dataset import synth_corpus

SAMPLE_RATE = 16000


def sine(freq, duration=1.0, fs=SAMPLE_RATE, amplitude=1.0):
    t = np.arange(int(duration * fs)) / fs
    return Signal(amplitude * np.sin(2 * np.pi * freq * t), fs)


def sawtooth(f0, duration=1.0, fs=SAMPLE_RATE, amplitude=0.5, n_harm=None):
    """Band-limited sawtooth built from its Fourier series."""
    t = np.arange(int(duration * fs)) / fs
    if n_harm is None:
        n_harm = int(0.45 * fs / f0)
    k = np.arange(1, n_harm + 1)
    wave = (np.sin(2 * np.pi * f0 * t[:, None] * k[None, :]) / k[None, :]).sum(axis=1)
    return Signal(amplitude * wave / np.abs(wave).max(), fs)


def resonant_pulses(freqs, bandwidths, f0=100.0, duration=1.0, fs=SAMPLE_RATE,
                    amplitude=0.5):
    """Pulse train through cascaded two-pole resonators, run as explicit
    time-domain recursions (independent of any frequency-domain code)."""
    n = int(duration * fs)
    x = np.zeros(n)
    x[::int(fs / f0)] = 1.0
    y = x
    for f, bw in zip(freqs, bandwidths):
        r = np.exp(-np.pi * bw / fs)
        a1, a2 = -2 * r * np.cos(2 * np.pi * f / fs), r * r
        out = np.zeros(n)
        for i in range(n):
            out[i] = y[i]
            if i >= 1:
                out[i] -= a1 * out[i - 1]
            if i >= 2:
                out[i] -= a2 * out[i - 2]
        y = out
    return Signal(amplitude * y / np.abs(y).max(), fs)


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """A 3-class x 6-file corpus for CLI round trips (kept small)."""
    root = tmp_path_factory.mktemp("small_corpus")
    from voxsel.dataset import DEFAULT_SYNTH_CLASSES
    synth_corpus(root, classes=DEFAULT_SYNTH_CLASSES[:3], n_per_class=6, seed=3)
    return root
