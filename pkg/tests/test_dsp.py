import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voxsel import dsp
from voxsel.audio import FrameSequence, Signal, frame_signal

from conftest import SAMPLE_RATE, resonant_pulses, sawtooth, sine


def rect_frames(signal, frame_ms=40, hop_ms=10):
    return frame_signal(signal, frame_ms, hop_ms, window="rectangular")


class TestDct:
    def test_orthonormal(self):
        mat = dsp.dct_matrix(13)
        np.testing.assert_allclose(mat @ mat.T, np.eye(13), atol=1e-9)

    def test_constant_vector(self):
        c = 2.5
        out = dsp.dct_matrix(13) @ (c * np.ones(13))
        assert out[0] == pytest.approx(c * np.sqrt(13), abs=1e-9)
        np.testing.assert_allclose(out[1:], 0.0, atol=1e-9)

    def test_matches_direct_summation(self):
        # naive O(n^2) cosine-sum oracle
        rng = np.random.default_rng(5)
        x = rng.normal(size=13)
        n = 13
        expected = np.zeros(n)
        for k in range(n):
            scale = np.sqrt(1.0 / n) if k == 0 else np.sqrt(2.0 / n)
            acc = 0.0
            for j in range(n):
                acc += x[j] * np.cos(np.pi * (2 * j + 1) * k / (2 * n))
            expected[k] = scale * acc
        np.testing.assert_allclose(dsp.dct_matrix(13) @ x, expected, atol=1e-9)


class TestMelFilterbank:
    def test_nonnegative_unimodal(self):
        weights = dsp.mel_filterbank(13, 512, SAMPLE_RATE)
        assert (weights >= 0).all()
        for row in weights:
            support = np.flatnonzero(row > 0)
            peak = support[np.argmax(row[support])]
            rising = row[support[0]:peak + 1]
            falling = row[peak:support[-1] + 1]
            assert (np.diff(rising) >= -1e-12).all()
            assert (np.diff(falling) <= 1e-12).all()

    def test_impulse_gives_filter_sums(self):
        frame = np.zeros(512)
        frame[0] = 1.0
        frames = FrameSequence(frame[None, :], 512, 256, SAMPLE_RATE)
        fbe = dsp.extract_fbe(frames)[0]
        weights = dsp.mel_filterbank(13, 512, SAMPLE_RATE)
        np.testing.assert_allclose(fbe, np.log(weights.sum(axis=1)), atol=1e-9)

    def test_zero_frame_hits_floor(self):
        frames = FrameSequence(np.zeros((1, 400)), 400, 160, SAMPLE_RATE)
        np.testing.assert_allclose(dsp.extract_fbe(frames)[0],
                                   np.log(1e-10), atol=1e-12)

    def test_tone_lands_in_covering_filter(self):
        n_fft = 512
        weights = dsp.mel_filterbank(13, n_fft, SAMPLE_RATE)
        bin_freqs = np.arange(n_fft // 2 + 1) * (SAMPLE_RATE / n_fft)
        # pick the center bin of filter 4's support
        support = np.flatnonzero(weights[4] > 0.2)
        tone_bin = support[np.argmax(weights[4][support])]
        tone = np.cos(2 * np.pi * bin_freqs[tone_bin] * np.arange(512) / SAMPLE_RATE)
        frames = FrameSequence(tone[None, :], 512, 256, SAMPLE_RATE)
        fbe = dsp.extract_fbe(frames)[0]
        excluded = [k for k in range(13) if weights[k][support].sum() == 0]
        assert excluded, "tone support should be outside some filters"
        assert all(fbe[4] > fbe[k] for k in excluded)

    def test_mfcc_matches_dct_of_fbe(self):
        rng = np.random.default_rng(0)
        frames = FrameSequence(rng.normal(size=(3, 400)) * 0.2, 400, 160,
                               SAMPLE_RATE)
        fbe = dsp.extract_fbe(frames)
        np.testing.assert_allclose(dsp.extract_mfcc(frames),
                                   fbe @ dsp.dct_matrix(13).T, atol=1e-12)


class TestPitch:
    def test_sine_200hz(self):
        pitch = dsp.extract_pitch(rect_frames(sine(200.0)))
        assert pitch == pytest.approx(200.0, abs=2.0)

    def test_white_noise_unvoiced(self):
        rng = np.random.default_rng(42)
        sig = Signal(0.3 * rng.standard_normal(SAMPLE_RATE), SAMPLE_RATE)
        frames = rect_frames(sig)
        # oracle: every frame's band peak sits below the voicing threshold
        for frame in frames.frames:
            rho = dsp.normalized_autocorrelation(frame)
            lag_min = int(np.ceil(SAMPLE_RATE / 500.0))
            lag_max = min(int(SAMPLE_RATE / 50.0), frame.size // 2)
            assert rho[lag_min:lag_max + 1].max() < 0.3
        assert dsp.extract_pitch(frames) == 0.0

    def test_all_zero_unvoiced(self):
        frames = rect_frames(Signal(np.zeros(SAMPLE_RATE), SAMPLE_RATE))
        assert dsp.extract_pitch(frames) == 0.0

    @pytest.mark.parametrize("f0", [80.0, 120.0, 200.0, 350.0])
    def test_sawtooth_within_3_percent(self, f0):
        pitch = dsp.extract_pitch(rect_frames(sawtooth(f0)))
        assert abs(pitch - f0) / f0 < 0.03

    def test_sample_rate_precondition(self):
        frames = rect_frames(Signal(np.ones(800), 800))
        with pytest.raises(ValueError):
            dsp.extract_pitch(frames, fmin=50, fmax=500)


class TestHnr:
    def test_pure_sine_clamps_high(self):
        assert dsp.extract_hnr(rect_frames(sine(200.0))) == pytest.approx(40.0)

    def test_white_noise_low(self):
        rng = np.random.default_rng(7)
        sig = Signal(0.3 * rng.standard_normal(SAMPLE_RATE), SAMPLE_RATE)
        assert dsp.extract_hnr(rect_frames(sig)) <= 0.0

    def test_half_peak_is_zero_db(self):
        assert dsp.hnr_db_from_peak(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_clamp_bounds(self):
        assert dsp.hnr_db_from_peak(1.0) == 40.0
        assert dsp.hnr_db_from_peak(0.0) == -20.0


class TestIntensity:
    def test_unit_sine(self):
        value = dsp.extract_intensity(sine(200.0, amplitude=1.0))
        assert value == pytest.approx(-3.01, abs=0.05)

    def test_silence_floor(self):
        assert dsp.extract_intensity(Signal(np.zeros(100), 8000)) == -120.0

    def test_constant_one(self):
        assert dsp.extract_intensity(Signal(np.ones(100), 8000)) == pytest.approx(0.0)


class TestZcr:
    def test_alternating(self):
        zcr, _ = dsp.extract_zcr(Signal([1.0, -1.0, 1.0, -1.0], 8000))
        assert zcr == 1.0

    def test_constant(self):
        zcr, density = dsp.extract_zcr(Signal([0.5] * 10, 8000))
        assert zcr == 0.0 and density == 0.0

    def test_density_per_second(self):
        _, density = dsp.extract_zcr(Signal([1.0, -1.0, 1.0, -1.0], 4))
        assert density == pytest.approx(3.0)

    def test_zeros_count_positive(self):
        zcr, _ = dsp.extract_zcr(Signal([0.0, 1.0, 0.0, -1.0], 8000))
        # signs: + + + -  -> one change
        assert zcr == pytest.approx(1.0 / 3.0)


class TestSignalStatistics:
    def test_basic_example(self):
        stats = dsp.signal_statistics(Signal([1.0, 2.0, 3.0], 8000))
        assert stats.minimum == 1.0 and stats.maximum == 3.0
        assert stats.mean == pytest.approx(2.0)
        assert stats.variance == pytest.approx(2.0 / 3.0)
        assert stats.std == pytest.approx(np.sqrt(2.0 / 3.0))

    def test_constant_conventions(self):
        stats = dsp.signal_statistics(Signal([0.7] * 20, 8000))
        assert stats.autocorrelation == 1.0
        assert stats.variance == pytest.approx(0.0, abs=1e-15)

    def test_alternating_lag1(self):
        x = np.array([0.0, 1.0] * 10)
        stats = dsp.signal_statistics(Signal(x, 8000))
        # direct formula oracle on the mean-removed sequence
        d = x - x.mean()
        expected = np.dot(d[:-1], d[1:]) / np.sqrt(
            np.dot(d[:-1], d[:-1]) * np.dot(d[1:], d[1:]))
        assert stats.autocorrelation == pytest.approx(expected, abs=1e-12)
        assert stats.autocorrelation == pytest.approx(-1.0, abs=1e-9)

    def test_percentile_interpolation(self):
        x = np.linspace(-1, 1, 101)
        stats = dsp.signal_statistics(Signal(x, 8000))
        assert stats.percentile == pytest.approx(np.percentile(np.abs(x), 90))

    @given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=60))
    @settings(max_examples=50, deadline=None)
    def test_autocorrelation_in_range(self, values):
        stats = dsp.signal_statistics(Signal(np.asarray(values) + 1e-3, 8000))
        assert -1.0 - 1e-9 <= stats.autocorrelation <= 1.0 + 1e-9


class TestLevinsonDurbin:
    def test_recovers_ar_coefficients(self):
        # AR(2) process with known coefficients, long sample
        rng = np.random.default_rng(3)
        a_true = [1.0, -1.2, 0.7]
        n = 200000
        e = rng.standard_normal(n)
        x = np.zeros(n)
        for i in range(2, n):
            x[i] = e[i] - a_true[1] * x[i - 1] - a_true[2] * x[i - 2]
        r = np.correlate(x, x, mode="full")[n - 1:n + 2] / n
        a = dsp.levinson_durbin(r, 2)
        np.testing.assert_allclose(a, a_true, atol=0.02)

    def test_solves_toeplitz_system(self):
        # coefficients must satisfy the normal equations R a = -r
        rng = np.random.default_rng(1)
        x = rng.standard_normal(4000)
        order = 8
        r = np.correlate(x, x, mode="full")[3999:3999 + order + 1]
        a = dsp.levinson_durbin(r, order)
        R = np.array([[r[abs(i - j)] for j in range(order)] for i in range(order)])
        np.testing.assert_allclose(R @ a[1:], -r[1:order + 1], rtol=1e-8)

    def test_degenerate_returns_none(self):
        assert dsp.levinson_durbin(np.zeros(5), 4) is None


class TestFormants:
    def test_single_resonator_700(self):
        sig = resonant_pulses([700.0], [80.0])
        tracks = dsp.extract_formants(frame_signal(sig, 25, 10, "hamming"))
        assert tracks.shape[0] > 10
        assert np.nanmedian(tracks[:, 0]) == pytest.approx(700.0, abs=50.0)

    def test_two_resonators(self):
        sig = resonant_pulses([500.0, 1500.0], [70.0, 90.0])
        tracks = dsp.extract_formants(frame_signal(sig, 25, 10, "hamming"))
        assert np.nanmedian(tracks[:, 0]) == pytest.approx(500.0, abs=50.0)
        assert np.nanmedian(tracks[:, 1]) == pytest.approx(1500.0, abs=50.0)

    def test_noise_tracks_ordered(self):
        rng = np.random.default_rng(11)
        sig = Signal(0.2 * rng.standard_normal(SAMPLE_RATE), SAMPLE_RATE)
        tracks = dsp.extract_formants(frame_signal(sig, 25, 10, "hamming"))
        assert tracks.shape[0] > 0
        for row in tracks:
            vals = row[~np.isnan(row)]
            assert (np.diff(vals) >= 0).all()

    def test_silence_gives_empty_tracks(self):
        sig = Signal(np.zeros(SAMPLE_RATE), SAMPLE_RATE)
        tracks = dsp.extract_formants(frame_signal(sig, 25, 10, "hamming"))
        assert tracks.shape == (0, 3)
