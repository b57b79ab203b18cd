import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geoverb.signal import (
    ComplexSpectrogram,
    StftConfig,
    Waveform,
    cola_deviation,
    frame_signal,
    istft,
    read_wav,
    stft,
    write_wav,
)

CFG = StftConfig()


def _rand(seed, n=16000):
    return np.random.default_rng(seed).standard_normal(n)


def test_defaults():
    assert CFG.n_bins == 257
    assert CFG.n_frames(16000) == 102
    assert cola_deviation(CFG) <= 1e-10


def test_config_rejects_bad_sizes():
    with pytest.raises(ValueError):
        StftConfig(win_len=400, hop=500)
    with pytest.raises(ValueError):
        StftConfig(win_len=600, fft_size=512)


def test_waveform_rejects_nonfinite():
    with pytest.raises(ValueError):
        Waveform(np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        Waveform(np.zeros(10), 0)


def test_short_signal_names_minimum_length():
    with pytest.raises(ValueError, match="400"):
        stft(Waveform(np.ones(399)))


def test_zero_in_zero_out():
    s = stft(Waveform(np.zeros(4000)))
    assert not np.any(s.data)
    assert not np.any(istft(s).samples)


def test_bin_centred_sinusoid_is_concentrated():
    k = 37
    n = np.arange(8000)
    x = np.cos(2 * np.pi * k * n / CFG.fft_size)
    s = stft(Waveform(x)).data
    power = np.abs(s) ** 2
    interior = power[4:-4]
    share = interior[:, k - 1 : k + 2].sum(axis=1) / interior.sum(axis=1)
    assert share.min() >= 0.99


def test_impulse_at_frame_centre():
    m, pos = 10, 150
    x = np.zeros(4000)
    start = m * CFG.hop - CFG.pad_left
    x[start + pos] = 1.0
    s = stft(Waveform(x)).data
    np.testing.assert_allclose(np.abs(s[m]), CFG.window[pos], atol=1e-12)


def test_frames_match_direct_dft():
    x = _rand(3, 3000)
    frames = frame_signal(x, CFG) * CFG.window
    s = stft(Waveform(x)).data
    k = np.arange(CFG.n_bins)[:, None] * np.arange(CFG.win_len)[None, :]
    basis = np.exp(-2j * np.pi * k / CFG.fft_size)
    np.testing.assert_allclose(s, frames @ basis.T, atol=1e-9)


def test_round_trip_random():
    for seed in range(5):
        x = _rand(seed)
        y = istft(stft(Waveform(x))).samples
        assert np.max(np.abs(x - y)) <= 1e-10


def test_out_len_limit():
    s = stft(Waveform(_rand(0, 4000)))
    limit = CFG.max_reconstructable(s.shape[0])
    assert len(istft(s, out_len=limit)) == limit
    with pytest.raises(ValueError, match="reconstructable"):
        istft(s, out_len=limit + 1)


def test_spectrogram_shape_checked():
    with pytest.raises(ValueError):
        ComplexSpectrogram(np.zeros((4, 100)), CFG, 1000)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    x1, x2 = rng.standard_normal((2, 2000))
    s1, s2 = stft(Waveform(x1)), stft(Waveform(x2))
    s12 = stft(Waveform(a * x1 + b * x2))
    np.testing.assert_allclose(s12.data, a * s1.data + b * s2.data, atol=1e-10)
    y = istft(s1.with_data(a * s1.data + b * s2.data)).samples
    np.testing.assert_allclose(y, a * istft(s1).samples + b * istft(s2).samples, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(400, 3000))
def test_round_trip_any_length(seed, n):
    x = np.random.default_rng(seed).standard_normal(n)
    assert np.max(np.abs(istft(stft(Waveform(x))).samples - x)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parseval_per_frame(seed):
    x = np.random.default_rng(seed).standard_normal(2000)
    frames = frame_signal(x, CFG) * CFG.window
    s = stft(Waveform(x)).data
    # one-sided spectrum: interior bins count twice
    w = np.full(CFG.n_bins, 2.0)
    w[0] = w[-1] = 1.0
    spectral = (np.abs(s) ** 2 * w).sum(axis=1) / CFG.fft_size
    np.testing.assert_allclose(spectral, (frames**2).sum(axis=1), rtol=1e-8)


def test_wav_round_trip(tmp_path):
    x = 0.5 * np.sin(np.linspace(0, 100, 1600))
    write_wav(tmp_path / "a.wav", Waveform(x))
    y = read_wav(tmp_path / "a.wav")
    np.testing.assert_allclose(y.samples, x.astype(np.float32), atol=0)
    write_wav(tmp_path / "b.wav", Waveform(x), "pcm16")
    np.testing.assert_allclose(read_wav(tmp_path / "b.wav").samples, x, atol=1 / 32768)


def test_wav_rejects_other_rate(tmp_path):
    write_wav(tmp_path / "a.wav", Waveform(np.zeros(100), 8000))
    with pytest.raises(ValueError, match="8000"):
        read_wav(tmp_path / "a.wav")
