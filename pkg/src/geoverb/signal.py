"""Waveform containers, STFT/iSTFT and WAV I/O.

All transforms operate in float64. The STFT pads ``win_len - hop`` zeros on
the left and enough zeros on the right that every original sample sits in
the fully overlapped region, which makes ``istft(stft(x))`` exact on the
original samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

DEFAULT_SAMPLE_RATE = 16000


def hann_periodic(n: int) -> np.ndarray:
    k = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / n)


def cola_sqrt_window(win_len: int, hop: int) -> np.ndarray:
    """Analysis/synthesis window whose square overlap-adds to exactly 1 at ``hop``.

    The squared window is a periodic Hann of length ``win_len - hop`` smoothed
    by a ``hop``-long box. Any box of length ``hop`` tiles the line at that
    hop, so the overlap-added square is constant whatever the ratio
    ``win_len / hop``. A squared Hann only has that property when the ratio
    is an integer of at least 3, which 400/160 is not.
    """
    if hop >= win_len:
        return np.ones(win_len)
    kernel = np.concatenate([hann_periodic(win_len - hop), [0.0]])
    w2 = np.convolve(kernel, np.ones(hop))[:win_len] / kernel.sum()
    return np.sqrt(np.maximum(w2, 0.0))


@dataclass(frozen=True, eq=False)
class Waveform:
    samples: np.ndarray
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1:
            raise ValueError("waveform must be mono (1-D samples)")
        if not np.all(np.isfinite(s)):
            raise ValueError("waveform samples must be finite")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz


@dataclass(frozen=True)
class StftConfig:
    win_len: int = 400
    hop: int = 160
    fft_size: int = 512
    window: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (0 < self.hop <= self.win_len <= self.fft_size):
            raise ValueError(
                f"need 0 < hop <= win_len <= fft_size, got "
                f"hop={self.hop} win_len={self.win_len} fft_size={self.fft_size}"
            )
        w = cola_sqrt_window(self.win_len, self.hop) if self.window is None else np.asarray(self.window, float)
        if w.shape != (self.win_len,):
            raise ValueError(f"window must have length win_len={self.win_len}")
        object.__setattr__(self, "window", w)

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def pad_left(self) -> int:
        return self.win_len - self.hop

    def n_frames(self, length: int) -> int:
        """Frame count for a signal of ``length`` samples."""
        if length < self.win_len:
            raise ValueError(
                f"signal of {length} samples is shorter than one window "
                f"(minimum length {self.win_len})"
            )
        return (length - 1 + self.pad_left) // self.hop + 1

    def max_reconstructable(self, n_frames: int) -> int:
        return n_frames * self.hop - self.pad_left

    def overlap_window_power(self, n_frames: int) -> np.ndarray:
        """Overlap-added squared window over the padded frame grid."""
        total = (n_frames - 1) * self.hop + self.win_len
        acc = np.zeros(total)
        w2 = self.window**2
        for m in range(n_frames):
            acc[m * self.hop : m * self.hop + self.win_len] += w2
        return acc


def cola_deviation(cfg: StftConfig, n_frames: int = 64) -> float:
    """Relative deviation of the squared-window overlap sum in the steady region."""
    acc = cfg.overlap_window_power(n_frames)
    steady = acc[cfg.win_len : (n_frames - 1) * cfg.hop]
    return float((steady.max() - steady.min()) / steady.mean())


@dataclass(frozen=True, eq=False)
class ComplexSpectrogram:
    """``data`` is T frames x F bins; ``length`` is the signal length before padding."""

    data: np.ndarray
    config: StftConfig
    length: int

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.complex128)
        if d.ndim != 2 or d.shape[1] != self.config.n_bins:
            raise ValueError(
                f"spectrogram must be T x {self.config.n_bins}, got {d.shape}"
            )
        if not np.all(np.isfinite(d)):
            raise ValueError("spectrogram entries must be finite")
        object.__setattr__(self, "data", d)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def with_data(self, data: np.ndarray) -> "ComplexSpectrogram":
        return ComplexSpectrogram(data, self.config, self.length)


def frame_signal(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Zero-padded frames (T x win_len), unwindowed."""
    n_frames = cfg.n_frames(x.shape[0])
    total = (n_frames - 1) * cfg.hop + cfg.win_len
    padded = np.zeros(total)
    padded[cfg.pad_left : cfg.pad_left + x.shape[0]] = x
    view = np.lib.stride_tricks.sliding_window_view(padded, cfg.win_len)
    return view[:: cfg.hop][:n_frames]


def stft(wave: Waveform, cfg: StftConfig | None = None) -> ComplexSpectrogram:
    cfg = cfg or StftConfig()
    x = wave.samples if isinstance(wave, Waveform) else np.asarray(wave, float)
    if x.shape[0] == 0:
        raise ValueError("cannot transform an empty waveform")
    frames = frame_signal(x, cfg) * cfg.window
    data = np.fft.rfft(frames, n=cfg.fft_size, axis=-1)
    return ComplexSpectrogram(data, cfg, x.shape[0])


def istft(
    spec: ComplexSpectrogram,
    cfg: StftConfig | None = None,
    out_len: int | None = None,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE,
) -> Waveform:
    cfg = cfg or spec.config
    data = spec.data
    if data.shape[1] != cfg.n_bins:
        raise ValueError(f"spectrogram has {data.shape[1]} bins, config expects {cfg.n_bins}")
    n_frames = data.shape[0]
    out_len = spec.length if out_len is None else int(out_len)
    limit = cfg.max_reconstructable(n_frames)
    if out_len > limit:
        raise ValueError(f"out_len={out_len} exceeds reconstructable length {limit}")
    frames = np.fft.irfft(data, n=cfg.fft_size, axis=-1)[:, : cfg.win_len] * cfg.window
    total = (n_frames - 1) * cfg.hop + cfg.win_len
    acc = np.zeros(total)
    for m in range(n_frames):
        acc[m * cfg.hop : m * cfg.hop + cfg.win_len] += frames[m]
    norm = cfg.overlap_window_power(n_frames)
    region = slice(cfg.pad_left, cfg.pad_left + out_len)
    return Waveform(acc[region] / norm[region], sample_rate_hz)


def read_wav(path: str | Path, expected_rate: int = DEFAULT_SAMPLE_RATE) -> Waveform:
    """Read a mono PCM16 or float32 WAV. No resampling is ever done."""
    rate, data = wavfile.read(str(path))
    if rate != expected_rate:
        raise ValueError(f"{path}: sample rate {rate} Hz, expected {expected_rate} Hz")
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported sample format {data.dtype}")
    return Waveform(samples, rate)


def write_wav(path: str | Path, wave: Waveform, fmt: str = "float32") -> None:
    if fmt == "float32":
        data = wave.samples.astype(np.float32)
    elif fmt == "pcm16":
        data = np.round(np.clip(wave.samples, -1.0, 32767 / 32768) * 32768.0).astype(np.int16)
    else:
        raise ValueError(f"unknown WAV format {fmt!r} (use 'float32' or 'pcm16')")
    wavfile.write(str(path), wave.sample_rate_hz, data)
