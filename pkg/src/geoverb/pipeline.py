"""Inference helpers: run a trained model on waveforms or dataset samples."""

from __future__ import annotations

import numpy as np

from .model import ModelConfig, model_forward
from .room import RoomDescriptor, room_to_features
from .signal import StftConfig, Waveform, stft
from .train import InverseStft


def clip_length(cfg: ModelConfig, stft_cfg: StftConfig = StftConfig()) -> int:
    """Longest waveform length that yields exactly ``cfg.n_frames`` frames and is fully reconstructable."""
    return cfg.n_frames * stft_cfg.hop - stft_cfg.pad_left


def _forward_batch(spec: np.ndarray, feats: np.ndarray, params: dict, cfg: ModelConfig) -> np.ndarray:
    out = model_forward(spec.real, spec.imag, feats, params, cfg)
    er, ei = out.estimate
    return er.value + 1j * ei.value


def enhance_clips(clips: np.ndarray, feats: np.ndarray, params: dict, cfg: ModelConfig, batch: int = 16) -> np.ndarray:
    """Dereverberate equal-length clips (n, L) that each produce ``cfg.n_frames`` frames."""
    stft_cfg = StftConfig()
    inv = InverseStft(stft_cfg)
    length = clips.shape[-1]
    if stft_cfg.n_frames(length) != cfg.n_frames:
        raise ValueError(
            f"clip length {length} gives {stft_cfg.n_frames(length)} frames; the model expects {cfg.n_frames}"
        )
    out = np.empty(clips.shape)
    for start in range(0, clips.shape[0], batch):
        part = clips[start : start + batch]
        spec = np.stack([stft(Waveform(c), stft_cfg).data for c in part])
        est = _forward_batch(spec, feats[start : start + batch], params, cfg)
        out[start : start + batch] = inv(est.real, est.imag, length).value
    return out


def dereverb_wave(wave: Waveform, room: RoomDescriptor, params: dict, cfg: ModelConfig) -> Waveform:
    """Dereverberate a waveform of any length.

    The signal is cut into consecutive model-sized clips (the last one zero
    padded); the output is trimmed back to the input length.
    """
    feats = room_to_features(room, cfg.visual_len, cfg.visual_dim).seq
    n = len(wave.samples)
    clip = clip_length(cfg)
    count = max(1, -(-n // clip))
    padded = np.zeros(count * clip)
    padded[:n] = wave.samples
    clips = padded.reshape(count, clip)
    out = enhance_clips(clips, np.broadcast_to(feats, (count,) + feats.shape), params, cfg)
    return Waveform(out.reshape(-1)[:n], wave.sample_rate_hz)


def dereverb_samples(samples, params: dict, cfg: ModelConfig, batch: int = 16) -> list[np.ndarray]:
    """Model estimates for dataset samples, in input order."""
    if not samples:
        return []
    clips = np.stack([s.reverberant.samples for s in samples])
    feats = np.stack([s.features.seq for s in samples])
    if feats.shape[1:] != (cfg.visual_len, cfg.visual_dim):
        feats = np.stack([room_to_features(s.room, cfg.visual_len, cfg.visual_dim).seq for s in samples])
    return list(enhance_clips(clips, feats, params, cfg, batch))

