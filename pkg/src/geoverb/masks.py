"""Complex ideal ratio masks.

The mask is the complex quotient clean / reverberant, computed through the
conjugate product ``A_s * conj(A_r) / |A_r|^2``. The denominator is the
squared modulus ``re^2 + im^2``; that is what makes ``C * A_r == A_s`` hold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import ComplexSpectrogram

DEFAULT_FLOOR = 1e-8
COMPRESS_BOUND = 10.0


@dataclass(frozen=True, eq=False)
class ComplexMask:
    data: np.ndarray
    floor_hits: np.ndarray  # boolean T x F, True where the floor replaced |A_r|^2

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.complex128)
        if not np.all(np.isfinite(d)):
            raise ValueError("mask entries must be finite")
        hits = np.zeros(d.shape, bool) if self.floor_hits is None else np.asarray(self.floor_hits, bool)
        if hits.shape != d.shape:
            raise ValueError("floor_hits must match the mask shape")
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "floor_hits", hits)

    @property
    def shape(self):
        return self.data.shape

    @property
    def valid(self) -> np.ndarray:
        return ~self.floor_hits


def _data(x) -> np.ndarray:
    return x.data if isinstance(x, (ComplexSpectrogram, ComplexMask)) else np.asarray(x)


def cirm_from_pair(clean, reverb, floor: float = DEFAULT_FLOOR) -> ComplexMask:
    s, r = _data(clean), _data(reverb)
    if s.shape != r.shape:
        raise ValueError(f"shape mismatch: clean {s.shape} vs reverberant {r.shape}")
    if not floor > 0:
        raise ValueError("floor must be positive")
    power = r.real**2 + r.imag**2
    hits = power <= floor
    denom = np.where(hits, floor, power)
    real = (s.real * r.real + s.imag * r.imag) / denom
    imag = (s.imag * r.real - s.real * r.imag) / denom
    return ComplexMask(real + 1j * imag, hits)


def apply_mask(mask, reverb):
    m, r = _data(mask), _data(reverb)
    if m.shape != r.shape:
        raise ValueError(f"shape mismatch: mask {m.shape} vs spectrogram {r.shape}")
    out = m * r
    if isinstance(reverb, ComplexSpectrogram):
        return reverb.with_data(out)
    return out


def _map_parts(x, fn):
    d = _data(x)
    out = fn(d.real) + 1j * fn(d.imag)
    if isinstance(x, ComplexMask):
        return ComplexMask(out, x.floor_hits)
    return out


def compress_mask(mask, bound: float = COMPRESS_BOUND):
    """Squash each part with ``bound * tanh(x / bound)``.

    tanh rounds to exactly 1 for large inputs, so results are clipped to the
    largest float below ``bound`` to keep them invertible.
    """
    edge = np.nextafter(bound, 0.0)
    return _map_parts(mask, lambda v: np.clip(bound * np.tanh(v / bound), -edge, edge))


def decompress_mask(mask, bound: float = COMPRESS_BOUND):
    d = _data(mask)
    if np.any(np.abs(d.real) >= bound) or np.any(np.abs(d.imag) >= bound):
        raise ValueError(f"compressed mask parts must lie strictly inside (-{bound}, {bound})")
    return _map_parts(mask, lambda v: bound * np.arctanh(v / bound))
