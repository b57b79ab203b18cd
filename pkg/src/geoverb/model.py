"""Geometry-aware cross-modal conformer that predicts a complex ratio mask.

Tensors are batched: audio tokens are (B, Z, D), complex tokens are carried
as (real, imag) pairs of (B, Z, D/2) tensors. Everything is built from the
primitives in :mod:`geoverb.autodiff`, so the whole forward pass is
differentiable.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .masks import COMPRESS_BOUND

WINDOW, SHIFTED, PANOPTIC = "window", "shifted_window", "panoptic"
BLOCK_SEQUENCE = (WINDOW, PANOPTIC, SHIFTED, PANOPTIC)
NEG_INF = -1e9


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 64
    n_window: int = 16
    loops: int = 2
    heads: int = 4
    conv_kernel: int = 15
    visual_len: int = 64
    visual_dim: int = 64
    n_bins: int = 257
    n_frames: int = 102
    ff_mult: int = 4
    decoder_kernel: int = 3
    use_geometry: bool = True

    def __post_init__(self):
        if self.d_model % self.heads:
            raise ValueError("d_model must be divisible by heads")
        if self.d_model % 2:
            raise ValueError("d_model must be even (complex pairs)")
        if self.n_window % 2:
            raise ValueError("n_window must be even")
        if self.conv_kernel % 2 == 0 or self.decoder_kernel % 2 == 0:
            raise ValueError("convolution kernels must have odd length")
        if self.n_frames < self.n_window:
            raise ValueError("n_frames must be at least n_window (shifted fold needs Z >= N_w)")

    @property
    def d_complex(self) -> int:
        return self.d_model // 2

    @property
    def n_blocks(self) -> int:
        return self.loops * len(BLOCK_SEQUENCE)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


# ---------------------------------------------------------------- windows


def window_partition(seq, n_window: int):
    """(..., Z, D) -> ((..., n, N_w, D), Z). Right-pads with zeros."""
    seq = ad.as_tensor(seq)
    z = seq.shape[-2]
    pad = (-z) % n_window
    x = ad.pad_axis(seq, 0, pad, axis=-2) if pad else seq
    lead = x.shape[:-2]
    return ad.reshape(x, lead + ((z + pad) // n_window, n_window, x.shape[-1])), z


def window_merge(windows, z: int):
    windows = ad.as_tensor(windows)
    lead = windows.shape[:-3]
    n, w, d = windows.shape[-3:]
    flat = ad.reshape(windows, lead + (n * w, d))
    if n * w == z:
        return flat
    return flat[(..., slice(0, z), slice(None))]


def window_key_mask(z: int, n_window: int) -> np.ndarray:
    """Additive (n, 1, N_w) mask that hides padded key rows."""
    n = -(-z // n_window)
    pos = np.arange(n * n_window).reshape(n, 1, n_window)
    return np.where(pos < z, 0.0, NEG_INF)


def shifted_fold(seq, n_window: int):
    """Circular shift by N_w/2: row i moves to (i + N_w/2) mod Z."""
    seq = ad.as_tensor(seq)
    if seq.shape[-2] < n_window:
        raise ValueError("shifted fold needs a sequence at least one window long")
    return ad.roll(seq, n_window // 2, axis=-2)


def shifted_unfold(seq, n_window: int):
    return ad.roll(ad.as_tensor(seq), -(n_window // 2), axis=-2)


# ---------------------------------------------------------------- position bias


def window_bias_index(n_window: int) -> np.ndarray:
    """Table index of b_{j-i} for a window; table covers k in [-N_w+1, N_w-1]."""
    i = np.arange(n_window)
    return (i[None, :] - i[:, None]) + n_window - 1


def panoptic_bias_index(n: int) -> np.ndarray:
    """Table index for the wrapped symmetric distance of the panoptic block."""
    i = np.arange(n)
    d = np.abs(i[None, :] - i[:, None])
    return np.where(d <= n // 2, d, n - d)


def bias_matrix(table, kind: str, z: int):
    """(heads, Z, Z) bias gathered from a (heads, L) table."""
    table = ad.as_tensor(table)
    if kind == PANOPTIC:
        if table.shape[-1] != z // 2 + 1:
            raise ValueError(f"panoptic table needs {z // 2 + 1} entries for Z={z}")
        idx = panoptic_bias_index(z)
    else:
        if table.shape[-1] != 2 * z - 1:
            raise ValueError(f"window table needs {2 * z - 1} entries for Z={z}")
        idx = window_bias_index(z)
    return table[(slice(None), idx)]


# ---------------------------------------------------------------- attention


def _split_heads(x, heads):
    lead, z, d = x.shape[:-2], x.shape[-2], x.shape[-1]
    x = ad.reshape(x, lead + (z, heads, d // heads))
    axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
    return ad.transpose(x, axes)


def _merge_heads(x):
    lead, h, z, dh = x.shape[:-3], x.shape[-3], x.shape[-2], x.shape[-1]
    axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
    return ad.reshape(ad.transpose(x, axes), lead + (z, h * dh))


def attention_weights(q, k, bias=None, key_mask=None):
    """softmax(q k^T / sqrt(d_head) + bias + key_mask) over the key axis."""
    scores = ad.matmul(q, ad.swap_last(k)) * (1.0 / math.sqrt(q.shape[-1]))
    if bias is not None:
        scores = scores + bias
    if key_mask is not None:
        scores = scores + key_mask
    return ad.softmax(scores, axis=-1)


def multihead_attention(xq, xkv, p: dict, heads: int, bias=None, key_mask=None, return_weights=False):
    q = _split_heads(ad.matmul(xq, p["wq"]), heads)
    k = _split_heads(ad.matmul(xkv, p["wk"]), heads)
    v = _split_heads(ad.matmul(xkv, p["wv"]), heads)
    w = attention_weights(q, k, bias, key_mask)
    out = ad.linear(_merge_heads(ad.matmul(w, v)), p["wo"], p.get("bo"))
    return (out, w) if return_weights else out


def attention_with_bias(x, p: dict, table, kind: str, heads: int, key_mask=None, return_weights=False):
    """Self-attention with a relative-position bias over the last-but-one axis.

    ``kind`` is ``"window"`` (bias b_{j-i}, table length 2Z-1) or
    ``"panoptic"`` (wrapped symmetric distance, table length Z//2+1).
    """
    x = ad.as_tensor(x)
    z = x.shape[-2]
    b = bias_matrix(table, PANOPTIC if kind == PANOPTIC else WINDOW, z)
    if key_mask is not None:
        key_mask = key_mask[..., None, :, :]  # broadcast over heads
    return multihead_attention(x, x, p, heads, b, key_mask, return_weights)


def cross_modal_attention(audio, visual, p: dict, heads: int, return_weights=False):
    """Queries from audio, keys/values from visual, softmax over visual positions."""
    audio, visual = ad.as_tensor(audio), ad.as_tensor(visual)
    if audio.shape[-2] != visual.shape[-2] and visual.shape[-2] != 1:
        raise ValueError(
            f"audio length {audio.shape[-2]} and visual length {visual.shape[-2]} differ"
        )
    return multihead_attention(audio, visual, p, 1 if heads is None else heads, return_weights=return_weights)


def complex_self_attention(xr, xi, p: dict):
    """Single-head attention on complex tokens.

    Scores are Re(Q K^H) / sqrt(D); the real softmax weights act on the real
    and imaginary parts of V jointly.
    """
    qr, qi = ad.cmatmul(xr, xi, p["wq_re"], p["wq_im"])
    kr, ki = ad.cmatmul(xr, xi, p["wk_re"], p["wk_im"])
    vr, vi = ad.cmatmul(xr, xi, p["wv_re"], p["wv_im"])
    scores = ad.matmul(qr, ad.swap_last(kr)) + ad.matmul(qi, ad.swap_last(ki))
    w = ad.softmax(scores * (1.0 / math.sqrt(qr.shape[-1])), axis=-1)
    return ad.matmul(w, vr), ad.matmul(w, vi)


# ---------------------------------------------------------------- visual path


def interpolation_matrix(n: int, t: int) -> np.ndarray:
    """(t, n) linear-interpolation weights mapping n positions onto t."""
    pos = np.arange(t) * (n - 1) / (t - 1)
    lo = np.minimum(np.floor(pos).astype(int), n - 2)
    frac = pos - lo
    m = np.zeros((t, n))
    m[np.arange(t), lo] = 1.0 - frac
    m[np.arange(t), lo + 1] += frac
    return m


def resample_visual(features, target_len: int, p: dict):
    """Interpolate (..., N, D_v) features to ``target_len`` rows, then project to D."""
    features = ad.as_tensor(features)
    n = features.shape[-2]
    if n < 2 or target_len < 2:
        raise ValueError("resample_visual needs N, T >= 2")
    m = interpolation_matrix(n, target_len)
    return ad.linear(ad.matmul(m, features), p["w"], p.get("b"))


# ---------------------------------------------------------------- conformer


def _ln(x, p, prefix):
    return ad.layer_norm(x, p[prefix + "_g"], p[prefix + "_b"])


def feed_forward(x, p, prefix):
    h = ad.swish(ad.linear(_ln(x, p, prefix + ".ln"), p[prefix + ".w1"], p[prefix + ".b1"]))
    return ad.linear(h, p[prefix + ".w2"], p[prefix + ".b2"])


def conv_module(x, p, prefix):
    h = ad.linear(_ln(x, p, prefix + ".ln"), p[prefix + ".pw1"], p[prefix + ".pw1_b"])
    d = h.shape[-1] // 2
    h = ad.mul(h[..., :d], ad.sigmoid(h[..., d:]))
    h = ad.swish(ad.depthwise_conv1d(h, p[prefix + ".dw"]) + p[prefix + ".dw_b"])
    return ad.linear(h, p[prefix + ".pw2"], p[prefix + ".pw2_b"])


def _sub(p: dict, prefix: str) -> dict:
    n = len(prefix) + 1
    return {k[n:]: v for k, v in p.items() if k.startswith(prefix + ".")}


def geometry_self_attention(x, p, prefix, kind, cfg: ModelConfig):
    """Biased self-attention with window partition / shifted fold as ``kind`` requires."""
    att = _sub(p, prefix)
    table = p[prefix + ".rpe"]
    if kind == PANOPTIC:
        return attention_with_bias(x, att, table, PANOPTIC, cfg.heads)
    nw = cfg.n_window
    src = shifted_fold(x, nw) if kind == SHIFTED else x
    win, z = window_partition(src, nw)
    out = attention_with_bias(win, att, table, WINDOW, cfg.heads, window_key_mask(z, nw))
    merged = window_merge(out, z)
    return shifted_unfold(merged, nw) if kind == SHIFTED else merged


def conformer_block(audio, visual, p: dict, prefix: str, kind: str, cfg: ModelConfig):
    x = ad.as_tensor(audio)
    x = x + 0.5 * feed_forward(x, p, prefix + ".ff1")
    cross = _sub(p, prefix + ".cross")
    x = x + cross_modal_attention(
        ad.layer_norm(x, cross["ln_a_g"], cross["ln_a_b"]),
        ad.layer_norm(visual, cross["ln_v_g"], cross["ln_v_b"]),
        cross,
        cfg.heads,
    )
    x = x + geometry_self_attention(_ln(x, p, prefix + ".attn.ln"), p, prefix + ".attn", kind, cfg)
    x = x + conv_module(x, p, prefix + ".conv")
    x = x + 0.5 * feed_forward(x, p, prefix + ".ff2")
    return _ln(x, p, prefix + ".ln_out")


# ---------------------------------------------------------------- decoder


def crelu(xr, xi):
    return ad.relu(xr), ad.relu(xi)


def mask_decoder(tokens, p: dict, cfg: ModelConfig, trace: list | None = None):
    """Tokens (B, T, D) -> compressed-domain mask (real, imag), each (B, T, F).

    Stages: CReLU, complex conv along time, complex self-attention, complex
    dense to F bins, and a range normalisation ``K tanh(x / K)`` that puts
    every part inside the compressed domain.
    """
    tokens = ad.as_tensor(tokens)
    dc = cfg.d_complex
    xr, xi = tokens[..., :dc], tokens[..., dc:]

    def mark(stage):
        if trace is not None:
            trace.append(stage)

    xr, xi = crelu(xr, xi)
    mark("crelu")
    cr = ad.sub(ad.conv1d(xr, p["dec.conv_re"]), ad.conv1d(xi, p["dec.conv_im"])) + p["dec.conv_b_re"]
    ci = ad.add(ad.conv1d(xr, p["dec.conv_im"]), ad.conv1d(xi, p["dec.conv_re"])) + p["dec.conv_b_im"]
    mark("complex_conv")
    ar, ai = complex_self_attention(cr, ci, _sub(p, "dec.csa"))
    xr, xi = cr + ar, ci + ai
    mark("self_attention")
    mr, mi = ad.cmatmul(xr, xi, p["dec.dense_re"], p["dec.dense_im"])
    mr, mi = mr + p["dec.dense_b_re"], mi + p["dec.dense_b_im"]
    mark("dense")
    k = COMPRESS_BOUND
    mr, mi = k * ad.tanh(mr * (1.0 / k)), k * ad.tanh(mi * (1.0 / k))
    mark("normalization")
    return mr, mi


def decompress_t(x, bound: float = COMPRESS_BOUND):
    """Differentiable inverse of ``bound * tanh(x / bound)``."""
    u = ad.as_tensor(x) * (1.0 / bound)
    lim = 1.0 - 1e-12
    u = ad.clamp_min(u, -lim)
    u = -ad.clamp_min(-u, -lim)
    return 0.5 * bound * ad.log(ad.div(1.0 + u, 1.0 - u))


# ---------------------------------------------------------------- parameters


def _block_param_shapes(cfg: ModelConfig, prefix: str, kind: str) -> list[tuple[str, tuple, str]]:
    d, f, k = cfg.d_model, cfg.d_model * cfg.ff_mult, cfg.conv_kernel
    rows = []
    for ff in ("ff1", "ff2"):
        rows += [
            (f"{prefix}.{ff}.ln_g", (d,), "ones"),
            (f"{prefix}.{ff}.ln_b", (d,), "zeros"),
            (f"{prefix}.{ff}.w1", (d, f), "glorot"),
            (f"{prefix}.{ff}.b1", (f,), "zeros"),
            (f"{prefix}.{ff}.w2", (f, d), "glorot_out"),
            (f"{prefix}.{ff}.b2", (d,), "zeros"),
        ]
    c = prefix + ".cross"
    rows += [
        (f"{c}.ln_a_g", (d,), "ones"),
        (f"{c}.ln_a_b", (d,), "zeros"),
        (f"{c}.ln_v_g", (d,), "ones"),
        (f"{c}.ln_v_b", (d,), "zeros"),
        (f"{c}.wq", (d, d), "glorot"),
        (f"{c}.wk", (d, d), "glorot"),
        (f"{c}.wv", (d, d), "glorot"),
        (f"{c}.wo", (d, d), "glorot_out"),
        (f"{c}.bo", (d,), "zeros"),
    ]
    a = prefix + ".attn"
    table_len = cfg.n_frames // 2 + 1 if kind == PANOPTIC else 2 * cfg.n_window - 1
    rows += [
        (f"{a}.ln_g", (d,), "ones"),
        (f"{a}.ln_b", (d,), "zeros"),
        (f"{a}.wq", (d, d), "glorot"),
        (f"{a}.wk", (d, d), "glorot"),
        (f"{a}.wv", (d, d), "glorot"),
        (f"{a}.wo", (d, d), "glorot_out"),
        (f"{a}.bo", (d,), "zeros"),
        (f"{a}.rpe", (cfg.heads, table_len), "zeros"),
    ]
    v = prefix + ".conv"
    rows += [
        (f"{v}.ln_g", (d,), "ones"),
        (f"{v}.ln_b", (d,), "zeros"),
        (f"{v}.pw1", (d, 2 * d), "glorot"),
        (f"{v}.pw1_b", (2 * d,), "zeros"),
        (f"{v}.dw", (k, d), "conv"),
        (f"{v}.dw_b", (d,), "zeros"),
        (f"{v}.pw2", (d, d), "glorot_out"),
        (f"{v}.pw2_b", (d,), "zeros"),
        (f"{prefix}.ln_out_g", (d,), "ones"),
        (f"{prefix}.ln_out_b", (d,), "zeros"),
    ]
    return rows


def param_shapes(cfg: ModelConfig) -> list[tuple[str, tuple, str]]:
    """Stable (name, shape, init) enumeration of every learnable array."""
    d, dc, fb = cfg.d_model, cfg.d_complex, cfg.n_bins
    rows = [
        ("enc.w_re", (fb, dc), "glorot"),
        ("enc.w_im", (fb, dc), "glorot"),
        ("enc.b_re", (dc,), "zeros"),
        ("enc.b_im", (dc,), "zeros"),
        ("enc.mag_w", (fb, d), "glorot"),
        ("enc.mag_b", (d,), "zeros"),
    ]
    for part in ("wq", "wk", "wv"):
        rows += [(f"enc.csa.{part}_re", (dc, dc), "glorot"), (f"enc.csa.{part}_im", (dc, dc), "glorot")]
    rows += [
        ("vis.w", (cfg.visual_dim, d), "glorot"),
        ("vis.b", (d,), "zeros"),
    ]
    for i in range(cfg.n_blocks):
        kind = BLOCK_SEQUENCE[i % len(BLOCK_SEQUENCE)]
        rows += _block_param_shapes(cfg, f"blk{i}", kind)
    kd = cfg.decoder_kernel
    rows += [
        ("dec.conv_re", (kd, dc, dc), "conv_full"),
        ("dec.conv_im", (kd, dc, dc), "conv_full"),
        ("dec.conv_b_re", (dc,), "zeros"),
        ("dec.conv_b_im", (dc,), "zeros"),
    ]
    for part in ("wq", "wk", "wv"):
        rows += [(f"dec.csa.{part}_re", (dc, dc), "glorot_small"), (f"dec.csa.{part}_im", (dc, dc), "glorot_small")]
    rows += [
        ("dec.dense_re", (dc, fb), "dense_out"),
        ("dec.dense_im", (dc, fb), "dense_out"),
        ("dec.dense_b_re", (fb,), "ones"),
        ("dec.dense_b_im", (fb,), "zeros"),
    ]
    return rows


def _init_array(rng, shape, kind):
    if kind == "zeros":
        return np.zeros(shape)
    if kind == "ones":
        return np.ones(shape)
    if kind == "conv":
        return rng.standard_normal(shape) / math.sqrt(shape[0])
    if kind == "conv_full":
        return rng.standard_normal(shape) / math.sqrt(shape[0] * shape[1])
    fan_in, fan_out = shape[-2], shape[-1]
    std = math.sqrt(2.0 / (fan_in + fan_out))
    if kind == "glorot_out":
        std *= 0.5
    elif kind == "glorot_small":
        std *= 0.3
    elif kind == "dense_out":
        std = 0.02 / math.sqrt(fan_in)
    return rng.standard_normal(shape) * std


def init_params(cfg: ModelConfig, seed: int = 0) -> dict[str, Tensor]:
    rng = np.random.default_rng(seed)
    return {
        name: Tensor(_init_array(rng, shape, kind), requires_grad=True, name=name)
        for name, shape, kind in param_shapes(cfg)
    }


# ---------------------------------------------------------------- full model


@dataclass
class ForwardResult:
    mask_compressed: tuple  # (real, imag) tensors in the compressed domain
    mask: tuple  # decompressed (real, imag)
    estimate: tuple  # (real, imag) estimated clean spectrogram


def audio_tokens(spec_re: np.ndarray, spec_im: np.ndarray, p: dict):
    """Spectrogram frames -> real tokens via complex projection, complex attention and log-magnitude."""
    power = spec_re**2 + spec_im**2
    scale = np.sqrt(power.mean(axis=(-2, -1), keepdims=True)) + 1e-8
    xr, xi = spec_re / scale, spec_im / scale
    logmag = np.log(power / scale**2 + 1e-6)
    ar, ai = ad.cmatmul(xr, xi, p["enc.w_re"], p["enc.w_im"])
    ar, ai = ar + p["enc.b_re"], ai + p["enc.b_im"]
    sr, si = complex_self_attention(ar, ai, _sub(p, "enc.csa"))
    ar, ai = ar + sr, ai + si
    mag = ad.linear(logmag * 0.1, p["enc.mag_w"], p["enc.mag_b"])
    return ad.concat([ar, ai], axis=-1) + mag


def model_forward(spec_re, spec_im, features, p: dict, cfg: ModelConfig, trace: list | None = None) -> ForwardResult:
    """Predict the mask for reverberant spectrogram(s) (B, T, F) with geometry (B, N, D_v)."""
    spec_re = np.asarray(spec_re, float)
    spec_im = np.asarray(spec_im, float)
    if spec_re.shape[-1] != cfg.n_bins or spec_re.shape[-2] != cfg.n_frames:
        raise ValueError(
            f"spectrogram shape {spec_re.shape[-2:]} does not match config "
            f"({cfg.n_frames}, {cfg.n_bins})"
        )
    feats = np.asarray(features, float)
    if feats.shape[-2:] != (cfg.visual_len, cfg.visual_dim):
        raise ValueError(
            f"geometry features {feats.shape[-2:]} do not match config "
            f"({cfg.visual_len}, {cfg.visual_dim})"
        )
    if not cfg.use_geometry:
        feats = np.zeros_like(feats)
    x = audio_tokens(spec_re, spec_im, p)
    visual = resample_visual(feats, cfg.n_frames, _sub(p, "vis"))
    for i in range(cfg.n_blocks):
        kind = BLOCK_SEQUENCE[i % len(BLOCK_SEQUENCE)]
        x = conformer_block(x, visual, p, f"blk{i}", kind, cfg)
        if trace is not None:
            trace.append(f"block:{kind}")
    cr, ci = mask_decoder(x, p, cfg, trace)
    mr, mi = decompress_t(cr), decompress_t(ci)
    er, ei = ad.cmul(mr, mi, spec_re, spec_im)
    return ForwardResult((cr, ci), (mr, mi), (er, ei))


# ---------------------------------------------------------------- checkpoints


def save_checkpoint(path: str | Path, params: dict, cfg: ModelConfig, meta: dict | None = None, extra: dict | None = None) -> None:
    """Write ``<path>.json`` (manifest) and ``<path>.bin`` (little-endian float64 blob).

    ``extra`` holds additional named arrays (e.g. optimizer moments) appended
    after the parameters.
    """
    path = Path(path)
    entries, chunks, offset = [], [], 0
    arrays = [(k, t.value if isinstance(t, Tensor) else t) for k, t in params.items()]
    arrays += list((extra or {}).items())
    for name, arr in arrays:
        a = np.ascontiguousarray(arr, dtype="<f8")
        entries.append({"name": name, "shape": list(a.shape), "offset": offset})
        chunks.append(a.tobytes())
        offset += a.size
    n_params = len(params)
    manifest = {
        "config": cfg.to_dict(),
        "meta": meta or {},
        "params": entries[:n_params],
        "extra": entries[n_params:],
        "dtype": "<f8",
    }
    path.with_suffix(".json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    path.with_suffix(".bin").write_bytes(b"".join(chunks))


def load_checkpoint(path: str | Path, expect: ModelConfig | None = None):
    """Return ``(params, cfg, meta, extra)``; raises if ``expect`` disagrees with the stored config."""
    path = Path(path)
    mpath = path.with_suffix(".json")
    if not mpath.is_file():
        raise FileNotFoundError(f"checkpoint manifest {mpath} not found")
    manifest = json.loads(mpath.read_text())
    cfg = ModelConfig.from_dict(manifest["config"])
    if expect is not None and expect != cfg:
        raise ValueError("checkpoint config does not match the requested model config")
    blob = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<f8")

    def read(entries):
        out = {}
        for e in entries:
            n = int(np.prod(e["shape"])) if e["shape"] else 1
            out[e["name"]] = blob[e["offset"] : e["offset"] + n].reshape(e["shape"]).astype(np.float64)
        return out

    raw = read(manifest["params"])
    expected = [name for name, _, _ in param_shapes(cfg)]
    if list(raw) != expected:
        raise ValueError("checkpoint parameter list does not match the model config")
    params = {k: Tensor(v, requires_grad=True, name=k) for k, v in raw.items()}
    return params, cfg, manifest.get("meta", {}), read(manifest.get("extra", []))
