"""Losses, pseudo-labelling, optimiser and the training loop."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .kernels import nearest_centroid
from .masks import cirm_from_pair
from .model import ModelConfig, init_params, load_checkpoint, model_forward, save_checkpoint
from .signal import StftConfig, hann_periodic, stft


class NonFiniteLossError(FloatingPointError):
    def __init__(self, step: int, value: float):
        super().__init__(f"non-finite loss {value} at step {step}")
        self.step = step


# ---------------------------------------------------------------- losses


@dataclass(frozen=True)
class LossWeights:
    lam: float = 1.0
    mu: float = 0.1

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("loss weights must be nonnegative")


def total_loss(sp, atm, w: LossWeights = LossWeights()):
    return w.lam * sp + w.mu * atm


def _parts(x):
    if isinstance(x, tuple):
        return ad.as_tensor(x[0]), ad.as_tensor(x[1])
    d = getattr(x, "data", x)
    d = np.asarray(d)
    return Tensor(d.real), Tensor(d.imag)


def spectrogram_loss(pred, clean, valid=None, magnitude_only: bool = False) -> Tensor:
    """Mean squared error over the real and imaginary parts of valid bins.

    ``pred`` and ``clean`` are complex arrays, spectrogram objects or
    (real, imag) tensor pairs. ``valid`` is a boolean array over bins; by
    default every bin counts.
    """
    pr, pi = _parts(pred)
    cr, ci = _parts(clean)
    if pr.shape != cr.shape:
        raise ValueError(f"shape mismatch: pred {pr.shape} vs clean {cr.shape}")
    valid = np.ones(pr.shape, bool) if valid is None else np.broadcast_to(np.asarray(valid, bool), pr.shape)
    n = int(valid.sum())
    if n == 0:
        raise ValueError("no valid bins")
    wmask = valid.astype(float)
    if magnitude_only:
        pm = ad.sqrt(ad.square(pr) + ad.square(pi) + 1e-12)
        cm = np.sqrt(cr.value**2 + ci.value**2 + 1e-12)
        return ad.tsum(ad.square(pm - cm) * wmask) * (1.0 / n)
    err = ad.square(pr - cr) + ad.square(pi - ci)
    return ad.tsum(err * wmask) * (1.0 / (2 * n))


# ---------------------------------------------------------------- differentiable istft


class InverseStft:
    """istft as graph operations: irfft by matrix product, windowed overlap-add, normalisation."""

    def __init__(self, cfg: StftConfig = StftConfig()):
        self.cfg = cfg
        n = np.arange(cfg.win_len)
        k = np.arange(cfg.n_bins)
        coef = np.full(cfg.n_bins, 2.0)
        coef[0] = 1.0
        if cfg.fft_size % 2 == 0:
            coef[-1] = 1.0
        ang = 2 * np.pi * np.outer(k, n) / cfg.fft_size
        self.basis_re = coef[:, None] * np.cos(ang) / cfg.fft_size * cfg.window[None, :]
        self.basis_im = -coef[:, None] * np.sin(ang) / cfg.fft_size * cfg.window[None, :]

    def __call__(self, spec_re, spec_im, length: int) -> Tensor:
        cfg = self.cfg
        t = ad.as_tensor(spec_re).shape[-2]
        if length > cfg.max_reconstructable(t):
            raise ValueError(f"length {length} exceeds reconstructable length {cfg.max_reconstructable(t)}")
        frames = ad.matmul(spec_re, self.basis_re) + ad.matmul(spec_im, self.basis_im)
        acc = ad.overlap_add(frames, cfg.hop)
        norm = cfg.overlap_window_power(t)
        region = slice(cfg.pad_left, cfg.pad_left + length)
        return acc[(..., region)] * (1.0 / norm[region])


# ---------------------------------------------------------------- stub acoustic encoder


def mel_filterbank(n_mels: int, n_fft: int, fs: int, fmin: float = 0.0, fmax: float | None = None) -> np.ndarray:
    """(n_fft//2+1, n_mels) triangular filters on the HTK mel scale."""
    fmax = fs / 2 if fmax is None else fmax

    def hz_to_mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def mel_to_hz(m):
        return 700.0 * (10 ** (m / 2595.0) - 1.0)

    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    freqs = np.arange(n_fft // 2 + 1) * fs / n_fft
    fb = np.zeros((freqs.size, n_mels))
    for m in range(n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs - lo) / (mid - lo)
        down = (hi - freqs) / (hi - mid)
        fb[:, m] = np.maximum(0.0, np.minimum(up, down))
    return fb


@dataclass(frozen=True)
class EncoderConfig:
    win_len: int = 400
    hop: int = 160
    fft_size: int = 512
    n_mels: int = 40
    stack: int = 3
    dim: int = 32
    seed: int = 0
    sample_rate_hz: int = 16000
    log_floor: float = 1e-10


class StubEncoder:
    """Frozen differentiable log-mel encoder with frame stacking and a fixed orthogonal projection."""

    def __init__(self, cfg: EncoderConfig = EncoderConfig()):
        self.cfg = cfg
        n = np.arange(cfg.win_len)
        k = np.arange(cfg.fft_size // 2 + 1)
        ang = 2 * np.pi * np.outer(n, k) / cfg.fft_size
        w = hann_periodic(cfg.win_len)[:, None]
        self.dft_re = w * np.cos(ang)
        self.dft_im = -w * np.sin(ang)
        self.mel = mel_filterbank(cfg.n_mels, cfg.fft_size, cfg.sample_rate_hz)
        rng = np.random.default_rng(cfg.seed)
        q, r = np.linalg.qr(rng.standard_normal((cfg.n_mels * cfg.stack, cfg.n_mels * cfg.stack)))
        q = q * np.sign(np.diag(r))[None, :]
        self.projection = q[:, : cfg.dim]

    @property
    def min_length(self) -> int:
        return self.cfg.win_len + (self.cfg.stack - 1) * self.cfg.hop

    def n_latents(self, length: int) -> int:
        return 1 + (length - self.cfg.win_len) // self.cfg.hop - (self.cfg.stack - 1)

    def __call__(self, wave) -> Tensor:
        """(..., L) samples -> (..., J, dim) latents."""
        wave = ad.as_tensor(getattr(wave, "samples", wave))
        if wave.shape[-1] < self.min_length:
            raise ValueError(f"wave too short: need at least {self.min_length} samples")
        frames = ad.frame(wave, self.cfg.win_len, self.cfg.hop)
        power = ad.square(ad.matmul(frames, self.dft_re)) + ad.square(ad.matmul(frames, self.dft_im))
        logmel = ad.log(ad.clamp_min(ad.matmul(power, self.mel), self.cfg.log_floor))
        j = logmel.shape[-2] - (self.cfg.stack - 1)
        stacked = ad.concat([logmel[(..., slice(s, s + j), slice(None))] for s in range(self.cfg.stack)], axis=-1)
        return ad.matmul(stacked, self.projection)


def stub_acoustic_encode(wave, encoder: StubEncoder | None = None) -> Tensor:
    return (encoder or StubEncoder())(wave)


# ---------------------------------------------------------------- k-means and pseudo-labels


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: list[float]
    iterations: int


def _inertia(points, centroids, labels) -> float:
    diff = points - centroids[labels]
    return float((diff * diff).sum())


def kmeans_fit(points, k: int, seed: int = 0, max_iters: int = 100, init: np.ndarray | None = None) -> KMeansResult:
    """Lloyd's algorithm from ``k`` distinct sampled points; empty clusters move to the farthest point."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if k < 2:
        raise ValueError("K must be at least 2")
    distinct = np.unique(points, axis=0)
    if distinct.shape[0] < k:
        raise ValueError(f"need at least K={k} distinct points, got {distinct.shape[0]}")
    if init is None:
        rng = np.random.default_rng(seed)
        centroids = distinct[np.sort(rng.choice(distinct.shape[0], size=k, replace=False))].copy()
    else:
        centroids = np.array(init, dtype=np.float64)
    labels = nearest_centroid(points, centroids)
    history = [_inertia(points, centroids, labels)]
    it = 0
    for it in range(1, max_iters + 1):
        new = np.zeros_like(centroids)
        counts = np.bincount(labels, minlength=k)
        np.add.at(new, labels, points)
        filled = counts > 0
        new[filled] /= counts[filled, None]
        if not filled.all():
            dist = ((points - centroids[labels]) ** 2).sum(-1)
            for c in np.flatnonzero(~filled):
                far = int(np.argmax(dist))
                new[c] = points[far]
                dist[far] = -1.0
        centroids = new
        new_labels = nearest_centroid(points, centroids)
        history.append(_inertia(points, centroids, new_labels))
        if np.array_equal(new_labels, labels) and filled.all():
            labels = new_labels
            break
        labels = new_labels
    return KMeansResult(centroids, labels, history, it)


@dataclass
class PseudoLabeler:
    encoder: StubEncoder = field(default_factory=StubEncoder)
    centroids: np.ndarray | None = None

    @property
    def k(self) -> int:
        if self.centroids is None:
            raise ValueError("pseudo-labeler is not fitted")
        return self.centroids.shape[0]

    def fit(self, waves: Sequence[np.ndarray], k: int = 50, seed: int = 0, max_iters: int = 50) -> KMeansResult:
        lat = np.concatenate([self.encoder(w).value for w in waves], axis=0)
        res = kmeans_fit(lat, k, seed=seed, max_iters=max_iters)
        self.centroids = res.centroids
        return res


def pseudo_labels(clean, labeler: PseudoLabeler) -> np.ndarray:
    if labeler.centroids is None:
        raise ValueError("pseudo-labeler is not fitted")
    lat = labeler.encoder(clean).value
    flat = lat.reshape(-1, lat.shape[-1])
    return nearest_centroid(np.ascontiguousarray(flat), labeler.centroids).reshape(lat.shape[:-1])


def atm_loss(est_wave, labels, labeler: PseudoLabeler, w, b) -> Tensor:
    """Cross-entropy of the classifier on estimated-audio latents against clean pseudo-labels."""
    lat = labeler.encoder(est_wave)
    labels = np.asarray(labels, dtype=np.int64)
    j = min(lat.shape[-2], labels.shape[-1])
    if j <= 0:
        raise ValueError("no overlap between latents and labels")
    lat = lat[(..., slice(0, j), slice(None))]
    labels = labels[..., :j]
    logp = ad.log_softmax(ad.linear(lat, w, b), axis=-1)
    lead = np.indices(labels.shape, sparse=True)
    picked = logp[tuple(lead) + (labels,)]
    return -ad.mean(picked)


# ---------------------------------------------------------------- optimiser


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params: dict, **kw) -> "AdamState":
        return cls(
            {k: np.zeros(np.shape(_val(p))) for k, p in params.items()},
            {k: np.zeros(np.shape(_val(p))) for k, p in params.items()},
            **kw,
        )


def _val(p):
    return p.value if isinstance(p, Tensor) else p


def adam_step(params: dict, grads: dict, state: AdamState, lr: float | None = None):
    """Bias-corrected Adam update applied in place; returns ``(params, state)``."""
    lr = state.lr if lr is None else lr
    state.step += 1
    c1 = 1.0 - state.beta1**state.step
    c2 = 1.0 - state.beta2**state.step
    for k, p in params.items():
        g = np.asarray(grads[k], dtype=np.float64)
        val = _val(p)
        if g.shape != val.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {k} {val.shape}")
        m, v = state.m[k], state.v[k]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        val -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


# ---------------------------------------------------------------- training


@dataclass
class TrainConfig:
    data_dir: str | None = None
    model: dict = field(default_factory=dict)
    lam: float = 1.0
    mu: float = 0.1
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    cosine: bool = False
    seed: int = 0
    epochs: int = 10
    batch_size: int = 16
    checkpoint_every: int = 1
    val_fraction: float = 0.1
    n_clusters: int = 50
    kmeans_iters: int = 50
    encoder_seed: int = 0
    magnitude_only: bool = False
    max_steps: int | None = None

    def __post_init__(self):
        LossWeights(self.lam, self.mu)
        for name in ("epochs", "batch_size", "checkpoint_every", "n_clusters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name}: must be at least 1")
        if not self.lr > 0:
            raise ValueError("lr: must be positive")
        if not 0 <= self.val_fraction < 1:
            raise ValueError("val_fraction: must lie in [0, 1)")

    @property
    def weights(self) -> LossWeights:
        return LossWeights(self.lam, self.mu)

    def model_config(self, **overrides) -> ModelConfig:
        return ModelConfig.from_dict({**self.model, **overrides})

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"{sorted(unknown)[0]}: unknown training config field")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class Batchable:
    """Arrays prepared once per dataset: spectrograms, valid bins, features, clean labels."""

    ids: list
    reverb: np.ndarray  # (n, T, F) complex
    clean: np.ndarray  # (n, T, F) complex
    valid: np.ndarray  # (n, T, F) bool
    features: np.ndarray  # (n, N, D_v)
    labels: np.ndarray  # (n, J) int
    length: int

    def __len__(self):
        return len(self.ids)

    def take(self, idx):
        return Batchable(
            [self.ids[i] for i in idx],
            self.reverb[idx],
            self.clean[idx],
            self.valid[idx],
            self.features[idx],
            self.labels[idx],
            self.length,
        )


def prepare(samples, labeler: PseudoLabeler | None, stft_cfg: StftConfig = StftConfig()) -> Batchable:
    rev, cln, val, feats, labs = [], [], [], [], []
    lengths = {len(s.clean.samples) for s in samples}
    if len(lengths) != 1:
        raise ValueError("all samples must have the same length")
    for s in samples:
        r = stft(s.reverberant, stft_cfg)
        c = stft(s.clean, stft_cfg)
        rev.append(r.data)
        cln.append(c.data)
        val.append(cirm_from_pair(c, r).valid)
        feats.append(s.features.seq)
        if labeler is not None and labeler.centroids is not None:
            labs.append(pseudo_labels(s.clean.samples, labeler))
    n = len(samples)
    return Batchable(
        [s.id for s in samples],
        np.stack(rev),
        np.stack(cln),
        np.stack(val),
        np.stack(feats),
        np.stack(labs) if labs else np.zeros((n, 0), np.int64),
        lengths.pop(),
    )


@dataclass
class StepLoss:
    total: Tensor
    sp: float
    atm: float


class Objective:
    """Total loss of the model (and classifier head) on a batch."""

    def __init__(self, cfg: ModelConfig, weights: LossWeights, labeler: PseudoLabeler, stft_cfg=StftConfig(), magnitude_only=False):
        self.cfg = cfg
        self.weights = weights
        self.labeler = labeler
        self.istft = InverseStft(stft_cfg)
        self.magnitude_only = magnitude_only

    def __call__(self, params: dict, head: dict, batch: Batchable) -> StepLoss:
        out = model_forward(batch.reverb.real, batch.reverb.imag, batch.features, params, self.cfg)
        er, ei = out.estimate
        sp = spectrogram_loss((er, ei), batch.clean, batch.valid, self.magnitude_only)
        if self.weights.mu > 0:
            wave = self.istft(er, ei, batch.length)
            atm = atm_loss(wave, batch.labels, self.labeler, head["atm.w"], head["atm.b"])
        else:
            wave = self.istft(Tensor(er.value), Tensor(ei.value), batch.length)
            atm = atm_loss(wave, batch.labels, self.labeler, Tensor(head["atm.w"].value), Tensor(head["atm.b"].value))
        total = total_loss(sp, atm, self.weights) if self.weights.mu > 0 else self.weights.lam * sp
        return StepLoss(total, float(sp.value), float(atm.value))


def init_head(dim: int, k: int) -> dict:
    return {
        "atm.w": Tensor(np.zeros((dim, k)), requires_grad=True, name="atm.w"),
        "atm.b": Tensor(np.zeros(k), requires_grad=True, name="atm.b"),
    }


HISTORY_FIELDS = ("epoch", "train_sp", "train_atm", "train_total", "val_total")


@dataclass
class TrainResult:
    params: dict
    head: dict
    labeler: PseudoLabeler
    history: list[dict]
    step_losses: list[float]
    model_config: ModelConfig
    adam: AdamState


def _checkpoint(path, res_params, head, labeler, adam, cfg: ModelConfig, tcfg: TrainConfig, epoch: int, variant: str):
    extra = {"labeler.centroids": labeler.centroids}
    for k, t in head.items():
        extra[k] = t.value
    for k in adam.m:
        extra[f"adam.m.{k}"] = adam.m[k]
        extra[f"adam.v.{k}"] = adam.v[k]
    meta = {"epoch": epoch, "adam_step": adam.step, "variant": variant, "train_config": tcfg.to_dict()}
    save_checkpoint(path, res_params, cfg, meta, extra)


def variant_tag(cfg: ModelConfig, tcfg: TrainConfig) -> str:
    tags = ["geometry" if cfg.use_geometry else "no-geometry"]
    if tcfg.mu == 0:
        tags.append("no-atm")
    return "+".join(tags)


def evaluate_loss(objective: Objective, params: dict, head: dict, data: Batchable, batch_size: int) -> float:
    if len(data) == 0:
        return float("nan")
    total = 0.0
    for start in range(0, len(data), batch_size):
        idx = np.arange(start, min(start + batch_size, len(data)))
        total += objective(params, head, data.take(idx)).total.value.item() * len(idx)
    return total / len(data)


def train_loop(
    train_samples,
    tcfg: TrainConfig,
    val_samples=(),
    out_dir: str | Path | None = None,
    resume: str | Path | None = None,
    model_overrides: dict | None = None,
    log: Callable[[str], None] | None = None,
    on_epoch: Callable[[int, dict, ModelConfig], None] | None = None,
) -> TrainResult:
    """Train the model; returns parameters, classifier head and per-epoch history.

    Shuffling is seeded by ``(seed, epoch)`` so a run resumed from an epoch
    checkpoint continues exactly as the uninterrupted run would. ``on_epoch``
    is called with (epoch, params, model config) after every epoch, e.g. for
    model selection; it must not modify the parameters.
    """
    if len(train_samples) == 0:
        raise ValueError("training set is empty")
    mcfg = tcfg.model_config(**(model_overrides or {}))
    labeler = PseudoLabeler(StubEncoder(EncoderConfig(seed=tcfg.encoder_seed)))
    start_epoch = 0
    if resume is not None:
        params, mcfg_ck, meta, extra = load_checkpoint(resume)
        if mcfg_ck != mcfg:
            raise ValueError("checkpoint config does not match the requested model config")
        labeler.centroids = extra["labeler.centroids"]
        head = {k: Tensor(extra[k], requires_grad=True, name=k) for k in ("atm.w", "atm.b")}
        adam = AdamState(
            {k: extra[f"adam.m.{k}"] for k in list(params) + list(head)},
            {k: extra[f"adam.v.{k}"] for k in list(params) + list(head)},
            step=meta["adam_step"],
            lr=tcfg.lr,
            beta1=tcfg.beta1,
            beta2=tcfg.beta2,
            eps=tcfg.eps,
        )
        start_epoch = meta["epoch"]
    else:
        params = init_params(mcfg, tcfg.seed)
        labeler.fit([s.clean.samples for s in train_samples], k=tcfg.n_clusters, seed=tcfg.seed, max_iters=tcfg.kmeans_iters)
        head = init_head(labeler.encoder.cfg.dim, labeler.k)
        adam = AdamState.init({**params, **head}, lr=tcfg.lr, beta1=tcfg.beta1, beta2=tcfg.beta2, eps=tcfg.eps)
    data = prepare(train_samples, labeler)
    vdata = prepare(list(val_samples), labeler) if len(val_samples) else None
    objective = Objective(mcfg, tcfg.weights, labeler, magnitude_only=tcfg.magnitude_only)
    everything = {**params, **head}
    steps_per_epoch = -(-len(data) // tcfg.batch_size)
    total_steps = tcfg.max_steps or steps_per_epoch * tcfg.epochs
    history, step_losses = [], []
    out = Path(out_dir) if out_dir is not None else None
    tag = variant_tag(mcfg, tcfg)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    step = adam.step
    for epoch in range(start_epoch, tcfg.epochs):
        order = np.random.default_rng([tcfg.seed, epoch]).permutation(len(data))
        sums = np.zeros(3)
        count = 0
        for start in range(0, len(order), tcfg.batch_size):
            if tcfg.max_steps is not None and step >= tcfg.max_steps:
                break
            batch = data.take(order[start : start + tcfg.batch_size])
            loss = objective(params, head, batch)
            value = loss.total.value.item()
            if not math.isfinite(value):
                raise NonFiniteLossError(step + 1, value)
            ad.zero_grad(everything.values())
            ad.backward(loss.total)
            lr = tcfg.lr
            if tcfg.cosine:
                lr = tcfg.lr * 0.5 * (1.0 + math.cos(math.pi * step / total_steps))
            adam_step(everything, {k: t.grad for k, t in everything.items()}, adam, lr)
            step = adam.step
            step_losses.append(value)
            sums += (loss.sp, loss.atm, value)
            count += 1
        if count == 0:
            break
        mean_sp, mean_atm, mean_total = sums / count
        val_total = evaluate_loss(objective, params, head, vdata, tcfg.batch_size) if vdata else float("nan")
        row = {"epoch": epoch + 1, "train_sp": mean_sp, "train_atm": mean_atm, "train_total": mean_total, "val_total": val_total}
        history.append(row)
        if log:
            log(f"epoch {epoch + 1}: train_total={mean_total:.6g} val_total={val_total:.6g}")
        if out is not None:
            if (epoch + 1) % tcfg.checkpoint_every == 0:
                _checkpoint(out / f"ckpt_epoch{epoch + 1:04d}", params, head, labeler, adam, mcfg, tcfg, epoch + 1, tag)
            _checkpoint(out / "final", params, head, labeler, adam, mcfg, tcfg, epoch + 1, tag)
        if on_epoch is not None:
            on_epoch(epoch + 1, params, mcfg)
    if out is not None:
        write_history(out / "loss_history.csv", history, append_from=resume)
    return TrainResult(params, head, labeler, history, step_losses, mcfg, adam)


def write_history(path: Path, rows: list[dict], append_from=None) -> None:
    """Write loss_history.csv; when resuming, earlier rows already on disk are kept."""
    previous = []
    if append_from is not None and path.is_file():
        with path.open(newline="") as fh:
            first_new = rows[0]["epoch"] if rows else None
            previous = [r for r in csv.DictReader(fh) if first_new is None or int(r["epoch"]) < first_new]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=HISTORY_FIELDS)
        w.writeheader()
        for r in previous:
            w.writerow(r)
        for r in rows:
            w.writerow({k: (repr(float(v)) if k != "epoch" else int(v)) for k, v in r.items()})


def load_trained(path) -> tuple[dict, ModelConfig, dict]:
    """Load model parameters, config and metadata from a training checkpoint."""
    params, cfg, meta, _ = load_checkpoint(path)
    return params, cfg, meta


def with_overrides(tcfg: TrainConfig, **kw) -> TrainConfig:
    return replace(tcfg, **{k: v for k, v in kw.items() if v is not None})
