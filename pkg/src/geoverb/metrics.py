"""Reference-based quality measures and the evaluation report.

LSD and SI-SDR stand in for perceptual scores; ``residual_rt`` measures how
much reverberation is left by deconvolving the estimate with the known clean
signal and reading the RT60 of the residual impulse response.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_toeplitz
from scipy.signal import lfilter
from scipy.sparse.linalg import LinearOperator, cg

from .masks import apply_mask, cirm_from_pair
from .room import rt60_schroeder
from .signal import StftConfig, Waveform, istft, stft

SPECTRAL_FLOOR = 1e-8
SI_SDR_CAP = 100.0
DECONV_REG = 1e-6
EXCITATION_RANGE = 1e-8


def _samples(x) -> np.ndarray:
    return np.asarray(getattr(x, "samples", x), dtype=np.float64)


def _trim(a, b):
    n = min(a.shape[-1], b.shape[-1])
    return a[..., :n], b[..., :n]


def log_spectral_distance(ref, est, valid=None, cfg: StftConfig = StftConfig(), floor: float = SPECTRAL_FLOOR) -> float:
    """RMS over frames of the per-frame RMS (over bins) of 20 log10(|S_ref| / |S_est|).

    ``valid`` optionally restricts the bins (T x F boolean); frames without
    valid bins are skipped.
    """
    r, e = _trim(_samples(ref), _samples(est))
    if not np.any(r):
        raise ValueError("reference is silent")
    sr = np.abs(stft(Waveform(r), cfg).data)
    se = np.abs(stft(Waveform(e), cfg).data)
    d = 20.0 * np.log10(np.maximum(sr, floor) / np.maximum(se, floor))
    if valid is None:
        per_frame = np.mean(d**2, axis=1)
    else:
        valid = np.asarray(valid, bool)
        counts = valid.sum(axis=1)
        keep = counts > 0
        per_frame = (np.where(valid, d**2, 0.0).sum(axis=1)[keep]) / counts[keep]
    return float(np.sqrt(np.mean(per_frame)))


def si_sdr(ref, est) -> float:
    r, e = _trim(_samples(ref), _samples(est))
    rr = float(r @ r)
    if rr == 0.0 or not np.any(e):
        raise ValueError("si_sdr needs nonzero-energy inputs")
    target = (float(e @ r) / rr) * r
    resid = e - target
    num, den = float(target @ target), float(resid @ resid)
    if den == 0.0:
        return SI_SDR_CAP
    if num == 0.0:
        return -SI_SDR_CAP
    return float(min(SI_SDR_CAP, 10.0 * math.log10(num / den)))


def whitening_filter(x: np.ndarray, order: int = 32) -> np.ndarray:
    """FIR prediction-error filter [1, -a_1, ..., -a_p] from the autocorrelation of ``x``."""
    n = x.shape[0]
    r = np.correlate(x, x, "full")[n - 1 : n + order + 1].copy()
    r[0] *= 1.0 + 1e-9
    a = solve_toeplitz(r[:-1], r[1:])
    return np.concatenate([[1.0], -a])


def deconvolve(
    clean,
    est,
    reg: float = DECONV_REG,
    min_excited: float = 0.5,
    max_len: int | None = None,
    iters: int = 100,
) -> np.ndarray:
    """Tikhonov-regularised estimate of h (length ``max_len``) with est ~= clean * h.

    Both signals are first passed through the same whitening filter derived
    from ``clean``, which leaves h unchanged but flattens the excitation. The
    frequency-domain solution ``E C* / (|C|^2 + lam)`` then seeds conjugate
    gradients on the exact truncated-convolution normal equations, so an
    estimate cut at the clean length is not mistaken for a short response.
    ``lam`` is ``reg`` times the peak whitened clean spectral power. Raises
    if fewer than ``min_excited`` of the bins of the raw clean spectrum lie
    within ``EXCITATION_RANGE`` (80 dB) of its peak power.
    """
    c, e = _samples(clean), _samples(est)
    n = min(c.shape[0], e.shape[0])
    c, e = c[:n], e[:n]
    if not np.any(c):
        raise ValueError("clean reference is silent; deconvolution is ill-conditioned")
    m = n // 2 if max_len is None else int(max_len)
    nfft = 1 << int(math.ceil(math.log2(n + m)))
    raw = np.abs(np.fft.rfft(c, nfft)) ** 2
    excited = float(np.mean(raw > EXCITATION_RANGE * raw.max()))
    if excited < min_excited:
        raise ValueError(
            f"clean excitation too weak for deconvolution ({excited:.2f} of bins within 80 dB of the peak)"
        )
    a = whitening_filter(c)
    cw, ew = lfilter(a, 1.0, c), lfilter(a, 1.0, e)
    cf = np.fft.rfft(cw, nfft)
    power = cf.real**2 + cf.imag**2
    lam = reg * power.max()

    def fwd(h):
        return np.fft.irfft(np.fft.rfft(h, nfft) * cf, nfft)[:n]

    def adj(y):
        return np.fft.irfft(np.fft.rfft(y, nfft) * np.conj(cf), nfft)[:m]

    x0 = np.fft.irfft(np.fft.rfft(ew, nfft) * np.conj(cf) / (power + lam), nfft)[:m]
    if iters <= 0:
        return x0
    op = LinearOperator((m, m), matvec=lambda h: adj(fwd(h)) + lam * h, dtype=np.float64)
    h, _ = cg(op, adj(ew), x0=x0, maxiter=iters, rtol=1e-12)
    return h


def truncate_at_noise_floor(h: np.ndarray, fs: int = 16000, block_s: float = 0.01, margin_db: float = 10.0) -> np.ndarray:
    """Cut a measured impulse response where its decay meets the noise floor.

    The floor is the mean energy of the last 10% of 10 ms blocks. A line is
    fitted to the block envelope (dB) from its peak down to ``margin_db``
    above the floor; the response is cut where that line reaches the floor.
    """
    h = np.asarray(h, dtype=np.float64)
    k = max(1, int(round(block_s * fs)))
    nb = h.shape[0] // k
    if nb < 10:
        return h
    energy = (h[: nb * k] ** 2).reshape(nb, k).mean(axis=1)
    if energy.max() == 0.0:
        return h
    env = 10.0 * np.log10(energy / energy.max() + 1e-300)
    floor = 10.0 * np.log10(energy[-max(1, nb // 10) :].mean() / energy.max() + 1e-300)
    start = int(np.argmax(env))
    above = np.flatnonzero(env[start:] < floor + margin_db)
    stop = start + (int(above[0]) if above.size else nb - start)
    if stop - start < 2:
        return h[: (stop + 1) * k]
    t = np.arange(start, stop)
    slope, icept = np.polyfit(t, env[start:stop], 1)
    if slope >= 0:
        return h
    cross = int(math.ceil((floor - icept) / slope))
    return h[: min(nb, max(cross, stop)) * k]


def residual_rt(clean, est, fs: int = 16000) -> float:
    """RT60 of the residual response left after deconvolving ``est`` by ``clean``."""
    return rt60_schroeder(truncate_at_noise_floor(deconvolve(clean, est), fs), fs)


# ---------------------------------------------------------------- report

VARIANTS = ("reverberant", "geometry", "no-geometry", "oracle")
REPORT_FIELDS = ("tag", "id", "variant", "lsd_db", "si_sdr_db", "residual_rt_s")


@dataclass
class EvalRow:
    id: str
    variant: str
    lsd_db: float
    si_sdr_db: float
    residual_rt_s: float


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def variants(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.variant not in seen:
                seen.append(r.variant)
        return seen

    def aggregates(self) -> dict[str, dict[str, float]]:
        """Per-variant means; residual RT averages over finite entries only."""
        out = {}
        for v in self.variants():
            rows = [r for r in self.rows if r.variant == v]
            rts = [r.residual_rt_s for r in rows if math.isfinite(r.residual_rt_s)]
            out[v] = {
                "lsd_db": float(np.mean([r.lsd_db for r in rows])),
                "si_sdr_db": float(np.mean([r.si_sdr_db for r in rows])),
                "residual_rt_s": float(np.mean(rts)) if rts else float("nan"),
            }
        return out

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(REPORT_FIELDS)
            for r in sorted(self.rows, key=lambda r: (r.id, VARIANTS.index(r.variant) if r.variant in VARIANTS else 99)):
                w.writerow(["row", r.id, r.variant, repr(r.lsd_db), repr(r.si_sdr_db), repr(r.residual_rt_s)])
            for v, agg in self.aggregates().items():
                w.writerow(["aggregate", "*", v, repr(agg["lsd_db"]), repr(agg["si_sdr_db"]), repr(agg["residual_rt_s"])])


def oracle_estimate(sample, cfg: StftConfig = StftConfig()) -> tuple[Waveform, np.ndarray]:
    """Resynthesis through the ground-truth mask; also returns the valid-bin map."""
    c = stft(sample.clean, cfg)
    r = stft(sample.reverberant, cfg)
    mask = cirm_from_pair(c, r)
    return istft(apply_mask(mask, r), cfg, len(sample.clean.samples)), mask.valid


def _safe_rt(clean, est) -> float:
    try:
        return residual_rt(clean, est)
    except ValueError:
        return float("nan")


def score(sample, est, variant: str, valid=None) -> EvalRow:
    return EvalRow(
        sample.id,
        variant,
        log_spectral_distance(sample.clean, est, valid),
        si_sdr(sample.clean, est),
        _safe_rt(sample.clean, est),
    )


def eval_report(
    samples: Sequence,
    estimators: dict[str, Callable[[Sequence], list]],
    variants: Sequence[str] = VARIANTS,
) -> EvalReport:
    """Score every sample under every variant.

    ``estimators`` maps model variant names to callables that take a list of
    samples and return their estimated waveforms. The reverberant and oracle
    variants need no estimator; any other requested variant without one is an
    error.
    """
    missing = [v for v in variants if v not in ("reverberant", "oracle") and v not in estimators]
    if missing:
        raise FileNotFoundError(f"no checkpoint for variant {missing[0]!r}")
    samples = sorted(samples, key=lambda s: s.id)
    report = EvalReport()
    model_out = {v: estimators[v](samples) for v in variants if v in estimators}
    for i, s in enumerate(samples):
        for v in variants:
            if v == "reverberant":
                report.rows.append(score(s, s.reverberant, v))
            elif v == "oracle":
                est, valid = oracle_estimate(s)
                report.rows.append(score(s, est, v, valid))
            else:
                report.rows.append(score(s, model_out[v][i], v))
    return report
