"""Shoebox room simulation, RT60 estimation and scene datasets."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import signal as sps

from . import kernels
from .signal import DEFAULT_SAMPLE_RATE, Waveform, read_wav, write_wav

WALLS = ("x0", "x1", "y0", "y1", "z0", "z1")
MIN_CLEARANCE = 0.1


@dataclass(frozen=True)
class RoomDescriptor:
    """Shoebox room; absorption is ordered (x0, x1, y0, y1, z0, z1)."""

    dims: tuple[float, float, float]
    absorption: tuple[float, ...]
    source_pos: tuple[float, float, float]
    listener_pos: tuple[float, float, float]
    max_order: int = 10
    speed_of_sound: float = 343.0

    def __post_init__(self):
        dims = tuple(float(v) for v in self.dims)
        absorption = tuple(float(v) for v in self.absorption)
        src = tuple(float(v) for v in self.source_pos)
        lst = tuple(float(v) for v in self.listener_pos)
        if len(dims) != 3 or any(not (v > 0) for v in dims):
            raise ValueError(f"dims must be three positive lengths, got {dims}")
        if len(absorption) != 6 or any(not (0 < a <= 1) for a in absorption):
            raise ValueError(f"absorption must be six coefficients in (0, 1], got {absorption}")
        for name, pos in (("source_pos", src), ("listener_pos", lst)):
            if len(pos) != 3:
                raise ValueError(f"{name} must be a 3D point")
            for p, d in zip(pos, dims):
                if not (MIN_CLEARANCE <= p <= d - MIN_CLEARANCE):
                    raise ValueError(
                        f"{name} {pos} must be inside the room with "
                        f">= {MIN_CLEARANCE} m wall clearance"
                    )
        if src == lst:
            raise ValueError("source_pos and listener_pos must differ")
        if int(self.max_order) < 0:
            raise ValueError("max_order must be non-negative")
        if not (self.speed_of_sound > 0):
            raise ValueError("speed_of_sound must be positive")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "absorption", absorption)
        object.__setattr__(self, "source_pos", src)
        object.__setattr__(self, "listener_pos", lst)
        object.__setattr__(self, "max_order", int(self.max_order))

    @property
    def direct_distance(self) -> float:
        return math.dist(self.source_pos, self.listener_pos)

    @property
    def volume(self) -> float:
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def wall_areas(self) -> tuple[float, ...]:
        lx, ly, lz = self.dims
        return (ly * lz, ly * lz, lx * lz, lx * lz, lx * ly, lx * ly)

    def sabine_rt60(self) -> float:
        absorbing_area = sum(s * a for s, a in zip(self.wall_areas, self.absorption))
        return 0.161 * self.volume / absorbing_area

    def scaled(self, factor: float) -> "RoomDescriptor":
        return RoomDescriptor(
            tuple(v * factor for v in self.dims),
            self.absorption,
            tuple(v * factor for v in self.source_pos),
            tuple(v * factor for v in self.listener_pos),
            self.max_order,
            self.speed_of_sound,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RoomDescriptor":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass(frozen=True, eq=False)
class Rir:
    samples: np.ndarray
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or not np.all(np.isfinite(s)):
            raise ValueError("RIR must be a finite 1-D sequence")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.shape[0]


def image_source_rir(
    room: RoomDescriptor,
    fs: int = DEFAULT_SAMPLE_RATE,
    max_len_s: float = 3.0,
    highpass_hz: float | None = None,
    truncate_s: float | None = None,
) -> Rir:
    """Image-source RIR with nearest-sample taps.

    Each image contributes ``prod(sqrt(1 - alpha)^hits) / (4 pi d)`` at
    ``round(d / c * fs)``. ``truncate_s`` drops taps past that time. Raises
    if the resulting length exceeds ``max_len_s``.

    ``highpass_hz`` applies the DC-removal filter of the classic image
    method (2nd-order Butterworth). Without it, all-positive taps that land
    on the same sample add coherently and the late decay is overestimated.
    """
    src = np.array(room.source_pos)
    lst = np.array(room.listener_pos)
    dims = np.array(room.dims)
    beta = np.sqrt(1.0 - np.array(room.absorption))
    c = float(room.speed_of_sound)
    last = kernels.image_source_scan(src, lst, dims, beta, room.max_order, float(fs), c)
    length = last + 1
    if truncate_s is not None:
        length = min(length, int(round(truncate_s * fs)))
    cap = int(round(max_len_s * fs))
    if length > cap:
        raise ValueError(
            f"max_order={room.max_order} gives an RIR of {length} samples, "
            f"above the length cap max_len_s={max_len_s} ({cap} samples)"
        )
    out = np.zeros(length)
    kernels.image_source_scan(src, lst, dims, beta, room.max_order, float(fs), c, out)
    if highpass_hz:
        out = dc_highpass(out, fs, highpass_hz)
    return Rir(out, fs)


def dc_highpass(x: np.ndarray, fs: int, cutoff_hz: float) -> np.ndarray:
    """2nd-order Butterworth high-pass used to strip the DC build-up of image-source taps."""
    b, a = sps.butter(2, cutoff_hz / (fs / 2), btype="high")
    return sps.lfilter(b, a, x)


def order_for_duration(room: RoomDescriptor, duration_s: float) -> int:
    """Reflection order that completes the response up to ``duration_s``."""
    reach = room.speed_of_sound * duration_s
    return max(1, int(math.ceil(reach / min(room.dims))))


def convolve_rir(clean: Waveform, rir: Rir) -> Waveform:
    if clean.sample_rate_hz != rir.sample_rate_hz:
        raise ValueError(
            f"sample-rate mismatch: clean {clean.sample_rate_hz} Hz, rir {rir.sample_rate_hz} Hz"
        )
    return Waveform(sps.convolve(clean.samples, rir.samples, mode="full"), clean.sample_rate_hz)


def schroeder_curve_db(h: np.ndarray) -> np.ndarray:
    """Backward-integrated energy decay, normalised to 0 dB at the start."""
    energy = np.cumsum((h**2)[::-1])[::-1]
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(energy / energy[0])


def _decay_range_db(h: np.ndarray, fs: int) -> float:
    e = h**2
    win = max(1, int(0.01 * fs))
    env = np.convolve(e, np.ones(win) / win, mode="same")
    tail = e[int(0.9 * len(e)) :]
    floor = tail.mean() if tail.size else 0.0
    peak = env.max()
    if floor <= 0:
        return math.inf
    return 10.0 * math.log10(peak / floor)


def rt60_schroeder(rir: Rir | np.ndarray, fs: int | None = None) -> float:
    """RT60 as 3x the T20 slope fitted over -5..-25 dB of the Schroeder curve."""
    if isinstance(rir, Rir):
        h, fs = rir.samples, rir.sample_rate_hz
    else:
        h, fs = np.asarray(rir, float), fs or DEFAULT_SAMPLE_RATE
    if not np.any(h != 0):
        raise ValueError("RIR has no energy")
    if _decay_range_db(h, fs) < 20.0:
        raise ValueError("decay range is less than 20 dB above the noise floor; RT60 unreliable")
    edc = schroeder_curve_db(h)
    below5 = np.flatnonzero(edc <= -5.0)
    below25 = np.flatnonzero(edc <= -25.0)
    if below25.size == 0:
        raise ValueError("energy decay never reaches -25 dB; RT60 unreliable")
    i5, i25 = int(below5[0]), int(below25[0])
    if i25 - i5 < 2:
        return 3.0 * (i25 - i5) / fs
    t = np.arange(i5, i25 + 1) / fs
    seg = edc[i5 : i25 + 1]
    slope = np.polyfit(t, seg, 1)[0]
    return float(-60.0 / slope)


FEATURE_CHANNELS = {
    "hit_distance": 0,
    "hit_absorption": 1,
    "source_distance": 2,
    "source_bearing": 3,
    "height": 4,
    "floor_ceiling_absorption": 5,
}
DISTANCE_CHANNELS = (0, 2, 4)
ABSORPTION_CHANNELS = (1, 5)


@dataclass(frozen=True, eq=False)
class GeometryFeatures:
    seq: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.seq, dtype=np.float64)
        if s.ndim != 2 or not np.all(np.isfinite(s)):
            raise ValueError("geometry features must be a finite N x D_v array")
        object.__setattr__(self, "seq", s)

    @property
    def shape(self) -> tuple[int, int]:
        return self.seq.shape


def _ray_hits(room: RoomDescriptor, angles: np.ndarray):
    lx, ly, _ = room.dims
    px, py, _ = room.listener_pos
    a = room.absorption
    cos, sin = np.cos(angles), np.sin(angles)
    tiny = 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(cos > tiny, (lx - px) / cos, np.where(cos < -tiny, -px / cos, np.inf))
        ty = np.where(sin > tiny, (ly - py) / sin, np.where(sin < -tiny, -py / sin, np.inf))
    ax = np.where(cos > 0, a[1], a[0])
    ay = np.where(sin > 0, a[3], a[2])
    dist = np.minimum(tx, ty)
    tie = np.abs(tx - ty) <= 1e-9 * np.maximum(dist, 1.0)
    absorb = np.where(tie, 0.5 * (ax + ay), np.where(tx < ty, ax, ay))
    return dist, absorb


def room_to_features(room: RoomDescriptor, n: int = 64, d_v: int = 64) -> GeometryFeatures:
    """Ray-cast geometry descriptor from the listener position.

    Ray ``i`` points at azimuth ``2 pi i / n``. The first six channels hold the
    raw scalars listed in ``FEATURE_CHANNELS``; the rest are sin/cos encodings
    of those scalars at geometrically spaced frequencies.
    """
    if n < 8 or d_v < 8:
        raise ValueError("n and d_v must be at least 8")
    angles = 2.0 * np.pi * np.arange(n) / n
    dist, absorb = _ray_hits(room, angles)
    s = np.subtract(room.source_pos, room.listener_pos)
    horizontal = math.hypot(s[0], s[1])
    if horizontal < 1e-9:
        bearing = np.zeros(n)
    else:
        rel = math.atan2(s[1], s[0]) - angles
        bearing = np.angle(np.exp(1j * rel))
    raw = np.stack(
        [
            dist,
            absorb,
            np.full(n, room.direct_distance),
            bearing,
            np.full(n, room.dims[2]),
            np.full(n, 0.5 * (room.absorption[4] + room.absorption[5])),
        ],
        axis=1,
    )
    n_extra = d_v - raw.shape[1]
    n_pairs = n_extra // 2
    freqs = 2.0 ** np.arange(-2, -2 + math.ceil(n_pairs / raw.shape[1]))
    enc = []
    for k in range(n_pairs):
        ch, f = k % raw.shape[1], freqs[k // raw.shape[1]]
        enc += [np.sin(f * raw[:, ch]), np.cos(f * raw[:, ch])]
    if n_extra % 2:
        enc.append(np.cos(bearing))
    seq = np.concatenate([raw, np.stack(enc, axis=1)], axis=1) if enc else raw
    return GeometryFeatures(seq)


def add_noise(wave: Waveform, snr_db: float, seed: int) -> Waveform:
    """Additive white Gaussian noise scaled to hit ``snr_db`` exactly."""
    if math.isinf(snr_db) and snr_db > 0:
        return Waveform(wave.samples.copy(), wave.sample_rate_hz)
    power = np.mean(wave.samples**2)
    if power == 0:
        raise ValueError("cannot set an SNR on a silent waveform")
    noise = np.random.default_rng(seed).standard_normal(len(wave))
    noise *= math.sqrt(power / (np.mean(noise**2) * 10.0 ** (snr_db / 10.0)))
    return Waveform(wave.samples + noise, wave.sample_rate_hz)


def measure_snr_db(signal: np.ndarray, noise: np.ndarray) -> float:
    return 10.0 * math.log10(np.mean(signal**2) / np.mean(noise**2))


def _resonator(freq: float, bw: float, fs: int):
    r = math.exp(-math.pi * bw / fs)
    theta = 2.0 * math.pi * freq / fs
    return [1.0 - r], [1.0, -2.0 * r * math.cos(theta), r * r]


def synth_speech(rng: np.random.Generator, n_samples: int, fs: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    """Speech-like test signal.

    Syllables of glottal pulse trains with drifting pitch pass through three
    drifting formant resonators; some syllables carry a shaped-noise burst.
    Pauses between syllables keep a -50 dB background floor so the signal is
    never digitally silent. Peak amplitude is 0.5.
    """
    out = np.zeros(n_samples)
    t = int(rng.uniform(0.02, 0.12) * fs)
    while t < n_samples:
        dur = int(rng.uniform(0.08, 0.25) * fs)
        seg_len = min(dur, n_samples - t)
        if seg_len < int(0.02 * fs):
            break
        f0 = rng.uniform(90.0, 240.0) * (1 + rng.uniform(-0.25, 0.25) * np.linspace(0, 1, seg_len))
        phase = np.cumsum(f0 / fs)
        pulses = np.diff(np.floor(phase), prepend=0.0)
        pulses[0] = 1.0
        voiced = np.zeros(seg_len)
        formants = np.sort(rng.uniform([300, 900, 2000], [900, 2200, 3600]))
        drift = rng.uniform(0.85, 1.15, size=3)
        zi = [None, None, None]
        half = seg_len // 2
        for part, (lo, hi) in enumerate(((0, half), (half, seg_len))):
            chunk = pulses[lo:hi]
            for k in range(3):
                freq = formants[k] * (drift[k] if part else 1.0)
                b, a = _resonator(freq, 80.0 + 40.0 * k, fs)
                if zi[k] is None:
                    zi[k] = np.zeros(2)
                chunk, zi[k] = sps.lfilter(b, a, chunk, zi=zi[k])
            voiced[lo:hi] = chunk
        env = np.sin(np.pi * np.linspace(0, 1, seg_len)) ** 0.6
        seg = voiced * env / (np.abs(voiced).max() + 1e-12)
        if rng.random() < 0.4:
            blen = min(seg_len, int(rng.uniform(0.03, 0.08) * fs))
            burst = rng.standard_normal(blen)
            b, a = sps.butter(2, rng.uniform(2500.0, 6000.0) / (fs / 2), btype="high")
            burst = sps.lfilter(b, a, burst) * np.hanning(blen)
            start = 0 if rng.random() < 0.5 else seg_len - blen
            seg[start : start + blen] += 0.4 * burst / (np.abs(burst).max() + 1e-12)
        out[t : t + seg_len] += seg * rng.uniform(0.4, 1.0)
        t += seg_len + int(rng.uniform(0.03, 0.2) * fs)
    peak = np.abs(out).max()
    if peak > 0:
        out *= 0.5 / peak
    out += 0.5 * 10 ** (-50 / 20) * rng.standard_normal(n_samples) / math.sqrt(2)
    return out


@dataclass(frozen=True)
class DatasetSpec:
    """Sampling ranges for synthetic scenes (metres, seconds, Hz)."""

    dims_min: tuple[float, float, float] = (3.0, 3.0, 2.5)
    dims_max: tuple[float, float, float] = (10.0, 8.0, 4.0)
    absorption_range: tuple[float, float] = (0.15, 0.6)
    absorption_jitter: float = 0.05
    clearance: float = 0.5
    min_source_distance: float = 0.7
    max_source_distance: float | None = None
    duration_s: float = 1.0
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE
    rir_duration_s: float = 0.6
    rir_highpass_hz: float = 100.0
    noise_snr_db: float | None = None
    level: float = 0.5

    def validate(self) -> None:
        if len(self.dims_min) != 3 or len(self.dims_max) != 3:
            raise ValueError("dims: need three values for dims_min and dims_max")
        for lo, hi in zip(self.dims_min, self.dims_max):
            if not (0 < lo <= hi):
                raise ValueError(f"dims: ranges must satisfy 0 < min <= max, got {lo}..{hi}")
        lo, hi = self.absorption_range
        if not (0 < lo <= hi <= 1):
            raise ValueError(f"absorption_range: need 0 < lo <= hi <= 1, got {lo}..{hi}")
        if self.clearance < MIN_CLEARANCE:
            raise ValueError(f"clearance: must be at least {MIN_CLEARANCE} m")
        if any(2 * self.clearance >= d for d in self.dims_min):
            raise ValueError("clearance: too large for the smallest room dims")
        inner = [d - 2 * self.clearance for d in self.dims_min]
        if self.min_source_distance >= math.hypot(*inner):
            raise ValueError("min_source_distance: infeasible in the smallest room")
        if self.max_source_distance is not None and self.max_source_distance <= self.min_source_distance:
            raise ValueError("max_source_distance: must exceed min_source_distance")
        if self.duration_s * self.sample_rate_hz < 400:
            raise ValueError("duration_s: shorter than one analysis window")
        if not (0 < self.level <= 1):
            raise ValueError("level: must be in (0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        kw = {}
        for k, v in d.items():
            if k not in cls.__dataclass_fields__:
                raise ValueError(f"{k}: unknown dataset field")
            kw[k] = tuple(v) if isinstance(v, list) else v
        return cls(**kw)


@dataclass(eq=False)
class SceneSample:
    """A clean/reverberant pair with its room.

    ``rir`` is referenced to the direct path: shifted so the direct arrival is
    at index 0 and scaled to unit direct gain. ``reverberant`` equals
    ``convolve_rir(clean, rir)`` truncated to the clean length, plus noise.
    """

    id: str
    clean: Waveform
    reverberant: Waveform
    rir: Rir
    features: GeometryFeatures
    room: RoomDescriptor
    noise_snr_db: float | None = None
    seed: int = 0
    rt60_s: float = field(default=float("nan"))


def sample_room(rng: np.random.Generator, spec: DatasetSpec) -> RoomDescriptor:
    dims = tuple(rng.uniform(spec.dims_min, spec.dims_max))
    base = rng.uniform(*spec.absorption_range)
    lo, hi = spec.absorption_range
    absorption = tuple(
        np.clip(base + rng.uniform(-spec.absorption_jitter, spec.absorption_jitter, 6), lo, hi)
    )
    c = spec.clearance
    for _ in range(1000):
        src = tuple(rng.uniform(c, d - c) for d in dims)
        lst = tuple(rng.uniform(c, d - c) for d in dims)
        d = math.dist(src, lst)
        if d >= spec.min_source_distance and (spec.max_source_distance is None or d <= spec.max_source_distance):
            break
    else:
        raise ValueError("source distance: could not place source and listener within the allowed range")
    room = RoomDescriptor(dims, absorption, src, lst, 0)
    order = order_for_duration(room, spec.rir_duration_s)
    return RoomDescriptor(dims, absorption, src, lst, order)


def direct_referenced_rir(
    room: RoomDescriptor, fs: int, highpass_hz: float | None = None, duration_s: float | None = None
) -> Rir:
    """RIR shifted so the direct path sits at sample 0 with unit gain; cut at ``duration_s`` after it.

    ``highpass_hz`` filters the reflections only. The direct tap stays a
    pure impulse, so the direct-path signal keeps its full band.
    """
    d = room.direct_distance
    truncate = None if duration_s is None else d / room.speed_of_sound + duration_s
    raw = image_source_rir(room, fs, truncate_s=truncate)
    k0 = int(math.floor(d / room.speed_of_sound * fs + 0.5))
    h = raw.samples[k0:] * (4.0 * math.pi * d)
    if highpass_hz:
        direct = h[0]
        h[0] = 0.0
        h = dc_highpass(h, fs, highpass_hz)
        h[0] += direct
    return Rir(h, fs)


def make_scene(
    index: int,
    seed: int,
    spec: DatasetSpec,
    clean_generator: Callable[[np.random.Generator, int, int], np.ndarray] = synth_speech,
    n_features: int = 64,
    d_features: int = 64,
) -> SceneSample:
    rng = np.random.default_rng([seed, index])
    fs = spec.sample_rate_hz
    n = int(round(spec.duration_s * fs))
    room = sample_room(rng, spec)
    rir = direct_referenced_rir(room, fs, spec.rir_highpass_hz, spec.rir_duration_s)
    dry = Waveform(clean_generator(rng, n, fs), fs)
    wet = convolve_rir(dry, rir).samples[:n]
    if spec.noise_snr_db is not None:
        wet = add_noise(Waveform(wet, fs), spec.noise_snr_db, int(rng.integers(2**31))).samples
    gain = spec.level / np.abs(wet).max()
    return SceneSample(
        id=f"s{index:05d}",
        clean=Waveform(dry.samples * gain, fs),
        reverberant=Waveform(wet * gain, fs),
        rir=rir,
        features=room_to_features(room, n_features, d_features),
        room=room,
        noise_snr_db=spec.noise_snr_db,
        seed=seed,
        rt60_s=rt60_schroeder(rir),
    )


def dataset_generate(
    spec: DatasetSpec,
    count: int,
    seed: int,
    clean_generator: Callable = synth_speech,
    start: int = 0,
) -> list[SceneSample]:
    """Generate ``count`` scenes; scene ``i`` depends only on ``(seed, start + i)``."""
    spec.validate()
    if count < 1:
        raise ValueError("count: must be at least 1")
    return [make_scene(start + i, seed, spec, clean_generator) for i in range(count)]


MANIFEST_FIELDS = (
    ["id", "length_m", "width_m", "height_m"]
    + [f"alpha_{w}" for w in WALLS]
    + ["rt60_s", "seed", "noise_snr_db"]
)


def manifest_row(s: SceneSample) -> dict:
    row = {"id": s.id}
    row.update(zip(("length_m", "width_m", "height_m"), (repr(v) for v in s.room.dims)))
    row.update({f"alpha_{w}": repr(a) for w, a in zip(WALLS, s.room.absorption)})
    row["rt60_s"] = repr(s.rt60_s)
    row["seed"] = str(s.seed)
    row["noise_snr_db"] = "" if s.noise_snr_db is None else repr(s.noise_snr_db)
    return row


def write_dataset(samples: Sequence[SceneSample], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in sorted(samples, key=lambda s: s.id):
        d = out / s.id
        d.mkdir(exist_ok=True)
        write_wav(d / "clean.wav", s.clean)
        write_wav(d / "reverb.wav", s.reverberant)
        write_wav(d / "rir.wav", Waveform(s.rir.samples, s.rir.sample_rate_hz))
        (d / "room.json").write_text(json.dumps(s.room.to_dict(), sort_keys=True, indent=2) + "\n")
        (d / "features.f32").write_bytes(s.features.seq.astype("<f4").tobytes())
    with open(out / "manifest.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS, lineterminator="\n")
        w.writeheader()
        for s in sorted(samples, key=lambda s: s.id):
            w.writerow(manifest_row(s))
    return out


def read_features(path: str | Path, n: int = 64, d_v: int = 64) -> GeometryFeatures:
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f4")
    if raw.size != n * d_v:
        raise ValueError(f"{path}: expected {n}x{d_v} float32 values, found {raw.size}")
    return GeometryFeatures(raw.reshape(n, d_v).astype(np.float64))


def load_dataset(data_dir: str | Path, n: int = 64, d_v: int = 64) -> list[SceneSample]:
    root = Path(data_dir)
    manifest = root / "manifest.csv"
    if not manifest.is_file():
        raise FileNotFoundError(f"no manifest.csv in {root}")
    samples = []
    with open(manifest, newline="") as fh:
        for row in csv.DictReader(fh):
            d = root / row["id"]
            room = RoomDescriptor.from_dict(json.loads((d / "room.json").read_text()))
            rir = read_wav(d / "rir.wav")
            snr = row.get("noise_snr_db") or None
            samples.append(
                SceneSample(
                    id=row["id"],
                    clean=read_wav(d / "clean.wav"),
                    reverberant=read_wav(d / "reverb.wav"),
                    rir=Rir(rir.samples, rir.sample_rate_hz),
                    features=read_features(d / "features.f32", n, d_v),
                    room=room,
                    noise_snr_db=None if snr is None else float(snr),
                    seed=int(row["seed"]),
                    rt60_s=float(row["rt60_s"]),
                )
            )
    return samples
