import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geoverb.metrics import (
    SI_SDR_CAP,
    EvalReport,
    EvalRow,
    deconvolve,
    eval_report,
    log_spectral_distance,
    oracle_estimate,
    residual_rt,
    si_sdr,
    truncate_at_noise_floor,
)
from geoverb.room import DatasetSpec, dataset_generate, synth_speech

FS = 16000


def _speech(seed, n=FS):
    return synth_speech(np.random.default_rng(seed), n, FS)


@pytest.fixture(scope="module")
def scenes():
    return dataset_generate(DatasetSpec(), 12, seed=77)


# ------------------------------------------------------------------ LSD


def test_lsd_identity_is_zero():
    x = _speech(0)
    assert log_spectral_distance(x, x) == 0.0


def test_lsd_doubling_is_six_db():
    x = _speech(1)
    assert log_spectral_distance(x, 2.0 * x) == pytest.approx(20 * math.log10(2), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_lsd_symmetric_and_nonnegative(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(2000), rng.standard_normal(2000)
    d = log_spectral_distance(a, b)
    assert d >= 0.0
    assert d == pytest.approx(log_spectral_distance(b, a), rel=1e-12)


def test_lsd_valid_mask_restricts_bins():
    from geoverb.signal import StftConfig

    x = _speech(2, 4000)
    y = x.copy()
    y[2000:] *= 3.0
    t = StftConfig().n_frames(4000)
    valid = np.zeros((t, 257), bool)
    valid[:5] = True
    assert log_spectral_distance(x, y, valid) == pytest.approx(0.0, abs=1e-9)
    assert log_spectral_distance(x, y) > 1.0


def test_lsd_silent_reference_raises():
    with pytest.raises(ValueError, match="silent"):
        log_spectral_distance(np.zeros(1000), np.ones(1000))


# ------------------------------------------------------------------ SI-SDR


def test_si_sdr_identity_and_scale_hit_cap():
    x = _speech(3)
    assert si_sdr(x, x) == SI_SDR_CAP
    assert si_sdr(x, -0.3 * x) == SI_SDR_CAP


def test_si_sdr_orthogonal_noise_closed_form():
    rng = np.random.default_rng(4)
    r = rng.standard_normal(4096)
    n = rng.standard_normal(4096)
    n -= (n @ r) / (r @ r) * r
    n *= 0.1
    assert si_sdr(r, r + n) == pytest.approx(10 * math.log10((r @ r) / (n @ n)), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.01, 100.0))
def test_si_sdr_scale_invariant(seed, alpha):
    rng = np.random.default_rng(seed)
    r, e = rng.standard_normal(500), rng.standard_normal(500)
    assert si_sdr(r, alpha * e) == pytest.approx(si_sdr(r, e), abs=1e-9)


def test_si_sdr_zero_energy_raises():
    with pytest.raises(ValueError):
        si_sdr(np.zeros(10), np.ones(10))
    with pytest.raises(ValueError):
        si_sdr(np.ones(10), np.zeros(10))


# ------------------------------------------------------------------ residual RT


def test_deconvolve_recovers_short_response():
    x = _speech(5)
    h = np.zeros(200)
    h[[0, 37, 120]] = [1.0, -0.5, 0.25]
    y = np.convolve(x, h)[: len(x)]
    est = deconvolve(x, y, max_len=400)
    assert np.max(np.abs(est[:200] - h)) < 1e-3
    assert np.max(np.abs(est[200:])) < 1e-3


def test_deconvolve_rejects_weak_excitation():
    x = np.sin(2 * np.pi * 440 * np.arange(FS) / FS)
    with pytest.raises(ValueError, match="excitation"):
        deconvolve(x, x)
    with pytest.raises(ValueError, match="silent"):
        deconvolve(np.zeros(100), np.ones(100))


def test_noise_floor_truncation_cuts_decay():
    rng = np.random.default_rng(6)
    t = np.arange(8000) / FS
    h = rng.standard_normal(8000) * 10 ** (-3 * t / 0.3) + 1e-6 * rng.standard_normal(8000)
    cut = truncate_at_noise_floor(h, FS)
    assert 2000 < len(cut) < 8000
    assert np.array_equal(cut, h[: len(cut)])


def test_residual_rt_identity_is_near_zero():
    x = _speech(7)
    assert residual_rt(x, x) < 0.01


def test_residual_rt_recovers_scene_rt(scenes):
    # measurable rooms: the decay fits in half the clip
    checked = 0
    for s in scenes:
        if s.rt60_s > 0.5 * len(s.clean.samples) / FS:
            continue
        got = residual_rt(s.clean, s.reverberant)
        assert got == pytest.approx(s.rt60_s, rel=0.10), s.id
        checked += 1
    assert checked >= 10


def test_residual_rt_mixture_sweep(scenes):
    # the dry part only adds to the direct tap, so the decay slope is shared
    # between beta = 0.5 and 1; allow for estimator noise on that tie
    for s in scenes:
        c, r = s.clean.samples, s.reverberant.samples
        rts = [residual_rt(c, (1 - b) * c + b * r) for b in (0.0, 0.5, 1.0)]
        assert rts[0] < rts[1]
        assert rts[1] <= rts[2] + 0.03 * s.rt60_s, s.id


# ------------------------------------------------------------------ report


def _report_rows():
    return [
        EvalRow("a", "reverberant", 3.0, 1.0, 0.5),
        EvalRow("b", "reverberant", 5.0, 3.0, float("nan")),
        EvalRow("a", "oracle", 0.1, 40.0, 0.0),
    ]


def test_aggregates_recompute_from_rows():
    agg = EvalReport(_report_rows()).aggregates()
    assert agg["reverberant"] == {"lsd_db": 4.0, "si_sdr_db": 2.0, "residual_rt_s": 0.5}
    assert agg["oracle"]["lsd_db"] == 0.1


def test_report_csv(tmp_path):
    EvalReport(_report_rows()).write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "tag,id,variant,lsd_db,si_sdr_db,residual_rt_s"
    assert sum(l.startswith("row,") for l in lines) == 3
    assert sum(l.startswith("aggregate,") for l in lines) == 2


def test_eval_report_missing_variant_raises(scenes):
    with pytest.raises(FileNotFoundError, match="geometry"):
        eval_report(scenes[:1], {})


def test_eval_report_rows_and_oracle(scenes):
    sub = scenes[:4]
    rep = eval_report(sub, {"geometry": lambda ss: [s.reverberant.samples for s in ss]}, ("reverberant", "geometry", "oracle"))
    assert len(rep.rows) == 12
    by = {(r.id, r.variant): r for r in rep.rows}
    for s in sub:
        assert by[(s.id, "geometry")].lsd_db == by[(s.id, "reverberant")].lsd_db
        assert by[(s.id, "oracle")].lsd_db < 0.5
        if s.rt60_s <= 0.5:
            assert by[(s.id, "reverberant")].residual_rt_s == pytest.approx(s.rt60_s, rel=0.10)


def test_oracle_estimate_length(scenes):
    est, valid = oracle_estimate(scenes[0])
    assert len(est.samples) == len(scenes[0].clean.samples)
    assert valid.dtype == bool
