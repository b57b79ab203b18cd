import csv
import json

import numpy as np
import pytest

from geoverb.cli import main
from geoverb.room import RoomDescriptor
from geoverb.signal import Waveform, read_wav, write_wav

DATA_CFG = {
    "dims_max": [5.0, 4.5, 3.0],
    "duration_s": 0.25,
    "rir_duration_s": 0.3,
    "count": 6,
    "seed": 3,
}
TRAIN_CFG = {
    "model": {
        "d_model": 16,
        "n_window": 8,
        "loops": 1,
        "heads": 2,
        "conv_kernel": 5,
        "n_frames": 27,
        "visual_len": 64,
        "visual_dim": 64,
    },
    "epochs": 2,
    "batch_size": 2,
    "val_fraction": 0.2,
    "n_clusters": 4,
    "kmeans_iters": 5,
}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """Dataset plus geometry and no-geometry runs shared by the tests below."""
    root = tmp_path_factory.mktemp("cli")
    data_cfg = _write(root / "data.json", DATA_CFG)
    assert main(["gen-data", "--config", data_cfg, "--out", str(root / "data")]) == 0
    train_cfg = _write(root / "train.json", {**TRAIN_CFG, "data_dir": str(root / "data")})
    assert main(["train", "--config", train_cfg, "--deterministic", "--out", str(root / "geo")]) == 0
    assert main(["train", "--config", train_cfg, "--deterministic", "--no-geometry", "--out", str(root / "nogeo")]) == 0
    return root


def test_gen_data_rows_and_rerun_identical(work, capsys, tmp_path):
    with (work / "data" / "manifest.csv").open() as fh:
        assert len(list(csv.DictReader(fh))) == 6
    code, _, _ = _run(capsys, "gen-data", "--config", work / "data.json", "--out", tmp_path / "again")
    assert code == 0
    for f in sorted((work / "data").rglob("*")):
        if f.is_file():
            assert f.read_bytes() == (tmp_path / "again" / f.relative_to(work / "data")).read_bytes(), f.name


def test_gen_data_bad_dims_is_input_error(capsys, tmp_path):
    cfg = _write(tmp_path / "bad.json", {"dims_min": [1.0, 2.0]})
    code, _, err = _run(capsys, "gen-data", "--config", cfg, "--out", tmp_path / "d")
    assert code == 2
    assert err.count("\n") == 1
    assert err.startswith("geoverb: error[input]:") and "dims" in err


def test_train_writes_history_and_tags(work):
    for run, geo in (("geo", True), ("nogeo", False)):
        with (work / run / "loss_history.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert [int(r["epoch"]) for r in rows] == [1, 2]
        assert all(np.isfinite(float(r["val_total"])) for r in rows)
        meta = json.loads((work / run / "final.json").read_text())
        assert meta["config"]["use_geometry"] is geo


def test_train_resume_matches_straight_run(work, capsys, tmp_path):
    cfg = _write(tmp_path / "t.json", {**TRAIN_CFG, "epochs": 1, "data_dir": str(work / "data")})
    assert _run(capsys, "train", "--config", cfg, "--deterministic", "--out", tmp_path / "a")[0] == 0
    code, _, _ = _run(
        capsys, "train", "--config", cfg, "--epochs", 2, "--deterministic",
        "--resume", tmp_path / "a" / "final", "--out", tmp_path / "a",
    )
    assert code == 0
    assert (tmp_path / "a" / "final.bin").read_bytes() == (work / "geo" / "final.bin").read_bytes()


def test_dereverb_length_and_reproducible(work, capsys, tmp_path):
    rng = np.random.default_rng(0)
    write_wav(tmp_path / "in.wav", Waveform(0.1 * rng.standard_normal(5000)))
    room = RoomDescriptor((4.0, 3.5, 2.7), (0.3,) * 6, (1.0, 1.0, 1.5), (2.5, 2.0, 1.5))
    room_json = _write(tmp_path / "room.json", room.to_dict())
    for name in ("o1.wav", "o2.wav"):
        code, _, _ = _run(
            capsys, "dereverb", "--input", tmp_path / "in.wav", "--room", room_json,
            "--checkpoint", work / "geo" / "final", "--deterministic", "--out", tmp_path / name,
        )
        assert code == 0
    assert len(read_wav(tmp_path / "o1.wav").samples) == 5000
    assert (tmp_path / "o1.wav").read_bytes() == (tmp_path / "o2.wav").read_bytes()


def test_eval_and_plot_data(work, capsys, tmp_path):
    code, out, _ = _run(
        capsys, "eval", "--data", work / "data",
        "--checkpoint", f"geometry={work / 'geo' / 'final'}",
        "--checkpoint", f"no-geometry={work / 'nogeo' / 'final'}",
        "--out", tmp_path / "ev",
    )
    assert code == 0
    with (tmp_path / "ev" / "eval_report.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert {r["variant"] for r in rows} == {"reverberant", "geometry", "no-geometry", "oracle"}
    assert sum(r["tag"] == "row" for r in rows) == 24
    code, _, _ = _run(
        capsys, "plot-data", "--run", work / "geo", "--run", work / "nogeo",
        "--report", tmp_path / "ev" / "eval_report.csv", "--data", work / "data", "--out", tmp_path / "pd",
    )
    assert code == 0
    loss = (tmp_path / "pd" / "loss_curves.csv").read_text().splitlines()
    assert loss[0] == "run,epoch,train_sp,train_atm,train_total,val_total"
    assert len(loss) == 5
    scatter = (tmp_path / "pd" / "metric_scatter.csv").read_text().splitlines()
    assert scatter[0] == "id,variant,rt60_s,lsd_db,si_sdr_db,residual_rt_s"
    assert len(scatter) == 25 and "nan" not in scatter[1].split(",")[2]


def test_eval_missing_checkpoint(work, capsys, tmp_path):
    code, _, err = _run(
        capsys, "eval", "--data", work / "data", "--checkpoint", f"geometry={work / 'geo' / 'final'}",
        "--out", tmp_path,
    )
    assert code == 2 and "no-geometry" in err and err.count("\n") == 1


@pytest.mark.parametrize(
    "argv, kind",
    [
        ([], "usage"),
        (["train", "--out", "x"], "usage"),
        (["gen-data"], "usage"),
        (["train", "--data", "/nonexistent", "--out", "x"], "input"),
        (["gen-data", "--config", "/nonexistent.json", "--out", "x"], "input"),
        (["plot-data", "--out", "x"], "usage"),
        (["bogus"], "usage"),
    ],
)
def test_errors_are_single_line(capsys, argv, kind):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert err.count("\n") == 1
    assert err.startswith(f"geoverb: error[{kind}]:")


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_loss_exits_3(work, capsys, tmp_path):
    cfg = _write(tmp_path / "t.json", {**TRAIN_CFG, "lr": 1e300, "epochs": 3, "data_dir": str(work / "data")})
    code, _, err = _run(capsys, "train", "--config", cfg, "--deterministic", "--out", tmp_path / "r")
    assert code == 3
    assert err.startswith("geoverb: error[numeric]:") and err.count("\n") == 1
