"""Command-line entry point: ``geoverb {gen-data,train,dereverb,eval,plot-data}``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure. Every
error prints one line to stderr of the form ``geoverb: error[<kind>]: ...``
with ``kind`` in {usage, input, numeric}.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import nullcontext
from pathlib import Path

from threadpoolctl import threadpool_limits

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.kind = kind
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _ckpt_prefix(path: str) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix in (".json", ".bin") else p


def _require_dir(path: str, what: str) -> Path:
    p = Path(path)
    if not (p / "manifest.csv").is_file():
        raise CliError("input", f"{what} {p} has no manifest.csv")
    return p


def _require_ckpt(path: str) -> Path:
    p = _ckpt_prefix(path)
    if not p.with_suffix(".json").is_file() or not p.with_suffix(".bin").is_file():
        raise CliError("input", f"checkpoint {p} not found (need {p.name}.json and {p.name}.bin)")
    return p


def _load_json(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise CliError("input", f"config file {p} not found")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError("input", f"config file {p} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise CliError("input", f"config file {p} must hold a JSON object")
    return data


# ---------------------------------------------------------------- subcommands


def cmd_gen_data(args) -> int:
    from .room import DatasetSpec, dataset_generate, write_dataset

    cfg = _load_json(args.config)
    count = int(args.count if args.count is not None else cfg.pop("count", 10))
    cfg.pop("count", None)
    seed = int(args.seed if args.seed is not None else cfg.pop("seed", 0))
    cfg.pop("seed", None)
    start = int(cfg.pop("start", 0))
    if count < 1:
        raise CliError("input", "count: must be at least 1")
    try:
        spec = DatasetSpec.from_dict(cfg)
        spec.validate()
    except (ValueError, TypeError) as exc:
        raise CliError("input", str(exc)) from None
    samples = dataset_generate(spec, count, seed, start=start)
    write_dataset(samples, args.out)
    print(f"wrote {count} samples to {args.out}")
    return EXIT_OK


def _split(samples, val_fraction: float):
    samples = sorted(samples, key=lambda s: s.id)
    n_val = int(math.ceil(val_fraction * len(samples))) if val_fraction > 0 else 0
    n_val = min(n_val, len(samples) - 1)
    return samples[: len(samples) - n_val], samples[len(samples) - n_val :]


def cmd_train(args) -> int:
    from .room import load_dataset
    from .train import NonFiniteLossError, TrainConfig, train_loop, with_overrides

    raw = _load_json(args.config)
    try:
        tcfg = TrainConfig.from_dict(raw)
        tcfg = with_overrides(
            tcfg, seed=args.seed, mu=args.mu, lam=args.lam, epochs=args.epochs, data_dir=args.data
        )
        tcfg.__post_init__()
    except (ValueError, TypeError) as exc:
        raise CliError("input", str(exc)) from None
    if tcfg.data_dir is None:
        raise CliError("usage", "train needs --data or data_dir in the config")
    data_dir = _require_dir(tcfg.data_dir, "dataset")
    resume = _require_ckpt(args.resume) if args.resume else None
    overrides = {"use_geometry": False} if args.no_geometry else {}
    samples = load_dataset(data_dir)
    train_set, val_set = _split(samples, tcfg.val_fraction)
    try:
        res = train_loop(
            train_set, tcfg, val_set, out_dir=args.out, resume=resume, model_overrides=overrides, log=print
        )
    except NonFiniteLossError as exc:
        raise CliError("numeric", f"non-finite loss at step {exc.step}", EXIT_NUMERIC) from None
    except ValueError as exc:
        raise CliError("input", str(exc)) from None
    print(f"trained {len(res.history)} epochs; checkpoints in {args.out}")
    return EXIT_OK


def cmd_dereverb(args) -> int:
    from .model import load_checkpoint
    from .pipeline import dereverb_wave
    from .room import RoomDescriptor
    from .signal import read_wav, write_wav

    ckpt = _require_ckpt(args.checkpoint)
    room_path = Path(args.room)
    if not room_path.is_file():
        raise CliError("input", f"room descriptor {room_path} not found")
    try:
        wave = read_wav(args.input)
    except FileNotFoundError:
        raise CliError("input", f"input wav {args.input} not found") from None
    except ValueError as exc:
        raise CliError("input", str(exc)) from None
    try:
        room = RoomDescriptor.from_dict(json.loads(room_path.read_text()))
    except (ValueError, TypeError, KeyError, json.JSONDecodeError) as exc:
        raise CliError("input", f"invalid room descriptor: {exc}") from None
    try:
        params, cfg, _, _ = load_checkpoint(ckpt)
    except (ValueError, KeyError) as exc:
        raise CliError("input", f"checkpoint/config mismatch: {exc}") from None
    out = dereverb_wave(wave, room, params, cfg)
    write_wav(args.out, out)
    print(f"wrote {args.out} ({len(out.samples)} samples)")
    return EXIT_OK


def _parse_ckpt_args(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise CliError("usage", f"--checkpoint expects VARIANT=PATH, got {item!r}")
        name, path = item.split("=", 1)
        out[name] = _require_ckpt(path)
    return out


def cmd_eval(args) -> int:
    from .metrics import VARIANTS, eval_report
    from .model import load_checkpoint
    from .pipeline import dereverb_samples
    from .room import load_dataset

    data_dir = _require_dir(args.data, "dataset")
    ckpts = _parse_ckpt_args(args.checkpoint)
    missing = [v for v in ("geometry", "no-geometry") if v not in ckpts]
    if missing:
        raise CliError("input", f"missing checkpoint for variant {missing[0]!r}")
    estimators = {}
    for name, path in ckpts.items():
        params, cfg, _, _ = load_checkpoint(path)
        estimators[name] = lambda samples, p=params, c=cfg: dereverb_samples(samples, p, c)
    samples = load_dataset(data_dir)
    report = eval_report(samples, estimators, VARIANTS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "eval_report.csv")
    for variant, agg in report.aggregates().items():
        print(f"{variant}: lsd={agg['lsd_db']:.3f} dB si_sdr={agg['si_sdr_db']:.3f} dB rt={agg['residual_rt_s']:.3f} s")
    return EXIT_OK


LOSS_COLUMNS = ("run", "epoch", "train_sp", "train_atm", "train_total", "val_total")
SCATTER_COLUMNS = ("id", "variant", "rt60_s", "lsd_db", "si_sdr_db", "residual_rt_s")


def cmd_plot_data(args) -> int:
    out = Path(args.out)
    runs = [Path(r) for r in args.run or []]
    for r in runs:
        if not (r / "loss_history.csv").is_file():
            raise CliError("input", f"run directory {r} has no loss_history.csv")
    report = Path(args.report) if args.report else None
    if report is not None and not report.is_file():
        raise CliError("input", f"eval report {report} not found")
    if not runs and report is None:
        raise CliError("usage", "plot-data needs --run and/or --report")
    out.mkdir(parents=True, exist_ok=True)
    if runs:
        with (out / "loss_curves.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LOSS_COLUMNS)
            for r in runs:
                with (r / "loss_history.csv").open(newline="") as src:
                    for row in csv.DictReader(src):
                        w.writerow([r.name] + [row[c] for c in LOSS_COLUMNS[1:]])
    if report is not None:
        rt = {}
        if args.data:
            data_dir = _require_dir(args.data, "dataset")
            with (data_dir / "manifest.csv").open(newline="") as fh:
                rt = {row["id"]: row["rt60_s"] for row in csv.DictReader(fh)}
        with report.open(newline="") as src, (out / "metric_scatter.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SCATTER_COLUMNS)
            for row in csv.DictReader(src):
                if row["tag"] != "row":
                    continue
                w.writerow([row["id"], row["variant"], rt.get(row["id"], "nan"), row["lsd_db"], row["si_sdr_db"], row["residual_rt_s"]])
    print(f"wrote plot data to {out}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output path")
    common.add_argument("--threads", type=int, help="limit BLAS/OpenMP threads")
    common.add_argument("--deterministic", action="store_true", help="single-threaded, bitwise reproducible run")

    p = _Parser(prog="geoverb", description="Geometry-conditioned speech dereverberation toolkit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen-data", parents=[common], help="generate a synthetic dataset")
    g.add_argument("--count", type=int, help="number of scenes (overrides config)")
    g.set_defaults(func=cmd_gen_data, needs_out=True)

    t = sub.add_parser("train", parents=[common], help="train a model")
    t.add_argument("--data", help="dataset directory (overrides config data_dir)")
    t.add_argument("--no-geometry", action="store_true", help="feed zero geometry features (ablation)")
    t.add_argument("--mu", type=float, help="weight of the token-matching loss")
    t.add_argument("--lambda", dest="lam", type=float, help="weight of the spectrogram loss")
    t.add_argument("--epochs", type=int, help="override the number of epochs")
    t.add_argument("--resume", help="checkpoint to resume from")
    t.set_defaults(func=cmd_train, needs_out=True)

    d = sub.add_parser("dereverb", parents=[common], help="dereverberate a WAV file")
    d.add_argument("--input", required=True, help="16 kHz mono WAV")
    d.add_argument("--room", required=True, help="room descriptor JSON")
    d.add_argument("--checkpoint", required=True, help="trained checkpoint")
    d.set_defaults(func=cmd_dereverb, needs_out=True)

    e = sub.add_parser("eval", parents=[common], help="score variants on a dataset")
    e.add_argument("--data", required=True, help="evaluation dataset directory")
    e.add_argument("--checkpoint", action="append", help="VARIANT=PATH (geometry, no-geometry)")
    e.set_defaults(func=cmd_eval, needs_out=True)

    pd = sub.add_parser("plot-data", parents=[common], help="emit plot-ready CSV files")
    pd.add_argument("--run", action="append", help="training output directory (repeatable)")
    pd.add_argument("--report", help="eval_report.csv")
    pd.add_argument("--data", help="dataset directory, for RT60 per sample")
    pd.set_defaults(func=cmd_plot_data, needs_out=True)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise CliError("usage", "missing subcommand (gen-data, train, dereverb, eval, plot-data)")
        if args.needs_out and not args.out:
            raise CliError("usage", "--out is required")
        threads = 1 if args.deterministic else args.threads
        if threads is not None and threads < 1:
            raise CliError("usage", "--threads must be at least 1")
        with threadpool_limits(threads) if threads else nullcontext():
            return args.func(args)
    except CliError as exc:
        return _report(exc.kind, str(exc), exc.code)
    except FloatingPointError as exc:
        return _report("numeric", str(exc), EXIT_NUMERIC)
    except (FileNotFoundError, ValueError) as exc:
        return _report("input", str(exc), EXIT_INPUT)


def _report(kind: str, message: str, code: int) -> int:
    flat = " ".join(message.split())
    print(f"geoverb: error[{kind}]: {flat}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
