"""Command-line entry points.

Subcommands: gen-data | train | sweep | rollout | verify | serve.
Every command reads one JSON workbench configuration (defaults apply when
--config is omitted) and writes under the output directory:

    out/data/      session files + manifest
    out/models/    trained model files + training reports
    out/sweep/     sweep CSV + per-variable plot tables
    out/rollouts/  trace + metrics files
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import datasets, evaluation, nn, pipeline
from .bridge import serve_bridge
from .config import WorkbenchConfig, load_config
from .pipeline import ApproachKind, TrainedApproach
from .sim import SCENARIO_NAMES

log = logging.getLogger("hoverbench")

MODEL_ROLES = {
    ApproachKind.A1: ("m1",),
    ApproachKind.A2: ("m2",),
    ApproachKind.A3: ("m1", "m3"),
}


def _model_path(models_dir: Path, kind: ApproachKind, role: str) -> Path:
    return models_dir / f"{kind.value}_{role}.mlp"


def save_approach(app: TrainedApproach, models_dir: Path, meta: dict) -> list[Path]:
    models_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for role in MODEL_ROLES[app.kind]:
        path = _model_path(models_dir, app.kind, role)
        nn.save_model(getattr(app, role), path, meta={**meta, "role": role})
        written.append(path)
    report_path = models_dir / f"{app.kind.value}_report.json"
    report_path.write_text(
        json.dumps(
            {**meta, "reports": {k: r.to_dict() for k, r in app.reports.items()}},
            indent=1,
            sort_keys=True,
        ),
        encoding="utf-8",
    )
    written.append(report_path)
    return written


def load_approach(models_dir: Path, kind: ApproachKind, params) -> TrainedApproach:
    if kind == ApproachKind.GROUND_TRUTH:
        return TrainedApproach(kind, params=params)
    models = {}
    for role in MODEL_ROLES[kind]:
        path = _model_path(models_dir, kind, role)
        if not path.exists():
            raise FileNotFoundError(f"missing model file {path}; run `hoverbench train` first")
        models[role], _meta = nn.load_model(path)
    return TrainedApproach(kind, params=params, **models)


def load_available_approaches(models_dir: Path, params) -> dict[str, TrainedApproach]:
    out = {ApproachKind.GROUND_TRUTH.value: TrainedApproach(ApproachKind.GROUND_TRUTH, params=params)}
    for kind in (ApproachKind.A1, ApproachKind.A2, ApproachKind.A3):
        try:
            out[kind.value] = load_approach(models_dir, kind, params)
        except FileNotFoundError:
            pass
    return out


def _resolve_config(args) -> WorkbenchConfig:
    config = load_config(args.config) if args.config else WorkbenchConfig()
    if args.out:
        config = dataclasses.replace(config, out_dir=args.out)
    if args.seed is not None:
        config = dataclasses.replace(
            config,
            corpus=dataclasses.replace(config.corpus, seed=args.seed),
            sweep=dataclasses.replace(config.sweep, seed=args.seed),
        )
    return config


def cmd_gen_data(args) -> int:
    config = _resolve_config(args)
    c = config.corpus
    corpus = pipeline.build_corpus(
        c.n_sessions,
        c.n_test_sessions,
        c.seed,
        duration=c.duration,
        validation_fraction=c.validation_fraction,
        sim_params=config.sim,
        cam=config.camera,
        odom_hold_hz=c.odom_hold_hz,
    )
    data_dir = Path(config.out_dir) / "data"
    manifest = datasets.save_corpus(corpus, data_dir, meta={"config_hash": config.hash()})
    counts = corpus.counts()
    total = sum(counts.values())
    print(f"wrote {len(corpus.sessions)} sessions ({total} instances) to {data_dir}")
    print(f"split: train={counts['train']} validation={counts['validation']} test={counts['test']}")
    print(f"manifest: {manifest}")
    return 0


def cmd_train(args) -> int:
    config = _resolve_config(args)
    kind = ApproachKind(args.approach)
    if kind == ApproachKind.GROUND_TRUTH:
        print("the ground-truth controller needs no training", file=sys.stderr)
        return 2
    corpus = datasets.load_corpus(Path(config.out_dir) / "data")
    seed = args.seed if args.seed is not None else config.train.seed
    app = pipeline.train_approach(kind, corpus, args.t, config.train, seed=seed)
    meta = {
        "approach": kind.value,
        "T": args.t,
        "seed": seed,
        "config_hash": config.hash(),
        "train_config": dataclasses.asdict(config.train),
    }
    written = save_approach(app, Path(config.out_dir) / "models", meta)
    for path in written:
        print(f"wrote {path}")
    for name, report in app.reports.items():
        print(
            f"{name}: epochs={report.epochs_run} best_validation_mae={report.best_validation_loss:.5f}"
        )
    return 0


def cmd_sweep(args) -> int:
    config = _resolve_config(args)
    corpus = datasets.load_corpus(Path(config.out_dir) / "data")
    report = pipeline.run_sweep(corpus, config.sweep, config.train)
    sweep_dir = Path(config.out_dir) / "sweep"
    sweep_dir.mkdir(parents=True, exist_ok=True)
    csv_path = sweep_dir / "sweep.csv"
    datasets.save_sweep_csv(report, csv_path)
    datasets.save_plot_tables(evaluation.sweep_plot_tables(report), sweep_dir)
    print(f"wrote {csv_path}")
    for (approach, variable, t_size), med in sorted(report.median_table().items()):
        print(f"median r2 {approach} {variable} T={t_size}: {med:.3f}")
    return 0


def cmd_rollout(args) -> int:
    config = _resolve_config(args)
    if args.scenario not in SCENARIO_NAMES:
        print(f"unknown scenario {args.scenario!r}; expected one of {SCENARIO_NAMES}", file=sys.stderr)
        return 2
    kind = ApproachKind(args.approach)
    app = load_approach(Path(config.out_dir) / "models", kind, config.controller)
    seed = args.seed if args.seed is not None else 0
    trace = evaluation.rollout(
        app, args.scenario, args.duration, seed, sim_params=config.sim, cam=config.camera
    )
    metrics = evaluation.rollout_metrics(trace, delta=config.controller.delta)
    roll_dir = Path(config.out_dir) / "rollouts"
    roll_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{kind.value}_{args.scenario}_{seed}"
    trace_path = roll_dir / f"trace_{stem}.jsonl"
    datasets.save_trace(trace, trace_path, meta={"config_hash": config.hash()})
    metrics_path = roll_dir / f"metrics_{stem}.json"
    metrics_path.write_text(
        json.dumps(
            {"config_hash": config.hash(), "seed": seed, **dataclasses.asdict(metrics)},
            indent=1,
            sort_keys=True,
        ),
        encoding="utf-8",
    )
    print(f"wrote {trace_path}")
    print(f"wrote {metrics_path}")
    settle = f"{metrics.settle_time:.2f}s" if metrics.settled else "did not settle"
    print(f"settle: {settle}; final error {metrics.final_position_error:.3f} m")
    return 0


def cmd_verify(args) -> int:
    config = _resolve_config(args)
    problems = datasets.verify_corpus(Path(config.out_dir) / "data", regenerate=args.regen)
    if problems:
        for p in problems:
            print(f"FAIL {p}", file=sys.stderr)
        return 1
    print("corpus verified: labels consistent" + (", regeneration identical" if args.regen else ""))
    return 0


def cmd_serve(args) -> int:
    config = _resolve_config(args)
    approaches = load_available_approaches(Path(config.out_dir) / "models", config.controller)
    print(f"serving on ws://{args.host}:{args.port} (controllers: {sorted(approaches)})")
    serve_bridge(approaches, config, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    # global flags accepted both before and after the subcommand
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", default=argparse.SUPPRESS, help="path to a workbench config JSON")
    shared.add_argument("--out", default=argparse.SUPPRESS, help="output directory (overrides config)")
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed override")

    parser = argparse.ArgumentParser(prog="hoverbench", parents=[shared])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-data", parents=[shared], help="generate the session corpus").set_defaults(
        func=cmd_gen_data
    )

    p_train = sub.add_parser("train", parents=[shared], help="train one approach")
    p_train.add_argument("--approach", required=True, choices=["a1", "a2", "a3"])
    p_train.add_argument("--t", type=int, required=True, help="training-set size")
    p_train.set_defaults(func=cmd_train)

    sub.add_parser("sweep", parents=[shared], help="run the training-size sweep").set_defaults(
        func=cmd_sweep
    )

    p_roll = sub.add_parser("rollout", parents=[shared], help="closed-loop rollout of one approach")
    p_roll.add_argument("--approach", required=True, choices=[k.value for k in ApproachKind])
    p_roll.add_argument("--scenario", required=True)
    p_roll.add_argument("--duration", type=float, default=12.0)
    p_roll.set_defaults(func=cmd_rollout)

    p_verify = sub.add_parser("verify", parents=[shared], help="check label consistency of a corpus")
    p_verify.add_argument("--regen", action="store_true", help="also regenerate and byte-compare")
    p_verify.set_defaults(func=cmd_verify)

    p_serve = sub.add_parser("serve", parents=[shared], help="run the live bridge service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    for name in ("config", "out", "seed"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
