"""Workbench configuration: one JSON file drives every command.

All seeds are explicit — nothing falls back to wall-clock entropy — so any
artifact can be regenerated from its recorded configuration.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .camera import CameraParams, NoiseParams
from .controller import ControllerParams
from .datasets import config_hash
from .nn import TrainConfig
from .pipeline import SweepConfig
from .sim import SimParams


@dataclass(frozen=True)
class CorpusConfig:
    n_sessions: int = 4
    n_test_sessions: int = 1
    duration: float = 120.0
    seed: int = 7
    validation_fraction: float = 0.21
    odom_hold_hz: float = 0.0


@dataclass(frozen=True)
class WorkbenchConfig:
    sim: SimParams = field(default_factory=SimParams)
    camera: CameraParams = field(default_factory=CameraParams)
    controller: ControllerParams = field(default_factory=ControllerParams)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    # Desk-scale sweep by default; pass a full-scale SweepConfig for more.
    sweep: SweepConfig = field(
        default_factory=lambda: SweepConfig(t_values=(128, 512, 2000, 8000), replicas=(6, 5, 3, 2))
    )
    train: TrainConfig = field(default_factory=TrainConfig)
    out_dir: str = "out"

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        return config_hash(self.to_dict())


def _build(cls, payload: dict):
    known = {f.name for f in fields(cls)}
    unknown = set(payload) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**payload)


def config_from_dict(payload: dict) -> WorkbenchConfig:
    payload = dict(payload)
    parts = {}
    if "sim" in payload:
        parts["sim"] = _build(SimParams, payload.pop("sim"))
    if "camera" in payload:
        cam = dict(payload.pop("camera"))
        if "noise" in cam:
            cam["noise"] = _build(NoiseParams, cam["noise"])
        parts["camera"] = _build(CameraParams, cam)
    if "controller" in payload:
        parts["controller"] = _build(ControllerParams, payload.pop("controller"))
    if "corpus" in payload:
        parts["corpus"] = _build(CorpusConfig, payload.pop("corpus"))
    if "sweep" in payload:
        sweep = dict(payload.pop("sweep"))
        for key in ("t_values", "replicas"):
            if key in sweep:
                sweep[key] = tuple(sweep[key])
        parts["sweep"] = _build(SweepConfig, sweep)
    if "train" in payload:
        parts["train"] = _build(TrainConfig, payload.pop("train"))
    if "out_dir" in payload:
        parts["out_dir"] = payload.pop("out_dir")
    if payload:
        raise ValueError(f"unknown config sections: {sorted(payload)}")
    return WorkbenchConfig(**parts)


def load_config(path) -> WorkbenchConfig:
    return config_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_config(config: WorkbenchConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=1, sort_keys=True), encoding="utf-8")
