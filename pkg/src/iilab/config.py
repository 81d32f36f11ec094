"""Experiment configuration: one nested dataclass, JSON round-trippable."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .ebm import LangevinConfig, inference_config
from .envs import POINT_REACH, TeacherConfig
from .errors import ConfigurationError
from .spaces import CircularSpec, PolytopeSpec

POLYTOPE = "polytope"
CIRCULAR = "circular"
HINGE = "hinge"
IBC = "ibc"
PVP = "pvp"
HG_DAGGER = "hg_dagger"
D_COACH = "d_coach"
BD_COACH = "bd_coach"

METHODS = (POLYTOPE, CIRCULAR, HINGE, IBC, PVP, HG_DAGGER, D_COACH, BD_COACH)
ENERGY_METHODS = (POLYTOPE, CIRCULAR, IBC, PVP)
EXPLICIT_METHODS = (HINGE, HG_DAGGER, D_COACH, BD_COACH)


@dataclass
class ExperimentConfig:
    method: str = POLYTOPE
    env: str = POINT_REACH
    teacher: TeacherConfig = field(default_factory=TeacherConfig)
    space: object | None = None  # PolytopeSpec | CircularSpec; default per method
    langevin: LangevinConfig = field(
        default_factory=lambda: LangevinConfig(n_samples=128, n_steps=25)
    )
    inference: LangevinConfig = field(
        default_factory=lambda: inference_config(n_samples=128, n_steps=50)
    )
    hidden_widths: tuple = (64, 64, 64, 32)
    update_every: int = 5  # in-episode update cadence b
    batch_size: int = 32
    n_training: int = 100  # end-of-episode update steps
    learning_rate: float = 3e-4
    adam_beta1: float = 0.1
    adam_beta2: float = 0.999
    adam_eps: float = 1e-7
    episodes: int = 60
    horizon: int = 50
    eval_every: int = 5  # episodes between evaluations
    eval_rollouts: int = 10
    early_stop_success: float | None = None
    final_window: int = 8
    uniform_prior: bool = False
    differentiate_target: bool = False
    penalty_weight: float = 1.0
    penalty_delta: float = 1e-3
    penalty_margin: float = 1.0
    penalty_max_samples: int | None = None
    buffer_capacity: int | None = None
    relative_magnitude: float = 0.2  # e used when replaying stored relative data
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.space is None:
            if self.method == CIRCULAR:
                self.space = CircularSpec()
            elif self.method in (POLYTOPE, HINGE):
                self.space = PolytopeSpec()
        if self.method == D_COACH and self.buffer_capacity is None:
            self.buffer_capacity = 256  # small recency window
        for name in ("update_every", "batch_size", "episodes", "horizon",
                     "eval_every", "eval_rollouts"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")
        if self.n_training < 0:
            raise ConfigurationError("n_training must be nonnegative")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be positive")
        self.hidden_widths = tuple(int(w) for w in self.hidden_widths)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["teacher"] = dataclasses.asdict(self.teacher)
        d["langevin"] = dataclasses.asdict(self.langevin)
        d["inference"] = dataclasses.asdict(self.inference)
        if isinstance(self.space, PolytopeSpec):
            d["space"] = {"variant": "polytope", **dataclasses.asdict(self.space)}
        elif isinstance(self.space, CircularSpec):
            d["space"] = {"variant": "circular", **dataclasses.asdict(self.space)}
        d["hidden_widths"] = list(self.hidden_widths)
        return d

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        d = dict(data)
        if "teacher" in d and isinstance(d["teacher"], dict):
            d["teacher"] = TeacherConfig(**d["teacher"])
        for key in ("langevin", "inference"):
            if key in d and isinstance(d[key], dict):
                d[key] = LangevinConfig(**d[key])
        space = d.get("space")
        if isinstance(space, dict):
            variant = space.pop("variant")
            if variant == "polytope":
                d["space"] = PolytopeSpec(**space)
            elif variant == "circular":
                d["space"] = CircularSpec(**space)
            else:
                raise ConfigurationError(f"unknown space variant {variant!r}")
        if "hidden_widths" in d:
            d["hidden_widths"] = tuple(d["hidden_widths"])
        unknown = set(d) - {f.name for f in dataclasses.fields(ExperimentConfig)}
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return ExperimentConfig(**d)

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        return ExperimentConfig.from_dict(json.loads(text))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json(indent=None).encode()).hexdigest()[:16]
