"""Desk-scale environments, scripted teachers, and dataset generators.

All environments share the action box [-1, 1]^dim, Euler dynamics
``position += dt * action`` with dt = 0.05, a 50-step horizon, and a 0.05
goal radius.  The scripted teacher watches the learner act and emits a
correction when the learner's action strays more than a threshold from the
expert's, in one of the feedback formats below.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .ebm import ACTION_HIGH, ACTION_LOW, clip_to_box
from .errors import ConfigurationError
from .spaces import ABSOLUTE, PARTIAL, RELATIVE, ObservedCorrection, sample_negative_directions

log = logging.getLogger(__name__)

DT = 0.05
HORIZON = 50
GOAL_RADIUS = 0.05
EXPERT_GAIN = 4.0

POINT_REACH = "PointReach2D"
TWO_GOAL = "TwoGoal2D"
DUAL_REACH = "DualPointReach4D"
TOY_CONSTANT = "ToyConstant2D"
TOY_MULTI = "ToyMulti2D"

ENV_DIMS = {
    POINT_REACH: (4, 2),
    TWO_GOAL: (6, 2),
    DUAL_REACH: (8, 4),
    TOY_CONSTANT: (1, 2),
    TOY_MULTI: (1, 2),
}

TWO_GOAL_POSITIONS = np.array([[-0.5, 0.5], [0.5, 0.5]])
TOY_MULTI_OPTIMA = np.array([[-0.5, 0.0], [0.5, 0.0]])


def env_dims(kind: str) -> tuple:
    if kind not in ENV_DIMS:
        raise ConfigurationError(f"unknown environment {kind!r}")
    return ENV_DIMS[kind]


class Environment:
    """Value-like environment: one owner, explicit reset, finite horizon."""

    def __init__(self, kind: str, horizon: int = HORIZON):
        self.kind = kind
        self.state_dim, self.action_dim = env_dims(kind)
        self.horizon = horizon
        self._state = None
        self._t = 0
        self.clip_warnings = 0

    def reset(self, rng) -> np.ndarray:
        self._t = 0
        if self.kind == POINT_REACH:
            agent = rng.uniform(ACTION_LOW, ACTION_HIGH, 2)
            while True:
                goal = rng.uniform(ACTION_LOW, ACTION_HIGH, 2)
                if np.linalg.norm(agent - goal) >= 0.3:
                    break
            self._state = np.concatenate([agent, goal])
        elif self.kind == TWO_GOAL:
            agent = rng.uniform([ACTION_LOW, ACTION_LOW], [ACTION_HIGH, 0.0])
            self._state = np.concatenate([agent, TWO_GOAL_POSITIONS.ravel()])
        elif self.kind == DUAL_REACH:
            agents, goals = [], []
            for _ in range(2):
                a = rng.uniform(ACTION_LOW, ACTION_HIGH, 2)
                while True:
                    g = rng.uniform(ACTION_LOW, ACTION_HIGH, 2)
                    if np.linalg.norm(a - g) >= 0.3:
                        break
                agents.append(a)
                goals.append(g)
            self._state = np.concatenate(agents + goals)
        else:  # toy environments expose one constant state
            self._state = np.zeros(1)
        return self._state.copy()

    def step(self, action) -> tuple:
        a = np.asarray(action, dtype=np.float64)
        if a.shape != (self.action_dim,):
            raise ConfigurationError(f"action shape {a.shape} != ({self.action_dim},)")
        if np.any(a < ACTION_LOW) or np.any(a > ACTION_HIGH):
            self.clip_warnings += 1
            log.warning("action outside the box clipped (%d so far)", self.clip_warnings)
            a = clip_to_box(a)
        self._t += 1
        s = self._state
        if self.kind == POINT_REACH:
            agent = np.clip(s[:2] + DT * a, ACTION_LOW, ACTION_HIGH)
            self._state = np.concatenate([agent, s[2:]])
        elif self.kind == TWO_GOAL:
            agent = np.clip(s[:2] + DT * a, ACTION_LOW, ACTION_HIGH)
            self._state = np.concatenate([agent, s[2:]])
        elif self.kind == DUAL_REACH:
            pos = np.clip(s[:4] + DT * a, ACTION_LOW, ACTION_HIGH)
            self._state = np.concatenate([pos, s[4:]])
        # toy states are constant
        success = is_success(self.kind, self._state, last_action=a)
        done = success or self._t >= self.horizon
        return self._state.copy(), done, success

    @property
    def steps_taken(self) -> int:
        return self._t


def is_success(kind: str, state, last_action=None) -> bool:
    s = np.asarray(state, dtype=np.float64)
    if kind == POINT_REACH:
        return bool(np.linalg.norm(s[:2] - s[2:4]) <= GOAL_RADIUS)
    if kind == TWO_GOAL:
        d = np.linalg.norm(TWO_GOAL_POSITIONS - s[:2], axis=1)
        return bool(d.min() <= GOAL_RADIUS)
    if kind == DUAL_REACH:
        d1 = np.linalg.norm(s[0:2] - s[4:6])
        d2 = np.linalg.norm(s[2:4] - s[6:8])
        return bool(d1 <= GOAL_RADIUS and d2 <= GOAL_RADIUS)
    if kind in (TOY_CONSTANT, TOY_MULTI) and last_action is not None:
        optima = np.zeros((1, 2)) if kind == TOY_CONSTANT else TOY_MULTI_OPTIMA
        d = np.linalg.norm(optima - np.asarray(last_action), axis=1)
        return bool(d.min() <= GOAL_RADIUS)
    return False


def teacher_optimal_action(kind: str, state, reference_action=None) -> np.ndarray:
    """Scripted expert action for a state.

    The two-optimum toy task is multi-modal: its expert endorses the mode
    nearer to ``reference_action`` (the action being corrected), falling
    back to the first mode when no reference is given.
    """
    s = np.asarray(state, dtype=np.float64)
    if kind == POINT_REACH:
        return clip_to_box(EXPERT_GAIN * (s[2:4] - s[:2]))
    if kind == TWO_GOAL:
        d = np.linalg.norm(TWO_GOAL_POSITIONS - s[:2], axis=1)
        goal = TWO_GOAL_POSITIONS[int(np.argmin(d))]  # argmin breaks ties low
        return clip_to_box(EXPERT_GAIN * (goal - s[:2]))
    if kind == DUAL_REACH:
        return clip_to_box(EXPERT_GAIN * (s[4:8] - s[:4]))
    if kind == TOY_CONSTANT:
        return np.zeros(2)
    if kind == TOY_MULTI:
        if reference_action is None:
            return TOY_MULTI_OPTIMA[0].copy()
        d = np.linalg.norm(TOY_MULTI_OPTIMA - np.asarray(reference_action), axis=1)
        return TOY_MULTI_OPTIMA[int(np.argmin(d))].copy()
    raise ConfigurationError(f"unknown environment {kind!r}")


ACCURATE_ABSOLUTE = "accurate_absolute"
GAUSSIAN_NOISE = "gaussian_noise"
PARTIAL_FEEDBACK = "partial"
ACCURATE_RELATIVE = "accurate_relative"
DIRECTION_NOISE = "direction_noise"

_FEEDBACK_KINDS = (
    ACCURATE_ABSOLUTE,
    GAUSSIAN_NOISE,
    PARTIAL_FEEDBACK,
    ACCURATE_RELATIVE,
    DIRECTION_NOISE,
)


@dataclass
class TeacherConfig:
    """Simulated-teacher behavior.

    ``noise_scale`` is the lambda of the Gaussian-noise feedback; with
    ``noise_as_variance`` (default) the perturbation has covariance
    ``lambda * ||a* - a_r||^2 * I``, otherwise lambda scales the standard
    deviation directly.
    """

    feedback: str = ACCURATE_ABSOLUTE
    threshold: float = 0.2
    cadence: int = 2
    magnitude: float = 0.2  # e, relative feedback step length
    noise_scale: float = 0.5  # lambda
    noise_as_variance: bool = True
    direction_noise_deg: float = 45.0  # beta in [0, 90)
    seed: int | None = None

    def __post_init__(self):
        if self.feedback not in _FEEDBACK_KINDS:
            raise ConfigurationError(f"unknown feedback kind {self.feedback!r}")
        if self.threshold <= 0:
            raise ConfigurationError("threshold must be positive")
        if self.cadence < 1:
            raise ConfigurationError("cadence must be >= 1")
        if self.magnitude <= 0:
            raise ConfigurationError("magnitude e must be positive")
        if self.noise_scale < 0:
            raise ConfigurationError("noise scale must be nonnegative")
        if not 0.0 <= self.direction_noise_deg < 90.0:
            raise ConfigurationError("direction noise must be in [0, 90)")


class Teacher:
    """Scripted corrective teacher; stateful only in its emission counter."""

    def __init__(self, kind: str, cfg: TeacherConfig):
        self.kind = kind
        self.cfg = cfg
        self.emissions = 0

    def feedback(self, state, a_robot, step_index: int, rng):
        """Returns an ObservedCorrection, or None when no feedback is due."""
        cfg = self.cfg
        if step_index % cfg.cadence != 0:
            return None
        a_r = np.asarray(a_robot, dtype=np.float64)
        a_star = teacher_optimal_action(self.kind, state, a_r)
        gap = float(np.linalg.norm(a_star - a_r))
        if gap <= cfg.threshold:
            return None
        if cfg.feedback == ACCURATE_ABSOLUTE:
            corr = ObservedCorrection(state, a_r, a_star, kind=ABSOLUTE)
        elif cfg.feedback == GAUSSIAN_NOISE:
            if cfg.noise_as_variance:
                std = np.sqrt(cfg.noise_scale) * gap
            else:
                std = cfg.noise_scale * gap * gap
            a_h = clip_to_box(a_star + std * rng.standard_normal(a_r.size))
            if np.array_equal(a_h, a_r):
                return None
            corr = ObservedCorrection(state, a_r, a_h, kind=ABSOLUTE)
        elif cfg.feedback == PARTIAL_FEEDBACK:
            if a_r.size % 2 != 0 or a_r.size < 4:
                raise ConfigurationError("partial feedback needs two sub-agents")
            half = a_r.size // 2
            mask = np.zeros(a_r.size, dtype=bool)
            if self.emissions % 2 == 0:
                mask[:half] = True
            else:
                mask[half:] = True
            a_h = a_r.copy()
            a_h[mask] = a_star[mask]
            if np.array_equal(a_h, a_r):
                return None
            corr = ObservedCorrection(state, a_r, a_h, kind=PARTIAL, mask=mask)
        elif cfg.feedback == ACCURATE_RELATIVE:
            h = (a_star - a_r) / gap
            a_h = clip_to_box(a_r + cfg.magnitude * h)
            if np.array_equal(a_h, a_r):
                return None
            corr = ObservedCorrection(state, a_r, a_h, kind=RELATIVE)
        else:  # DIRECTION_NOISE
            h_star = (a_star - a_r) / gap
            beta = cfg.direction_noise_deg
            if beta == 0.0:
                h_rot = h_star
            elif a_r.size == 2:
                sign = 1.0 if rng.uniform() < 0.5 else -1.0
                ang = np.radians(beta) * sign
                rot = np.array(
                    [[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]]
                )
                h_rot = rot @ h_star
            else:
                h_rot = sample_negative_directions(h_star, beta, 1, rng)[0]
            a_h = clip_to_box(a_r + cfg.magnitude * h_rot)
            if np.array_equal(a_h, a_r):
                return None
            corr = ObservedCorrection(state, a_r, a_h, kind=RELATIVE)
        self.emissions += 1
        return corr


def make_toy_dataset(trial_seed: int, n_points: int, sigma: float = 0.15, min_sep: float = 0.2):
    """Noisy single-state correction set for offline overfitting studies.

    Human actions are Gaussian draws around the optimum (the origin),
    clipped to the box; robot actions are uniform box points at least
    ``min_sep`` away from their human action.
    """
    if sigma <= 0:
        raise ConfigurationError("sigma must be positive")
    if n_points < 1:
        raise ConfigurationError("need at least one data point")
    rng = np.random.default_rng(trial_seed)
    state = np.zeros(1)
    records = []
    for _ in range(n_points):
        a_h = clip_to_box(sigma * rng.standard_normal(2))
        while True:
            a_r = rng.uniform(ACTION_LOW, ACTION_HIGH, 2)
            if np.linalg.norm(a_r - a_h) > min_sep:
                break
        records.append(ObservedCorrection(state, a_r, a_h, kind=ABSOLUTE))
    return records


@dataclass
class EpisodeRecord:
    """Per-step trace of one episode plus its outcome."""

    steps: list = field(default_factory=list)  # dicts: state, robot_action, human_action
    success: bool = False
    n_steps: int = 0

    def add(self, state, a_robot, a_human=None):
        self.steps.append(
            {
                "state": np.asarray(state).tolist(),
                "robot_action": np.asarray(a_robot).tolist(),
                "human_action": None if a_human is None else np.asarray(a_human).tolist(),
            }
        )
        self.n_steps += 1

    def to_jsonl(self) -> str:
        lines = [json.dumps(s) for s in self.steps]
        lines.append(json.dumps({"success": self.success, "n_steps": self.n_steps}))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_jsonl(text: str) -> "EpisodeRecord":
        rows = [json.loads(line) for line in text.strip().splitlines()]
        if not rows or "success" not in rows[-1]:
            raise ValueError("episode record missing its trailer line")
        rec = EpisodeRecord(steps=rows[:-1])
        rec.success = bool(rows[-1]["success"])
        rec.n_steps = int(rows[-1]["n_steps"])
        return rec


def write_episodes(records, path) -> None:
    """Append-style export: each episode is its step lines plus a trailer."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_jsonl())


def read_episodes(path) -> list:
    records, chunk = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            chunk.append(line)
            if "\"success\"" in line:
                records.append(EpisodeRecord.from_jsonl("\n".join(chunk)))
                chunk = []
    if chunk:
        raise ValueError("trailing steps without an episode trailer")
    return records
