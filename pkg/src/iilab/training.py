"""Interactive training loop, evaluation, and experiment analyses.

The loop mirrors the interactive protocol: the agent acts, the teacher
occasionally corrects, corrections land in a replay buffer, and the agent
updates both on a step cadence and whenever feedback arrives, plus a block
of updates at every episode end.  Evaluations run with the teacher off.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import make_agent
from .buffer import ReplayBuffer
from .config import ExperimentConfig
from .ebm import softmax_neg_energy
from .envs import Environment, EpisodeRecord, Teacher, env_dims, make_toy_dataset, write_episodes
from .errors import NumericsError, TrainingDiverged

log = logging.getLogger(__name__)


@dataclass
class MetricsLog:
    """Collected run metrics; evaluation timesteps are strictly increasing."""

    evaluations: list = field(default_factory=list)  # (timestep, success_rate)
    feedback_per_episode: list = field(default_factory=list)
    episodes_run: int = 0
    total_steps: int = 0
    total_updates: int = 0

    @property
    def final_success(self) -> float:
        return self.evaluations[-1][1] if self.evaluations else 0.0

    def to_dict(self) -> dict:
        return {
            "evaluations": [[int(t), float(sr)] for t, sr in self.evaluations],
            "feedback_per_episode": list(self.feedback_per_episode),
            "episodes_run": self.episodes_run,
            "total_steps": self.total_steps,
            "total_updates": self.total_updates,
        }


def evaluate(agent, env_kind: str, n_rollouts: int, rng, horizon: int = 50) -> float:
    """Success fraction of policy rollouts with the teacher disabled."""
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    wins = 0
    for _ in range(n_rollouts):
        env = Environment(env_kind, horizon=horizon)
        state = env.reset(rng)
        done = False
        while not done:
            state, done, success = env.step(agent.act(state, rng))
        wins += int(success)
    return wins / n_rollouts


def run_iil(config: ExperimentConfig, out_dir: str | None = None, agent=None) -> MetricsLog:
    """Run the full interactive-corrections protocol for one configuration.

    A fixed master seed makes the run bitwise reproducible.  A non-finite
    loss aborts the run, writing a diagnostic checkpoint when ``out_dir``
    is given.
    """
    seq = np.random.SeedSequence(config.seed)
    env_rng, teacher_rng, batch_rng, eval_rng = (
        np.random.default_rng(s) for s in seq.spawn(4)
    )
    env = Environment(config.env, horizon=config.horizon)
    teacher = Teacher(config.env, config.teacher)
    buffer = ReplayBuffer(config.buffer_capacity)
    if agent is None:
        agent = make_agent(config)
    logbook = MetricsLog()

    def do_update():
        if len(buffer) == 0:
            return  # nothing to sample -> update skipped
        try:
            agent.update(buffer.sample(config.batch_size, batch_rng))
        except NumericsError as exc:
            path = None
            if out_dir is not None:
                from .checkpoint import save_checkpoint

                path = Path(out_dir) / "diverged.ckpt.json"
                save_checkpoint(agent, path, config=config)
            raise TrainingDiverged(f"training diverged: {exc}", checkpoint_path=path)
        logbook.total_updates += 1

    episode_records = [] if out_dir is not None else None
    for episode in range(config.episodes):
        state = env.reset(env_rng)
        done = False
        t = 0
        n_feedback = 0
        record = EpisodeRecord() if episode_records is not None else None
        while not done:
            t += 1
            action = agent.act(state, env_rng)
            corr = teacher.feedback(state, action, t, teacher_rng)
            if corr is not None:
                buffer.append(corr)
                n_feedback += 1
            if record is not None:
                record.add(state, action, None if corr is None else corr.human_action)
            if t % config.update_every == 0 or corr is not None:
                do_update()
            state, done, success = env.step(action)
            logbook.total_steps += 1
        if record is not None:
            record.success = bool(success)
            episode_records.append(record)
        for _ in range(config.n_training):
            do_update()
        logbook.feedback_per_episode.append(n_feedback)
        logbook.episodes_run = episode + 1
        last = episode == config.episodes - 1
        if (episode + 1) % config.eval_every == 0 or last:
            sr = evaluate(agent, config.env, config.eval_rollouts, eval_rng, config.horizon)
            logbook.evaluations.append((logbook.total_steps, sr))
            log.info(
                "%s ep %d: success %.2f (%d steps, %d feedback)",
                config.method, episode + 1, sr, logbook.total_steps, n_feedback,
            )
            if config.early_stop_success is not None and sr >= config.early_stop_success:
                break
    if out_dir is not None:
        write_metrics(logbook, config, Path(out_dir))
        write_episodes(episode_records, Path(out_dir) / "episodes.jsonl")
    return logbook


def convergence_timestep(evaluations, final_window: int = 8):
    """Earliest timestep whose success reaches 90% of the final level.

    The final level is the mean success of the last ``final_window``
    evaluations; an all-zero final level has no convergence point.
    """
    if len(evaluations) < 2:
        raise ValueError("need at least two evaluations")
    timesteps = [t for t, _ in evaluations]
    if any(b <= a for a, b in zip(timesteps, timesteps[1:])):
        raise ValueError("evaluation timesteps must be strictly increasing")
    rates = [sr for _, sr in evaluations]
    final = float(np.mean(rates[-final_window:]))
    if final <= 0:
        return None
    for t, sr in evaluations:
        if sr >= 0.9 * final:
            return t
    return None


def write_metrics(logbook: MetricsLog, config: ExperimentConfig, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestep", "success_rate"])
        writer.writerows(logbook.evaluations)
    summary = {
        "final_success_rate": logbook.final_success,
        "convergence_timestep": (
            convergence_timestep(logbook.evaluations, config.final_window)
            if len(logbook.evaluations) >= 2
            else None
        ),
        "feedback_total": int(sum(logbook.feedback_per_episode)),
        "episodes_run": logbook.episodes_run,
        "total_updates": logbook.total_updates,
        "config_digest": config.digest(),
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)


def energy_grid(model, state, resolution: int = 101, low: float = -1.0, high: float = 1.0):
    """Energies over a 2D action grid for a fixed state; returns (axis, E)."""
    if model.action_dim != 2:
        raise ValueError("landscape grids need a 2D action space")
    axis = np.linspace(low, high, resolution)
    aa, bb = np.meshgrid(axis, axis, indexing="ij")
    actions = np.column_stack([aa.ravel(), bb.ravel()])
    states = np.repeat(np.asarray(state, dtype=np.float64)[None, :], actions.shape[0], axis=0)
    energies = model.energy(states, actions).reshape(resolution, resolution)
    return axis, energies


def find_local_minima(energies: np.ndarray):
    """Strict 8-neighborhood minima as (i, j) indices; interior cells only.

    Returns ``(minima, boundary_fallback)``; when no interior minimum
    exists the global argmin (necessarily on the boundary) is returned and
    flagged.
    """
    e = np.asarray(energies)
    padded = np.pad(e, 1, constant_values=np.inf)
    strict = np.ones_like(e, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neighbor = padded[1 + di : 1 + di + e.shape[0], 1 + dj : 1 + dj + e.shape[1]]
            strict &= e < neighbor
    strict[0, :] = strict[-1, :] = False
    strict[:, 0] = strict[:, -1] = False
    idx = np.argwhere(strict)
    if idx.size:
        return [tuple(ij) for ij in idx], False
    flat = int(np.argmin(e))
    return [np.unravel_index(flat, e.shape)], True


def toy_metrics(models, datasets, state=None, resolution: int = 101):
    """Overfitting diagnostics over a family of trials.

    Per trial: squared distance of each grid minimum to the origin (the
    optimum) and to its nearest human action.  Across trials: per-cell
    variance of min-max-normalized energies, averaged over the grid.
    """
    if len(models) != len(datasets):
        raise ValueError("one dataset per model is required")
    if state is None:
        state = np.zeros(1)
    mse_opt, mse_human, norm_grids, flags = [], [], [], []
    axis = None
    for model, data in zip(models, datasets):
        axis, energies = energy_grid(model, state, resolution)
        minima, fallback = find_local_minima(energies)
        flags.append(fallback)
        if fallback:
            log.warning("no interior minimum; using the boundary argmin")
        points = np.array([[axis[i], axis[j]] for i, j in minima])
        humans = np.vstack([c.human_action for c in data])
        mse_opt.append(float(np.mean(np.sum(points**2, axis=1))))
        d2 = ((points[:, None, :] - humans[None, :, :]) ** 2).sum(axis=2)
        mse_human.append(float(np.mean(d2.min(axis=1))))
        spread = energies.max() - energies.min()
        norm_grids.append(
            (energies - energies.min()) / spread if spread > 0 else np.zeros_like(energies)
        )
    stack = np.stack(norm_grids)
    return {
        "mse_to_optimal": float(np.mean(mse_opt)),
        "mse_to_human": float(np.mean(mse_human)),
        "cross_trial_variance": float(stack.var(axis=0).mean()),
        "per_trial_mse_to_optimal": mse_opt,
        "per_trial_mse_to_human": mse_human,
        "boundary_fallbacks": flags,
    }


def run_toy_trials(
    base_config: ExperimentConfig,
    n_trials: int = 10,
    n_steps: int = 1000,
    sigma: float = 0.15,
    seed: int = 0,
):
    """Train one agent per random single-state dataset, offline."""
    agents, datasets = [], []
    for trial in range(n_trials):
        n_points = 6 + (trial % 2)  # alternate 6- and 7-point datasets
        data = make_toy_dataset(seed * 1000 + trial, n_points, sigma=sigma)
        cfg_dict = base_config.to_dict()
        cfg_dict["seed"] = seed * 1000 + trial
        config = ExperimentConfig.from_dict(cfg_dict)
        agent = make_agent(config)
        agent.fit(data, n_steps=n_steps, batch_size=config.batch_size)
        agents.append(agent)
        datasets.append(data)
    return agents, datasets


def dump_landscape(model, state, path, resolution: int = 101, low=-1.0, high=1.0) -> None:
    """Write the (a1, a2, energy) grid as CSV with a bounds header."""
    axis, energies = energy_grid(model, state, resolution, low, high)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# bounds={low},{high} resolution={resolution}\n")
        writer = csv.writer(fh)
        writer.writerow(["a1", "a2", "energy"])
        for i in range(resolution):
            for j in range(resolution):
                writer.writerow([axis[i], axis[j], energies[i, j]])


def estimated_policy_mass(model, state, region, n_mc: int = 512, rng=None) -> float:
    """Share of the policy's probability mass inside a hard region.

    Importance-weights uniform box samples by exp(-E); the region only
    needs a ``contains`` method.
    """
    rng = rng or np.random.default_rng(0)
    actions = rng.uniform(-1.0, 1.0, size=(n_mc, model.action_dim))
    states = np.repeat(np.asarray(state, dtype=np.float64)[None, :], n_mc, axis=0)
    weights = softmax_neg_energy(model.energy(states, actions))
    return float(weights[region.contains(actions)].sum())
