"""Policy representations and gradient-based action sampling.

Two policy families live here: an implicit policy given by a scalar energy
network over (state, action) pairs, and an explicit Gaussian policy whose
mean network maps states to squashed actions.  Low energy marks preferred
actions; sampling and inference walk the energy landscape with
gradient-descent steps plus Gaussian noise, clipped to the action box
[-1, 1]^dim after every step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .nn import IDENTITY, SQUASH, MlpParams, MlpSpec, init_params, mlp_forward, mlp_value_and_input_grad

log = logging.getLogger(__name__)

ACTION_LOW = -1.0
ACTION_HIGH = 1.0


def clip_to_box(actions):
    return np.clip(actions, ACTION_LOW, ACTION_HIGH)


@dataclass
class EnergyModel:
    """Scalar energy network over concatenated (state, action) inputs."""

    spec: MlpSpec
    params: MlpParams
    state_dim: int
    action_dim: int

    def __post_init__(self):
        if self.spec.in_dim != self.state_dim + self.action_dim:
            raise ConfigurationError(
                f"energy net input width {self.spec.in_dim} != "
                f"state_dim {self.state_dim} + action_dim {self.action_dim}"
            )
        if self.spec.out_dim != 1 or self.spec.output_head != IDENTITY:
            raise ConfigurationError("energy nets output a single identity-head scalar")

    @staticmethod
    def create(state_dim, action_dim, hidden_widths, rng) -> "EnergyModel":
        spec = MlpSpec((state_dim + action_dim,) + tuple(hidden_widths) + (1,))
        return EnergyModel(spec, init_params(spec, rng), state_dim, action_dim)

    def energy(self, states, actions) -> np.ndarray:
        """Energies for row-aligned batches; shape (B,)."""
        x = np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1)
        out, _ = mlp_forward(self.spec, self.params, x)
        return out[:, 0]

    def energy_and_action_grad(self, states, actions):
        """Energies plus d(energy)/d(action) for each row."""
        x = np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1)
        out, gx = mlp_value_and_input_grad(self.spec, self.params, x)
        return out[:, 0], gx[:, self.state_dim :]


@dataclass
class GaussianPolicy:
    """Explicit policy: squashed mean network, degenerate covariance.

    Actions are always the mean; the nominal covariance is never sampled.
    """

    spec: MlpSpec
    params: MlpParams
    state_dim: int
    action_dim: int

    def __post_init__(self):
        if self.spec.in_dim != self.state_dim:
            raise ConfigurationError("mean net input width must equal state_dim")
        if self.spec.out_dim != self.action_dim or self.spec.output_head != SQUASH:
            raise ConfigurationError("mean net must map to action_dim squashed outputs")

    @staticmethod
    def create(state_dim, action_dim, hidden_widths, rng) -> "GaussianPolicy":
        spec = MlpSpec(
            (state_dim,) + tuple(hidden_widths) + (action_dim,), output_head=SQUASH
        )
        return GaussianPolicy(spec, init_params(spec, rng), state_dim, action_dim)

    def mean(self, states) -> np.ndarray:
        out, _ = mlp_forward(self.spec, self.params, np.atleast_2d(states))
        return out


def gaussian_act(policy: GaussianPolicy, state) -> np.ndarray:
    """Deterministic action: the squashed mean, componentwise in [-1, 1]."""
    return policy.mean(np.asarray(state)[None, :])[0]


@dataclass
class LangevinConfig:
    """Settings for gradient-based MCMC over the action box.

    The step size follows ``step(i) = step_size * (1 - i/n_steps)**decay_power
    + step_min``.  Noise per step is ``sqrt(2 * step * tau) * standard
    normal`` with temperature ``tau = (step / step_size)**noise_anneal``:
    ``noise_anneal = 0`` is the textbook unadjusted-Langevin noise, while
    the default cools the chains toward pure descent as the step decays,
    which is what makes best-of-N inference land on minima instead of
    hovering at the Gibbs spread.
    """

    n_samples: int = 64
    n_steps: int = 25
    step_size: float = 0.1
    step_min: float = 1e-5
    decay_power: float = 2.0
    noise: bool = True
    noise_anneal: float = 2.0
    seed: int | None = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigurationError("n_steps must be >= 1")
        if self.step_size <= 0:
            raise ConfigurationError("step_size must be > 0")
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be >= 1")

    def step_at(self, i: int) -> float:
        return self.step_size * (1.0 - i / self.n_steps) ** self.decay_power + self.step_min

    def noise_std_at(self, i: int) -> float:
        lam = self.step_at(i)
        tau = (lam / self.step_size) ** self.noise_anneal
        return np.sqrt(2.0 * lam * tau)


def inference_config(n_samples=512, n_steps=50, step_size=0.5, seed=None) -> LangevinConfig:
    """Default chain settings for action inference (argmin of the energy)."""
    return LangevinConfig(
        n_samples=n_samples, n_steps=n_steps, step_size=step_size, seed=seed
    )


def langevin_sample_batch(model, states, cfg: LangevinConfig, rng, greedy_final=False):
    """Run ``cfg.n_samples`` chains for each of R states.

    Returns ``(actions, energies, n_restarts)`` with actions of shape
    (R, n_samples, action_dim) and energies of the final samples
    (R, n_samples).  Chains hitting non-finite gradients are restarted from
    the uniform distribution and counted.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    n_states = states.shape[0]
    dim = model.action_dim
    n = cfg.n_samples
    tiled = np.repeat(states, n, axis=0)
    actions = rng.uniform(ACTION_LOW, ACTION_HIGH, size=(n_states * n, dim))
    n_restarts = 0
    for i in range(cfg.n_steps):
        lam = cfg.step_at(i)
        _, grad = model.energy_and_action_grad(tiled, actions)
        bad = ~np.isfinite(grad).all(axis=1)
        if bad.any():
            n_restarts += int(bad.sum())
            actions[bad] = rng.uniform(ACTION_LOW, ACTION_HIGH, size=(int(bad.sum()), dim))
            grad[bad] = 0.0
        actions = actions - lam * grad
        if cfg.noise and not (greedy_final and i == cfg.n_steps - 1):
            actions = actions + cfg.noise_std_at(i) * rng.standard_normal(actions.shape)
        actions = clip_to_box(actions)
    energies = model.energy(tiled, actions).reshape(n_states, n)
    if n_restarts:
        log.warning("langevin: restarted %d chains after non-finite gradients", n_restarts)
    return actions.reshape(n_states, n, dim), energies, n_restarts


def langevin_sample(model, state, cfg: LangevinConfig, rng) -> np.ndarray:
    """Draw ``cfg.n_samples`` actions for one state; shape (n_samples, dim)."""
    actions, _, _ = langevin_sample_batch(model, np.asarray(state)[None, :], cfg, rng)
    return actions[0]


def infer_action(model, state, cfg: LangevinConfig, rng=None) -> np.ndarray:
    """Best action for a state: minimum final energy over all chains.

    The final chain step is run without noise so repeated calls with the
    same generator state are repeatable greedy descents.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    actions, energies, _ = langevin_sample_batch(
        model, np.asarray(state)[None, :], cfg, rng, greedy_final=True
    )
    return actions[0, int(np.argmin(energies[0]))]


def softmax_neg_energy(energies) -> np.ndarray:
    """Probabilities proportional to exp(-E), stabilized by shifting logits."""
    e = np.asarray(energies, dtype=np.float64)
    z = -e
    z = z - z.max(axis=-1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=-1, keepdims=True)


def estimate_policy_probs(model, state, samples) -> np.ndarray:
    """Normalized policy probabilities of the sampled actions under the model."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if samples.shape[0] == 0:
        raise ValueError("cannot estimate probabilities from an empty sample list")
    states = np.repeat(np.asarray(state, dtype=np.float64)[None, :], samples.shape[0], axis=0)
    return softmax_neg_energy(model.energy(states, samples))


@dataclass
class ActionSampleSet:
    """Sampled action support for one state: [human, robot] then chains."""

    state: np.ndarray
    actions: np.ndarray  # (n_samples + 2, action_dim)
    energies: np.ndarray  # (n_samples + 2,)

    @property
    def human_index(self) -> int:
        return 0

    @property
    def robot_index(self) -> int:
        return 1


def build_sample_set(model, state, a_human, a_robot, cfg: LangevinConfig, rng) -> ActionSampleSet:
    state = np.asarray(state, dtype=np.float64)
    chains = langevin_sample(model, state, cfg, rng)
    actions = np.vstack([np.asarray(a_human)[None, :], np.asarray(a_robot)[None, :], chains])
    states = np.repeat(state[None, :], actions.shape[0], axis=0)
    return ActionSampleSet(state=state, actions=actions, energies=model.energy(states, actions))
