"""Estimator-style agents: one class per policy family, method-dispatched.

Agents follow the scikit-learn convention: constructors only record
hyperparameters (``get_params``/``set_params`` work out of the box),
``fit`` trains offline on a list of corrections, ``predict`` maps states
to actions, and ``update`` applies one interactive training step on a
sampled batch.  The implicit agents shape an energy model; the explicit
agents shape a squashed Gaussian mean network.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import config as cfgmod
from .ebm import (
    EnergyModel,
    GaussianPolicy,
    LangevinConfig,
    gaussian_act,
    infer_action,
    inference_config,
    langevin_sample_batch,
)
from .errors import ConfigurationError, NumericsError
from .losses import (
    LossReport,
    bc_report_batch,
    bdcoach_losses,
    gradient_penalty_batch,
    hinge_report_batch,
    infonce_report_batch,
    kl_report_batch,
    pvp_loss,
    target_policy_weighted,
    target_uniform,
)
from .nn import AdamState, MlpSpec, adam_step, init_params, mlp_forward
from .spaces import (
    ABSOLUTE,
    PARTIAL,
    RELATIVE,
    CircularSpec,
    PolytopeSpec,
    ball_region,
    make_pairs_polytope,
    obs_prob_circular,
    obs_prob_polytope,
)
from .validation import check_correction_batch, check_states


def _sample_batch(records: list, batch_size: int, rng) -> list:
    k = min(batch_size, len(records))
    idx = rng.choice(len(records), size=k, replace=False)
    return [records[i] for i in idx]


class _AgentCore(BaseEstimator):
    """Shared plumbing: lazy setup, offline fit loop, Adam bookkeeping."""

    def _setup(self):
        raise NotImplementedError

    def _ensure_ready(self):
        if not getattr(self, "_ready", False):
            self._setup()
            self._ready = True

    def fit(self, corrections, n_steps: int = 1000, batch_size: int | None = None):
        """Offline training: ``n_steps`` updates on batches of the data."""
        self._ensure_ready()
        records = list(corrections)
        if not records:
            raise ConfigurationError("fit needs at least one correction")
        bs = batch_size or self.batch_size
        for _ in range(n_steps):
            self.update(_sample_batch(records, bs, self._rng))
        return self

    def update(self, batch) -> LossReport:
        raise NotImplementedError

    def act(self, state, rng=None) -> np.ndarray:
        raise NotImplementedError

    def predict(self, states) -> np.ndarray:
        self._ensure_ready()
        x = check_states(states, self.state_dim)
        return np.vstack([self.act(row) for row in x])


class EnergyAgent(_AgentCore):
    """Implicit policy shaped by set-based losses over sampled actions.

    ``method`` selects the objective: ``polytope`` and ``circular`` shape
    the model toward desired action spaces via the posterior-matching KL
    loss; ``ibc`` runs the contrastive classification loss against chain
    negatives; ``pvp`` regresses the two observed actions to proxy values.
    """

    def __init__(
        self,
        method: str = cfgmod.POLYTOPE,
        state_dim: int = 4,
        action_dim: int = 2,
        hidden_widths=(64, 64, 64, 32),
        space=None,
        langevin: LangevinConfig | None = None,
        inference: LangevinConfig | None = None,
        learning_rate: float = 3e-4,
        adam_beta1: float = 0.1,
        adam_beta2: float = 0.999,
        adam_eps: float = 1e-7,
        uniform_prior: bool = False,
        differentiate_target: bool = False,
        penalty_weight: float = 1.0,
        penalty_delta: float = 1e-3,
        penalty_margin: float = 1.0,
        penalty_max_samples: int | None = None,
        batch_size: int = 32,
        seed: int = 0,
    ):
        self.method = method
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.hidden_widths = hidden_widths
        self.space = space
        self.langevin = langevin
        self.inference = inference
        self.learning_rate = learning_rate
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.adam_eps = adam_eps
        self.uniform_prior = uniform_prior
        self.differentiate_target = differentiate_target
        self.penalty_weight = penalty_weight
        self.penalty_delta = penalty_delta
        self.penalty_margin = penalty_margin
        self.penalty_max_samples = penalty_max_samples
        self.batch_size = batch_size
        self.seed = seed

    def _setup(self):
        if self.method not in cfgmod.ENERGY_METHODS:
            raise ConfigurationError(f"{self.method!r} is not an energy-model method")
        self._rng = np.random.default_rng(self.seed)
        self._space = self.space
        if self._space is None and self.method == cfgmod.POLYTOPE:
            self._space = PolytopeSpec()
        if self._space is None and self.method == cfgmod.CIRCULAR:
            self._space = CircularSpec()
        if self.method == cfgmod.POLYTOPE and not isinstance(self._space, PolytopeSpec):
            raise ConfigurationError("polytope method needs a PolytopeSpec")
        if self.method == cfgmod.CIRCULAR and not isinstance(self._space, CircularSpec):
            raise ConfigurationError("circular method needs a CircularSpec")
        self._langevin = self.langevin or LangevinConfig()
        self._inference = self.inference or inference_config(n_samples=64)
        self.model_ = EnergyModel.create(
            self.state_dim, self.action_dim, self.hidden_widths, self._rng
        )
        self._adam = AdamState.zeros(self.model_.params)

    @property
    def allowed_kinds(self):
        if self.method == cfgmod.CIRCULAR:
            return (ABSOLUTE,)
        if self.method == cfgmod.POLYTOPE:
            return (ABSOLUTE, RELATIVE, PARTIAL)
        return (ABSOLUTE, RELATIVE, PARTIAL)

    def update(self, batch) -> LossReport:
        self._ensure_ready()
        batch = check_correction_batch(batch, self.state_dim, self.action_dim, self.allowed_kinds)
        states = np.vstack([c.state for c in batch])
        a_h = np.vstack([c.human_action for c in batch])
        a_r = np.vstack([c.robot_action for c in batch])
        if self.method == cfgmod.PVP:
            report = pvp_loss(self.model_, states, a_r, a_h)
        else:
            chains, _, _ = langevin_sample_batch(self.model_, states, self._langevin, self._rng)
            if self.method == cfgmod.IBC:
                actions = np.concatenate([a_h[:, None, :], chains], axis=1)
                report = infonce_report_batch(self.model_, states, actions)
            else:
                actions = np.concatenate([a_h[:, None, :], a_r[:, None, :], chains], axis=1)
                report = self._desired_space_report(batch, states, actions)
                if self.penalty_weight > 0:
                    report = self._add_penalty(report, states, chains)
        self._apply(report)
        return report

    def _desired_space_report(self, batch, states, actions) -> LossReport:
        r, n, _ = actions.shape
        obs = np.empty((r, n))
        for i, corr in enumerate(batch):
            if self.method == cfgmod.POLYTOPE:
                pairs = make_pairs_polytope(corr, self._space, self._rng)
                obs[i] = obs_prob_polytope(actions[i], pairs, self._space.temperature)
            else:
                obs[i] = obs_prob_circular(
                    actions[i],
                    corr.robot_action,
                    corr.human_action,
                    self._space.eps,
                    self._space.temperature,
                )
        tiled = np.repeat(states, n, axis=0)
        energies = self.model_.energy(tiled, actions.reshape(r * n, -1)).reshape(r, n)
        targets = np.empty((r, n))
        for i in range(r):
            if self.uniform_prior:
                targets[i] = target_uniform(obs[i])
            else:
                targets[i] = target_policy_weighted(obs[i], energies[i])
        return kl_report_batch(
            self.model_,
            states,
            actions,
            targets,
            obs_probs=obs,
            differentiate_target=self.differentiate_target,
        )

    def _add_penalty(self, report: LossReport, states, chains) -> LossReport:
        r, n, a_dim = chains.shape
        k = n if self.penalty_max_samples is None else min(self.penalty_max_samples, n)
        subset = chains[:, :k, :].reshape(r * k, a_dim)
        tiled = np.repeat(states, k, axis=0)
        penalty = gradient_penalty_batch(
            self.model_,
            tiled,
            subset,
            delta=self.penalty_delta,
            margin=self.penalty_margin,
            weight=self.penalty_weight,
        )
        grads = report.grads.scaled_add(penalty.grads, 1.0)
        extras = dict(report.extras)
        extras["penalty"] = penalty.value
        return LossReport(report.value + penalty.value, grads, extras)

    def _apply(self, report: LossReport):
        if not np.isfinite(report.value):
            raise NumericsError(f"non-finite loss {report.value!r}")
        self.model_.params, self._adam = adam_step(
            self.model_.params,
            report.grads,
            self._adam,
            lr=self.learning_rate,
            beta1=self.adam_beta1,
            beta2=self.adam_beta2,
            eps=self.adam_eps,
        )

    def act(self, state, rng=None) -> np.ndarray:
        self._ensure_ready()
        return infer_action(self.model_, state, self._inference, rng or self._rng)

    def region_for(self, corr):
        """Concrete desired region of one correction under this agent's spec."""
        self._ensure_ready()
        if self.method == cfgmod.CIRCULAR:
            return ball_region(corr, self._space)
        return make_pairs_polytope(corr, self._space, self._rng)


class GaussianAgent(_AgentCore):
    """Explicit squashed-Gaussian policy trained point-wise.

    ``hinge`` drives the mean into each correction's pair polytope;
    ``hg_dagger`` and ``d_coach`` regress the mean onto stored human
    actions; ``bd_coach`` additionally learns a correction-direction model
    and chases its relabelled targets.
    """

    def __init__(
        self,
        method: str = cfgmod.HINGE,
        state_dim: int = 4,
        action_dim: int = 2,
        hidden_widths=(64, 64, 64, 32),
        space=None,
        learning_rate: float = 3e-4,
        adam_beta1: float = 0.1,
        adam_beta2: float = 0.999,
        adam_eps: float = 1e-7,
        relative_magnitude: float = 0.2,
        batch_size: int = 32,
        seed: int = 0,
    ):
        self.method = method
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.hidden_widths = hidden_widths
        self.space = space
        self.learning_rate = learning_rate
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.adam_eps = adam_eps
        self.relative_magnitude = relative_magnitude
        self.batch_size = batch_size
        self.seed = seed

    def _setup(self):
        if self.method not in cfgmod.EXPLICIT_METHODS:
            raise ConfigurationError(f"{self.method!r} is not an explicit-policy method")
        self._rng = np.random.default_rng(self.seed)
        self._space = self.space or PolytopeSpec()
        if self.method == cfgmod.HINGE and not isinstance(self._space, PolytopeSpec):
            raise ConfigurationError("hinge method needs a PolytopeSpec")
        self.policy_ = GaussianPolicy.create(
            self.state_dim, self.action_dim, self.hidden_widths, self._rng
        )
        self._adam = AdamState.zeros(self.policy_.params)
        if self.method == cfgmod.BD_COACH:
            spec = MlpSpec(
                (self.state_dim + self.action_dim,)
                + tuple(self.hidden_widths)
                + (self.action_dim,),
                output_head="squash",
            )
            self.human_model_ = _DirectionModel(spec, init_params(spec, self._rng))
            self._human_adam = AdamState.zeros(self.human_model_.params)

    @property
    def allowed_kinds(self):
        if self.method == cfgmod.HINGE:
            return (ABSOLUTE, RELATIVE)
        return (ABSOLUTE, RELATIVE, PARTIAL)

    def update(self, batch) -> LossReport:
        self._ensure_ready()
        batch = check_correction_batch(batch, self.state_dim, self.action_dim, self.allowed_kinds)
        states = np.vstack([c.state for c in batch])
        a_h = np.vstack([c.human_action for c in batch])
        a_r = np.vstack([c.robot_action for c in batch])
        if self.method == cfgmod.HINGE:
            pair_sets = [make_pairs_polytope(c, self._space, self._rng) for c in batch]
            report = hinge_report_batch(self.policy_, states, pair_sets)
        elif self.method == cfgmod.BD_COACH:
            diff = a_h - a_r
            h = diff / np.linalg.norm(diff, axis=1, keepdims=True)
            human_report, report = bdcoach_losses(
                self.human_model_, self.policy_, states, a_r, h, e=self.relative_magnitude
            )
            if not np.isfinite(human_report.value):
                raise NumericsError("non-finite human-model loss")
            self.human_model_.params, self._human_adam = adam_step(
                self.human_model_.params,
                human_report.grads,
                self._human_adam,
                lr=self.learning_rate,
                beta1=self.adam_beta1,
                beta2=self.adam_beta2,
                eps=self.adam_eps,
            )
            report.extras["human_loss"] = human_report.value
        else:  # hg_dagger, d_coach: clone the stored human actions
            report = bc_report_batch(self.policy_, states, a_h)
        if not np.isfinite(report.value):
            raise NumericsError(f"non-finite loss {report.value!r}")
        self.policy_.params, self._adam = adam_step(
            self.policy_.params,
            report.grads,
            self._adam,
            lr=self.learning_rate,
            beta1=self.adam_beta1,
            beta2=self.adam_beta2,
            eps=self.adam_eps,
        )
        return report

    def act(self, state, rng=None) -> np.ndarray:
        self._ensure_ready()
        return gaussian_act(self.policy_, np.asarray(state))

    def predict(self, states) -> np.ndarray:
        self._ensure_ready()
        return self.policy_.mean(check_states(states, self.state_dim))

    def region_for(self, corr):
        self._ensure_ready()
        return make_pairs_polytope(corr, self._space, self._rng)


class _DirectionModel:
    """Maps (state, robot action) to an estimated correction direction."""

    def __init__(self, spec: MlpSpec, params):
        self.spec = spec
        self.params = params

    def predict(self, states, actions) -> np.ndarray:
        x = np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1)
        return mlp_forward(self.spec, self.params, x)[0]


def compatible(method: str, feedback: str) -> bool:
    """Method/feedback compatibility matrix for interactive runs."""
    from .envs import ACCURATE_ABSOLUTE, GAUSSIAN_NOISE, PARTIAL_FEEDBACK

    if method == cfgmod.CIRCULAR:
        return feedback in (ACCURATE_ABSOLUTE, GAUSSIAN_NOISE)
    if method == cfgmod.HINGE:
        return feedback != PARTIAL_FEEDBACK
    return True


def make_agent(config) -> _AgentCore:
    """Build the configured agent for an environment, validating the pairing."""
    from .envs import env_dims

    state_dim, action_dim = env_dims(config.env)
    if not compatible(config.method, config.teacher.feedback):
        raise ConfigurationError(
            f"method {config.method!r} cannot learn from {config.teacher.feedback!r} feedback"
        )
    common = dict(
        state_dim=state_dim,
        action_dim=action_dim,
        hidden_widths=config.hidden_widths,
        space=config.space,
        learning_rate=config.learning_rate,
        adam_beta1=config.adam_beta1,
        adam_beta2=config.adam_beta2,
        adam_eps=config.adam_eps,
        batch_size=config.batch_size,
        seed=config.seed,
    )
    if config.method in cfgmod.ENERGY_METHODS:
        return EnergyAgent(
            method=config.method,
            langevin=config.langevin,
            inference=config.inference,
            uniform_prior=config.uniform_prior,
            differentiate_target=config.differentiate_target,
            penalty_weight=config.penalty_weight,
            penalty_delta=config.penalty_delta,
            penalty_margin=config.penalty_margin,
            penalty_max_samples=config.penalty_max_samples,
            **common,
        )
    return GaussianAgent(
        method=config.method,
        relative_magnitude=config.relative_magnitude,
        **common,
    )
