"""Training losses for implicit and explicit policies.

Implicit (energy-model) losses operate on a sampled action support per
state and differentiate only through the energy network; target weights
are treated as constants by default (a config flag flips that for
ablations).  Explicit losses are squared-error objectives on the Gaussian
mean network.  Every loss returns a :class:`LossReport` whose gradients
are exact reverse-mode gradients of the reported value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ebm import ActionSampleSet, softmax_neg_energy
from .errors import ConfigurationError
from .nn import MlpParams, mlp_backward, mlp_forward

log = logging.getLogger(__name__)


@dataclass
class LossReport:
    """Scalar loss with matching parameter gradients and diagnostics."""

    value: float
    grads: MlpParams
    extras: dict = field(default_factory=dict)


def target_uniform(obs_probs) -> np.ndarray:
    """Normalize observation probabilities into a target distribution."""
    o = np.asarray(obs_probs, dtype=np.float64)
    if np.any(o < 0):
        raise ValueError("observation probabilities must be nonnegative")
    total = o.sum()
    if total <= 0:
        raise ValueError("cannot normalize an all-zero observation vector")
    return o / total


def target_policy_weighted(obs_probs, energies) -> np.ndarray:
    """Target proportional to obs_prob * exp(-E), stably normalized.

    Falls back to the uniform-prior target when every product underflows
    to zero (e.g. extreme energies), which is logged.
    """
    o = np.asarray(obs_probs, dtype=np.float64)
    e = np.asarray(energies, dtype=np.float64)
    if o.shape != e.shape:
        raise ConfigurationError("observation and energy lists must align")
    if np.any(o < 0):
        raise ValueError("observation probabilities must be nonnegative")
    w = np.exp(-(e - e.min()))
    products = o * w
    total = products.sum()
    if total <= 0:
        log.warning("policy-weighted target degenerated to zero; using uniform prior")
        return target_uniform(o)
    return products / total


def _stable_log_policy(energies: np.ndarray) -> np.ndarray:
    """log softmax(-E) along the last axis."""
    z = -np.asarray(energies, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def _forward_set(model, states, actions):
    """Forward the energy net on (R, N) state-action rows with a cache."""
    r, n, a_dim = actions.shape
    tiled = np.repeat(states, n, axis=0)
    x = np.concatenate([tiled, actions.reshape(r * n, a_dim)], axis=1)
    out, cache = mlp_forward(model.spec, model.params, x)
    return out.reshape(r, n), cache


def kl_report_batch(
    model,
    states: np.ndarray,
    actions: np.ndarray,
    targets: np.ndarray,
    obs_probs: np.ndarray | None = None,
    differentiate_target: bool = False,
) -> LossReport:
    """Mean KL(target || policy) over a batch of records.

    ``states`` is (R, S), ``actions`` (R, N, A), ``targets`` (R, N).  With
    ``differentiate_target`` the targets are recomputed as policy-weighted
    posteriors of ``obs_probs`` inside the gradient, instead of being held
    constant.
    """
    states = np.atleast_2d(states)
    r = states.shape[0]
    energies, cache = _forward_set(model, states, actions)
    log_p = _stable_log_policy(energies)
    p = np.exp(log_p)
    if differentiate_target:
        if obs_probs is None:
            raise ConfigurationError("differentiating the target requires obs_probs")
        t = np.vstack(
            [target_policy_weighted(obs_probs[i], energies[i]) for i in range(r)]
        )
    else:
        t = np.asarray(targets, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(t > 0, t * (np.log(t) - log_p), 0.0)
    value = float(terms.sum(axis=1).mean())
    if differentiate_target:
        log_o = np.where(obs_probs > 0, np.log(np.maximum(obs_probs, 1e-300)), 0.0)
        mean_log_o = (t * log_o).sum(axis=1, keepdims=True)
        d_e = t * (mean_log_o - log_o) + t - p
    else:
        d_e = t - p
    grads, _ = mlp_backward(cache, (d_e / r).reshape(-1, 1))
    return LossReport(value, grads, extras={"kl": value})


def kl_loss(model, state, samples: ActionSampleSet, target, **kwargs) -> LossReport:
    """KL divergence from a fixed target to the model policy on one state."""
    obs = kwargs.pop("obs_probs", None)
    if obs is not None:
        obs = np.asarray(obs, dtype=np.float64)[None, :]
    if target is None:
        if not kwargs.get("differentiate_target"):
            raise ConfigurationError("a fixed target is required unless it is recomputed")
        t = np.zeros((1, samples.actions.shape[0]))
    else:
        t = np.asarray(target, dtype=np.float64)
        if t.shape[0] != samples.actions.shape[0]:
            raise ConfigurationError("target must align with the action sample set")
        t = t[None, :]
    return kl_report_batch(
        model,
        np.asarray(state)[None, :],
        samples.actions[None, :, :],
        t,
        obs_probs=obs,
        **kwargs,
    )


def infonce_report_batch(model, states: np.ndarray, actions: np.ndarray) -> LossReport:
    """Contrastive classification loss; row 0 of each record is the positive."""
    states = np.atleast_2d(states)
    r = states.shape[0]
    energies, cache = _forward_set(model, states, actions)
    z = -energies
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    value = float((energies[:, 0] + lse).mean())
    p = softmax_neg_energy(energies)
    d_e = -p
    d_e[:, 0] += 1.0
    grads, _ = mlp_backward(cache, (d_e / r).reshape(-1, 1))
    return LossReport(value, grads, extras={"infonce": value})


def infonce_loss(model, state, a_human, negatives) -> LossReport:
    """-log of the positive's share of exp(-E) mass against negatives."""
    negatives = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    if negatives.shape[0] == 0:
        raise ConfigurationError("InfoNCE needs at least one negative sample")
    actions = np.vstack([np.asarray(a_human)[None, :], negatives])
    return infonce_report_batch(model, np.asarray(state)[None, :], actions[None, :, :])


def pvp_loss(model, states, a_robot, a_human) -> LossReport:
    """Squared-error proxy targets: human actions to -1, robot actions to +1."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    a_r = np.atleast_2d(np.asarray(a_robot, dtype=np.float64))
    a_h = np.atleast_2d(np.asarray(a_human, dtype=np.float64))
    r = states.shape[0]
    actions = np.stack([a_h, a_r], axis=1)  # (R, 2, A)
    energies, cache = _forward_set(model, states, actions)
    dev_h = energies[:, 0] + 1.0
    dev_r = energies[:, 1] - 1.0
    value = float((dev_h**2 + dev_r**2).mean())
    d_e = np.stack([2.0 * dev_h, 2.0 * dev_r], axis=1) / r
    grads, _ = mlp_backward(cache, d_e.reshape(-1, 1))
    return LossReport(value, grads)


def hinge_report_batch(policy, states: np.ndarray, pair_sets: list) -> LossReport:
    """Mean hinge loss pushing each record's mean into its pair polytope."""
    states = np.atleast_2d(states)
    r = states.shape[0]
    out, cache = mlp_forward(policy.spec, policy.params, states)
    d_mu = np.zeros_like(out)
    total = 0.0
    for i, pairs in enumerate(pair_sets):
        mu = out[i]
        viol = np.sum((pairs.positives - mu) ** 2, axis=1) - np.sum(
            (pairs.negatives - mu) ** 2, axis=1
        )
        active = viol > 0
        total += float(viol[active].sum())
        if active.any():
            d_mu[i] = 2.0 * (pairs.negatives[active] - pairs.positives[active]).sum(axis=0)
    value = total / r
    grads, _ = mlp_backward(cache, d_mu / r)
    return LossReport(value, grads)


def hinge_loss_explicit(policy, state, pairs) -> LossReport:
    """Zero exactly when the policy mean lies in every pair's half-space."""
    return hinge_report_batch(policy, np.asarray(state)[None, :], [pairs])


def bc_report_batch(policy, states: np.ndarray, targets: np.ndarray) -> LossReport:
    states = np.atleast_2d(states)
    targets = np.atleast_2d(targets)
    r = states.shape[0]
    out, cache = mlp_forward(policy.spec, policy.params, states)
    diff = out - targets
    value = float(np.sum(diff**2, axis=1).mean())
    grads, _ = mlp_backward(cache, 2.0 * diff / r)
    return LossReport(value, grads)


def bc_loss(policy, state, a_target) -> LossReport:
    """Squared distance of the policy mean to a target action."""
    return bc_report_batch(policy, np.asarray(state)[None, :], np.asarray(a_target)[None, :])


def bdcoach_losses(human_model, policy, states, a_robot, h, e: float = 0.2) -> tuple:
    """Human-model regression plus policy regression toward its prediction.

    The human model estimates the correction direction from (state, robot
    action); the policy chases ``a_robot + e * prediction`` with the
    prediction held constant.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    a_r = np.atleast_2d(np.asarray(a_robot, dtype=np.float64))
    h = np.atleast_2d(np.asarray(h, dtype=np.float64))
    r = states.shape[0]
    x = np.concatenate([states, a_r], axis=1)
    h_hat, h_cache = mlp_forward(human_model.spec, human_model.params, x)
    h_diff = h_hat - h
    human_value = float(np.sum(h_diff**2, axis=1).mean())
    human_grads, _ = mlp_backward(h_cache, 2.0 * h_diff / r)
    human_report = LossReport(human_value, human_grads)
    policy_report = bc_report_batch(policy, states, a_r + e * h_hat)
    return human_report, policy_report


def gradient_penalty_batch(
    model,
    states: np.ndarray,
    actions: np.ndarray,
    delta: float = 1e-3,
    margin: float = 1.0,
    weight: float = 1.0,
) -> LossReport:
    """Hinged penalty on finite-difference action-gradient norms.

    Each row's gradient is estimated by central differences of the energy
    along every action axis; since each probe energy is a differentiable
    scalar of the parameters, the penalty is exactly differentiable even
    though the action derivative itself is approximated.
    """
    if delta <= 0:
        raise ConfigurationError("finite-difference delta must be positive")
    if margin < 0:
        raise ConfigurationError("gradient margin must be nonnegative")
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    n, a_dim = actions.shape
    if weight == 0.0:
        return LossReport(0.0, model.params.zeros_like(), extras={"penalty": 0.0})
    # probe layout: (n, a_dim, 2) -> rows of a +/- delta along each axis
    probes = np.repeat(actions[:, None, None, :], a_dim, axis=1).repeat(2, axis=2)
    axes = np.arange(a_dim)
    probes[:, axes, 0, axes] += delta
    probes[:, axes, 1, axes] -= delta
    flat = probes.reshape(n * a_dim * 2, a_dim)
    tiled_states = np.repeat(states, a_dim * 2, axis=0)
    x = np.concatenate([tiled_states, flat], axis=1)
    out, cache = mlp_forward(model.spec, model.params, x)
    e = out.reshape(n, a_dim, 2)
    g_hat = (e[:, :, 0] - e[:, :, 1]) / (2.0 * delta)
    norms = np.linalg.norm(g_hat, axis=1)
    viol = np.maximum(norms - margin, 0.0)
    value = weight * float((viol**2).mean())
    d_norm = 2.0 * weight * viol / n
    safe = np.where(norms > 0, norms, 1.0)
    d_g = (d_norm / safe)[:, None] * g_hat
    d_e = np.zeros((n, a_dim, 2))
    d_e[:, :, 0] = d_g / (2.0 * delta)
    d_e[:, :, 1] = -d_g / (2.0 * delta)
    grads, _ = mlp_backward(cache, d_e.reshape(-1, 1))
    return LossReport(value, grads, extras={"penalty": value})


def gradient_penalty(model, state, actions, delta=1e-3, margin=1.0, weight=1.0) -> LossReport:
    """Penalty for one state's action samples; see gradient_penalty_batch."""
    actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    states = np.repeat(np.asarray(state, dtype=np.float64)[None, :], actions.shape[0], axis=0)
    return gradient_penalty_batch(model, states, actions, delta, margin, weight)
