"""Input validation helpers shared by the estimator-style agents."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError


def check_states(states, state_dim: int) -> np.ndarray:
    """Coerce to a (B, state_dim) float64 array, validating shape and values."""
    x = np.asarray(states, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != state_dim:
        raise ConfigurationError(f"states of shape {x.shape} do not match state_dim {state_dim}")
    if not np.isfinite(x).all():
        raise ConfigurationError("states contain non-finite values")
    return x


def check_correction_batch(batch, state_dim: int, action_dim: int, allowed_kinds=None) -> list:
    """Validate a batch of ObservedCorrection records against the agent."""
    if not batch:
        raise ConfigurationError("empty correction batch")
    for corr in batch:
        if corr.state.shape != (state_dim,):
            raise ConfigurationError("correction state does not match the agent's state_dim")
        if corr.robot_action.shape != (action_dim,):
            raise ConfigurationError("correction action does not match the agent's action_dim")
        if allowed_kinds is not None and corr.kind not in allowed_kinds:
            raise ConfigurationError(
                f"correction kind {corr.kind!r} is incompatible with this method"
            )
    return list(batch)
