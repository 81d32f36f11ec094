"""JSON checkpoints for trained agents.

Weights are stored as row-major decimal floats; Python's float repr is
shortest-round-trip, so save/load is bit-exact.  Loading refuses files
with a different format version or inconsistent shapes rather than
returning a partially built model.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .agents import EnergyAgent, GaussianAgent
from .errors import CheckpointError
from .nn import MlpParams

FORMAT_VERSION = 1


def _net_payload(spec, params: MlpParams) -> dict:
    return {
        "widths": list(spec.layer_widths),
        "head": spec.output_head,
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
    }


def _restore_params(payload: dict, spec) -> MlpParams:
    if list(spec.layer_widths) != list(payload["widths"]) or spec.output_head != payload["head"]:
        raise CheckpointError("checkpoint architecture does not match its metadata")
    weights = [np.asarray(w, dtype=np.float64) for w in payload["weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in payload["biases"]]
    params = MlpParams(weights, biases)
    for i, (w, b) in enumerate(zip(weights, biases)):
        want_w = (spec.layer_widths[i + 1], spec.layer_widths[i])
        if w.shape != want_w or b.shape != (spec.layer_widths[i + 1],):
            raise CheckpointError(f"layer {i} shapes {w.shape}/{b.shape} do not match {want_w}")
    return params


def save_checkpoint(agent, path, config=None) -> None:
    agent._ensure_ready()
    doc = {
        "format_version": FORMAT_VERSION,
        "method": agent.method,
        "state_dim": agent.state_dim,
        "action_dim": agent.action_dim,
        "hidden_widths": list(agent.hidden_widths),
        "seed": agent.seed,
        "nets": {},
    }
    if isinstance(agent, EnergyAgent):
        doc["nets"]["model"] = _net_payload(agent.model_.spec, agent.model_.params)
    else:
        doc["nets"]["policy"] = _net_payload(agent.policy_.spec, agent.policy_.params)
        if hasattr(agent, "human_model_"):
            doc["nets"]["human"] = _net_payload(agent.human_model_.spec, agent.human_model_.params)
    if config is not None:
        doc["config_digest"] = config.digest()
        doc["config"] = config.to_dict()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc))


def load_checkpoint(path):
    """Rebuild the checkpointed agent; parameters round-trip bit-exactly."""
    try:
        doc = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, OSError) as exc:
        raise CheckpointError(f"unreadable checkpoint: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format {doc.get('format_version')!r}"
        )
    method = doc["method"]
    if "config" in doc:
        config = cfgmod.ExperimentConfig.from_dict(doc["config"])
        from .agents import make_agent

        agent = make_agent(config)
    else:
        cls = EnergyAgent if method in cfgmod.ENERGY_METHODS else GaussianAgent
        agent = cls(
            method=method,
            state_dim=doc["state_dim"],
            action_dim=doc["action_dim"],
            hidden_widths=tuple(doc["hidden_widths"]),
            seed=doc.get("seed", 0),
        )
    agent._ensure_ready()
    if agent.state_dim != doc["state_dim"] or agent.action_dim != doc["action_dim"]:
        raise CheckpointError("checkpoint dimensions do not match the rebuilt agent")
    nets = doc["nets"]
    if isinstance(agent, EnergyAgent):
        agent.model_.params = _restore_params(nets["model"], agent.model_.spec)
    else:
        agent.policy_.params = _restore_params(nets["policy"], agent.policy_.spec)
        if "human" in nets and hasattr(agent, "human_model_"):
            agent.human_model_.params = _restore_params(nets["human"], agent.human_model_.spec)
    return agent
