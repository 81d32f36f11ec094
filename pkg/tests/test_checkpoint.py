import json

import numpy as np
import pytest

from iilab.agents import EnergyAgent, GaussianAgent
from iilab.checkpoint import load_checkpoint, save_checkpoint
from iilab.config import ExperimentConfig
from iilab.ebm import LangevinConfig
from iilab.errors import CheckpointError
from iilab.spaces import ObservedCorrection

STATE = np.zeros(1)


def trained_energy_agent():
    agent = EnergyAgent(
        method="circular",
        state_dim=1,
        action_dim=2,
        hidden_widths=(8, 8),
        langevin=LangevinConfig(n_samples=8, n_steps=3),
        seed=7,
    )
    corr = ObservedCorrection(STATE, np.array([0.5, 0.5]), np.array([0.0, 0.0]))
    agent.update([corr])
    return agent


class TestCheckpointRoundTrip:
    def test_energy_agent_bit_exact(self, tmp_path):
        agent = trained_energy_agent()
        path = tmp_path / "model.ckpt.json"
        save_checkpoint(agent, path)
        back = load_checkpoint(path)
        assert back.method == "circular"
        for w1, w2 in zip(agent.model_.params.weights, back.model_.params.weights):
            assert np.array_equal(w1, w2)
        for b1, b2 in zip(agent.model_.params.biases, back.model_.params.biases):
            assert np.array_equal(b1, b2)

    def test_gaussian_agent_with_human_model(self, tmp_path):
        agent = GaussianAgent(method="bd_coach", state_dim=1, action_dim=2,
                              hidden_widths=(8,), seed=1)
        corr = ObservedCorrection(STATE, np.array([0.5, 0.0]), np.array([0.3, 0.0]),
                                  kind="relative")
        agent.update([corr])
        path = tmp_path / "policy.ckpt.json"
        save_checkpoint(agent, path)
        back = load_checkpoint(path)
        for w1, w2 in zip(agent.policy_.params.weights, back.policy_.params.weights):
            assert np.array_equal(w1, w2)
        for w1, w2 in zip(agent.human_model_.params.weights, back.human_model_.params.weights):
            assert np.array_equal(w1, w2)

    def test_config_digest_recorded(self, tmp_path):
        agent = trained_energy_agent()
        config = ExperimentConfig(method="circular", env="ToyConstant2D")
        path = tmp_path / "m.ckpt.json"
        save_checkpoint(agent, path, config=config)
        doc = json.loads(path.read_text())
        assert doc["config_digest"] == config.digest()


class TestCheckpointRefusals:
    def test_corrupted_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_wrong_format_version(self, tmp_path):
        agent = trained_energy_agent()
        path = tmp_path / "m.json"
        save_checkpoint(agent, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = 999
        path.write_text(json.dumps(doc))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_mismatched_architecture_refused(self, tmp_path):
        agent = trained_energy_agent()
        path = tmp_path / "m.json"
        save_checkpoint(agent, path)
        doc = json.loads(path.read_text())
        doc["nets"]["model"]["widths"][1] = 999  # tamper with the metadata
        path.write_text(json.dumps(doc))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)
