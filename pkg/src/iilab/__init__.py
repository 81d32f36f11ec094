"""Interactive imitation learning from corrective feedback.

Implicit (energy-model) and explicit (Gaussian) policies are shaped by
desired action spaces built from human or scripted corrections.  The
top-level exports cover the estimator-style agents, the environments and
simulated teachers, and the training loop.
"""

from .agents import EnergyAgent, GaussianAgent, make_agent
from .buffer import ReplayBuffer
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig
from .ebm import (
    ActionSampleSet,
    EnergyModel,
    GaussianPolicy,
    LangevinConfig,
    estimate_policy_probs,
    gaussian_act,
    infer_action,
    inference_config,
    langevin_sample,
)
from .envs import Environment, Teacher, TeacherConfig, make_toy_dataset
from .errors import CheckpointError, ConfigurationError, NumericsError, TrainingDiverged
from .spaces import (
    CircularSpec,
    ContrastivePairSet,
    ObservedCorrection,
    PolytopeSpec,
    halfspace_membership,
    intersect_volume_mc,
    make_pairs_polytope,
    obs_prob_circular,
    obs_prob_halfspace,
    obs_prob_polytope,
    sample_negative_directions,
)
from .training import (
    MetricsLog,
    convergence_timestep,
    dump_landscape,
    evaluate,
    run_iil,
    toy_metrics,
)

__version__ = "0.1.0"

__all__ = [
    "ActionSampleSet",
    "CheckpointError",
    "CircularSpec",
    "ConfigurationError",
    "ContrastivePairSet",
    "EnergyAgent",
    "EnergyModel",
    "Environment",
    "ExperimentConfig",
    "GaussianAgent",
    "GaussianPolicy",
    "LangevinConfig",
    "MetricsLog",
    "NumericsError",
    "ObservedCorrection",
    "PolytopeSpec",
    "ReplayBuffer",
    "Teacher",
    "TeacherConfig",
    "TrainingDiverged",
    "convergence_timestep",
    "dump_landscape",
    "estimate_policy_probs",
    "evaluate",
    "gaussian_act",
    "halfspace_membership",
    "infer_action",
    "inference_config",
    "intersect_volume_mc",
    "langevin_sample",
    "load_checkpoint",
    "make_agent",
    "make_pairs_polytope",
    "make_toy_dataset",
    "obs_prob_circular",
    "obs_prob_halfspace",
    "obs_prob_polytope",
    "run_iil",
    "sample_negative_directions",
    "save_checkpoint",
    "toy_metrics",
]
