"""Desired action spaces built from single corrections.

A correction is one observed (robot action, human action) pair.  From it we
build a region of the action box that keeps the human action, drops the
robot action, and is guaranteed to retain an optimal action under mild
assumptions on the teacher.  Two geometries are supported:

* a polytope: the intersection of half-spaces induced by contrastive action
  pairs generated around the correction direction, and
* a ball centered at the human action (absolute corrections only).

Hard membership uses exact Euclidean comparisons with ties counting as
inside; the smooth observation models replace the hard boundary with a
tempered sigmoid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .ebm import ACTION_HIGH, ACTION_LOW
from .errors import ConfigurationError

log = logging.getLogger(__name__)

ABSOLUTE = "absolute"
RELATIVE = "relative"
PARTIAL = "partial"

_KINDS = (ABSOLUTE, RELATIVE, PARTIAL)


@dataclass
class ObservedCorrection:
    """One stored correction: state, robot action, human action.

    ``mask`` marks the action dimensions the feedback applies to and is
    present exactly for partial corrections.
    """

    state: np.ndarray
    robot_action: np.ndarray
    human_action: np.ndarray
    kind: str = ABSOLUTE
    mask: np.ndarray | None = None

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=np.float64)
        self.robot_action = np.asarray(self.robot_action, dtype=np.float64)
        self.human_action = np.asarray(self.human_action, dtype=np.float64)
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown correction kind {self.kind!r}")
        if self.robot_action.shape != self.human_action.shape:
            raise ConfigurationError("robot and human actions must share a shape")
        if np.array_equal(self.robot_action, self.human_action):
            raise ConfigurationError("a correction needs distinct robot and human actions")
        for name, a in (("robot", self.robot_action), ("human", self.human_action)):
            if np.any(a < ACTION_LOW - 1e-12) or np.any(a > ACTION_HIGH + 1e-12):
                raise ConfigurationError(f"{name} action outside the action box")
        if (self.mask is not None) != (self.kind == PARTIAL):
            raise ConfigurationError("mask must be present exactly for partial corrections")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.robot_action.shape or not self.mask.any():
                raise ConfigurationError("partial mask must select at least one dimension")


@dataclass(frozen=True)
class PolytopeSpec:
    """Cone-like region parameters: opening angle, apex position, scale."""

    alpha_deg: float = 30.0  # direction uncertainty, (0, 180]
    eps: float = 0.3  # magnitude certainty, [0, 1): apex sits at eps*e along h
    e: float = 0.2  # correction magnitude for relative feedback
    n_dirs: int = 32  # number of sampled negative directions
    temperature: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.alpha_deg <= 180.0:
            raise ConfigurationError("alpha must be in (0, 180] degrees")
        if not 0.0 <= self.eps < 1.0:
            raise ConfigurationError("polytope eps must be in [0, 1)")
        if self.e <= 0:
            raise ConfigurationError("correction magnitude e must be positive")
        if self.n_dirs < 1:
            raise ConfigurationError("need at least one negative direction")
        if self.temperature <= 0:
            raise ConfigurationError("temperature must be positive")


@dataclass(frozen=True)
class CircularSpec:
    """Ball around the human action with radius (1 - eps) * ||a_r - a_h||.

    eps = 1.0 is allowed as the limiting radius-zero case (the target
    collapses to the human action itself).
    """

    eps: float = 0.5
    temperature: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ConfigurationError("circular eps must be in [0, 1]")
        if self.temperature <= 0:
            raise ConfigurationError("temperature must be positive")


@dataclass
class ContrastivePairSet:
    """Half-space generators: row i excludes negatives[i], keeps positives[i]."""

    negatives: np.ndarray  # (M, dim)
    positives: np.ndarray  # (M, dim)
    has_apex_pair: bool = False  # pair 0 anchors the apex when eps > 0

    def __post_init__(self):
        self.negatives = np.atleast_2d(np.asarray(self.negatives, dtype=np.float64))
        self.positives = np.atleast_2d(np.asarray(self.positives, dtype=np.float64))
        if self.negatives.shape != self.positives.shape:
            raise ConfigurationError("pair arrays must align")
        if np.any(np.all(self.negatives == self.positives, axis=1)):
            raise ConfigurationError("contrastive pairs need distinct actions")

    def __len__(self) -> int:
        return self.negatives.shape[0]

    def contains(self, actions) -> np.ndarray:
        """Hard membership of each action in every half-space (ties inside)."""
        a = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        d_neg = np.linalg.norm(a[:, None, :] - self.negatives[None, :, :], axis=2)
        d_pos = np.linalg.norm(a[:, None, :] - self.positives[None, :, :], axis=2)
        return np.all(d_neg >= d_pos, axis=1)


@dataclass
class BallRegion:
    """Concrete circular region for one correction."""

    center: np.ndarray  # the human action
    radius: float

    def contains(self, actions) -> np.ndarray:
        a = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        return np.linalg.norm(a - self.center[None, :], axis=1) <= self.radius


def ball_region(corr: ObservedCorrection, spec: CircularSpec) -> BallRegion:
    radius = (1.0 - spec.eps) * float(
        np.linalg.norm(corr.robot_action - corr.human_action)
    )
    return BallRegion(center=corr.human_action.copy(), radius=radius)


def sample_negative_directions(h_plus, alpha_deg: float, n: int, rng) -> np.ndarray:
    """Unit vectors at exactly ``alpha_deg`` degrees from ``h_plus``.

    Each sample is cos(a)*h+ + sin(a)*u with u uniform on the unit sphere of
    the hyperplane orthogonal to h+.  In one dimension only the antipode
    exists, so alpha is forced to 180.
    """
    h = np.asarray(h_plus, dtype=np.float64)
    if abs(np.linalg.norm(h) - 1.0) > 1e-9:
        raise ConfigurationError("h_plus must be a unit vector")
    if not 0.0 < alpha_deg <= 180.0:
        raise ConfigurationError("alpha must be in (0, 180] degrees")
    dim = h.size
    if dim == 1:
        return np.tile(-h, (n, 1))
    alpha = np.radians(alpha_deg)
    out = np.empty((n, dim))
    for i in range(n):
        while True:
            u = rng.standard_normal(dim)
            u -= (u @ h) * h
            norm = np.linalg.norm(u)
            if norm > 1e-12:
                break
        out[i] = np.cos(alpha) * h + np.sin(alpha) * (u / norm)
    return out


def correction_geometry(corr: ObservedCorrection, e: float):
    """Direction and magnitude underlying a correction.

    Relative corrections carry the configured magnitude ``e``; absolute
    corrections reuse the same machinery with the full observed displacement.
    Partial corrections work in the masked subspace.
    """
    mask = corr.mask if corr.kind == PARTIAL else np.ones(corr.robot_action.size, dtype=bool)
    diff = (corr.human_action - corr.robot_action)[mask]
    length = float(np.linalg.norm(diff))
    if length <= 0:
        raise ConfigurationError("correction has no direction in its feedback subspace")
    h = diff / length
    magnitude = e if corr.kind == RELATIVE else length
    return h, magnitude, mask


def make_pairs_polytope(corr: ObservedCorrection, spec: PolytopeSpec, rng) -> ContrastivePairSet:
    """Contrastive pairs realizing the polytope region for one correction.

    Pair 0 (apex) is (a_r, a_r + eps*e*h) when eps > 0; the remaining pairs
    keep the human action and exclude points offset along directions at
    angle alpha from the correction direction.  For partial corrections the
    pairs live in the masked subspace, with unmasked dimensions copied from
    the robot action so they stay unconstrained.
    """
    h, e, mask = correction_geometry(corr, spec.e)
    a_r_sub = corr.robot_action[mask]
    a_h_sub = a_r_sub + e * h
    neg_dirs = sample_negative_directions(h, spec.alpha_deg, spec.n_dirs, rng)
    apex = a_r_sub + spec.eps * e * h

    negatives = [apex + (1.0 - spec.eps) * e * d for d in neg_dirs]
    positives = [a_h_sub] * spec.n_dirs
    has_apex = spec.eps > 0.0
    if has_apex:
        negatives.insert(0, a_r_sub)
        positives.insert(0, apex)

    dim = corr.robot_action.size
    neg_full = np.tile(corr.robot_action, (len(negatives), 1))
    pos_full = np.tile(corr.robot_action, (len(positives), 1))
    neg_full[:, mask] = np.asarray(negatives)
    pos_full[:, mask] = np.asarray(positives)
    return ContrastivePairSet(neg_full, pos_full, has_apex_pair=has_apex)


def halfspace_membership(action, a_neg, a_pos) -> bool:
    """True when the action is at least as close to a_pos as to a_neg."""
    a = np.asarray(action, dtype=np.float64)
    a_neg = np.asarray(a_neg, dtype=np.float64)
    a_pos = np.asarray(a_pos, dtype=np.float64)
    if np.array_equal(a_neg, a_pos):
        raise ConfigurationError("half-space needs distinct anchor actions")
    return bool(np.linalg.norm(a - a_neg) >= np.linalg.norm(a - a_pos))


def _sigmoid(x, temperature):
    z = np.clip(-np.asarray(x, dtype=np.float64) / temperature, -745.0, 709.0)
    return 1.0 / (1.0 + np.exp(z))


def obs_prob_halfspace(action, a_neg, a_pos, temperature) -> np.ndarray:
    """Smooth half-space membership: sigma_T(D(a, a-) - D(a, a+))."""
    if temperature <= 0:
        raise ConfigurationError("temperature must be positive")
    a = np.atleast_2d(np.asarray(action, dtype=np.float64))
    margin = np.linalg.norm(a - np.asarray(a_neg), axis=1) - np.linalg.norm(
        a - np.asarray(a_pos), axis=1
    )
    out = _sigmoid(margin, temperature)
    return out if np.asarray(action).ndim > 1 else float(out[0])


def obs_prob_polytope(actions, pairs: ContrastivePairSet, temperature) -> np.ndarray:
    """Product of half-space observation probabilities over all pairs."""
    if temperature <= 0:
        raise ConfigurationError("temperature must be positive")
    if len(pairs) == 0:
        raise ConfigurationError("empty pair set")
    a = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    d_neg = np.linalg.norm(a[:, None, :] - pairs.negatives[None, :, :], axis=2)
    d_pos = np.linalg.norm(a[:, None, :] - pairs.positives[None, :, :], axis=2)
    probs = _sigmoid(d_neg - d_pos, temperature).prod(axis=1)
    return probs if np.asarray(actions).ndim > 1 else float(probs[0])


def obs_prob_circular(actions, a_robot, a_human, eps, temperature) -> np.ndarray:
    """Smooth ball membership: sigma_T(radius - D(a, a_h))."""
    if temperature <= 0:
        raise ConfigurationError("temperature must be positive")
    a = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    a_h = np.asarray(a_human, dtype=np.float64)
    radius = (1.0 - eps) * np.linalg.norm(np.asarray(a_robot) - a_h)
    out = _sigmoid(radius - np.linalg.norm(a - a_h[None, :], axis=1), temperature)
    return out if np.asarray(actions).ndim > 1 else float(out[0])


def intersect_volume_mc(regions, box_low, box_high, n_mc: int, rng, point=None):
    """Monte Carlo volume fraction of the intersection of hard regions.

    ``regions`` is a list of objects exposing ``contains(actions)`` (pair
    sets or ball regions).  Returns ``(fraction, contains_point)`` where the
    second element is the exact membership of ``point`` (None when no point
    is given).  Using one sample stream for a growing region list makes the
    fraction sequence monotone by construction.
    """
    if n_mc < 1000:
        raise ConfigurationError("n_mc must be at least 1000 for a usable estimate")
    dim = len(box_low)
    samples = rng.uniform(box_low, box_high, size=(n_mc, dim))
    inside = np.ones(n_mc, dtype=bool)
    for region in regions:
        inside &= region.contains(samples)
    contains_point = None
    if point is not None:
        contains_point = all(bool(r.contains(np.asarray(point)[None, :])[0]) for r in regions)
    return float(inside.mean()), contains_point
