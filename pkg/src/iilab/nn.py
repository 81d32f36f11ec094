"""Minimal dense network core: fixed-architecture MLPs and Adam.

Forward passes cache enough to run reverse mode with respect to both the
parameters and the network inputs; the input gradients are what drive the
gradient-based action samplers elsewhere in the package.  Everything is
float64 and purely functional: no function mutates its arguments, so
identical calls give bitwise-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericsError

IDENTITY = "identity"
SQUASH = "squash"  # 2*sigmoid(z) - 1: output in (-1, 1), used for action heads

_HEADS = (IDENTITY, SQUASH)


@dataclass(frozen=True)
class MlpSpec:
    """Architecture of a fully connected ReLU network.

    Parameters
    ----------
    layer_widths : tuple of int
        Widths including input and output, e.g. ``(6, 64, 64, 1)``.
    output_head : str
        ``"identity"`` for scalar heads (energies) or ``"squash"`` for
        action heads mapped into (-1, 1) via ``2*sigmoid(z) - 1``.
    """

    layer_widths: tuple
    output_head: str = IDENTITY

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2:
            raise ConfigurationError("an MLP needs at least input and output widths")
        if any(w < 1 for w in widths):
            raise ConfigurationError(f"layer widths must be >= 1, got {widths}")
        if self.output_head not in _HEADS:
            raise ConfigurationError(f"unknown output head {self.output_head!r}")

    @property
    def in_dim(self) -> int:
        return self.layer_widths[0]

    @property
    def out_dim(self) -> int:
        return self.layer_widths[-1]

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1


@dataclass
class MlpParams:
    """Per-layer weights (out x in) and biases (out,)."""

    weights: list
    biases: list

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self) -> "MlpParams":
        return MlpParams(
            [np.zeros_like(w) for w in self.weights],
            [np.zeros_like(b) for b in self.biases],
        )

    def all_finite(self) -> bool:
        return all(np.isfinite(w).all() for w in self.weights) and all(
            np.isfinite(b).all() for b in self.biases
        )

    def scaled_add(self, other: "MlpParams", scale: float) -> "MlpParams":
        return MlpParams(
            [w + scale * o for w, o in zip(self.weights, other.weights)],
            [b + scale * o for b, o in zip(self.biases, other.biases)],
        )


def init_params(spec: MlpSpec, rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights, zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(spec.layer_widths[:-1], spec.layer_widths[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _check_batch(spec: MlpSpec, batch: np.ndarray) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.in_dim:
        raise ConfigurationError(
            f"batch of shape {x.shape} does not match input width {spec.in_dim}"
        )
    if not np.isfinite(x).all():
        raise NumericsError("non-finite values in network input")
    return x


def _check_params(spec: MlpSpec, params: MlpParams) -> None:
    if len(params.weights) != spec.n_layers or len(params.biases) != spec.n_layers:
        raise ConfigurationError("parameter layer count does not match spec")
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        out_w, in_w = spec.layer_widths[i + 1], spec.layer_widths[i]
        if w.shape != (out_w, in_w) or b.shape != (out_w,):
            raise ConfigurationError(
                f"layer {i}: expected weight {(out_w, in_w)} and bias {(out_w,)}, "
                f"got {w.shape} and {b.shape}"
            )


@dataclass
class ForwardCache:
    """Activation record from one forward pass, consumed by mlp_backward."""

    spec: MlpSpec
    layer_inputs: list = field(default_factory=list)  # input to each linear layer
    weights: list = field(default_factory=list)  # references, not copies
    outputs: np.ndarray = None  # post-head outputs


def mlp_forward(spec: MlpSpec, params: MlpParams, batch) -> tuple:
    """Evaluate the network on a batch.

    Returns ``(outputs, cache)`` where outputs has shape (B, out_dim) and
    the cache can be fed to :func:`mlp_backward`.
    """
    x = _check_batch(spec, batch)
    _check_params(spec, params)
    cache = ForwardCache(spec=spec)
    h = x
    last = spec.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        cache.layer_inputs.append(h)
        cache.weights.append(w)
        z = h @ w.T + b
        if i < last:
            h = np.maximum(z, 0.0)
        elif spec.output_head == SQUASH:
            h = 2.0 / (1.0 + np.exp(-z)) - 1.0
        else:
            h = z
    cache.outputs = h
    return h, cache


def mlp_backward(cache: ForwardCache, output_grads) -> tuple:
    """Reverse-mode pass for one forward call.

    Returns ``(param_grads, input_grads)``; param_grads is MlpParams-shaped
    and input_grads matches the forward batch.
    """
    spec = cache.spec
    if cache.outputs is None or len(cache.layer_inputs) != spec.n_layers:
        raise NumericsError("stale or mismatched forward cache")
    g = np.asarray(output_grads, dtype=np.float64)
    if g.shape != cache.outputs.shape:
        raise ConfigurationError(
            f"output grads {g.shape} do not match forward outputs {cache.outputs.shape}"
        )
    if spec.output_head == SQUASH:
        g = g * (1.0 - cache.outputs**2) / 2.0
    w_grads = [None] * spec.n_layers
    b_grads = [None] * spec.n_layers
    for i in range(spec.n_layers - 1, -1, -1):
        h_in = cache.layer_inputs[i]
        w = cache.weights[i]
        w_grads[i] = g.T @ h_in
        b_grads[i] = g.sum(axis=0)
        g = g @ w
        if i > 0:
            # ReLU mask: the stored input of layer i is the activation of
            # layer i-1, zero exactly where the pre-activation was clamped.
            g = g * (h_in > 0.0)
    return MlpParams(w_grads, b_grads), g


def mlp_value_and_input_grad(spec: MlpSpec, params: MlpParams, batch, output_grads=None):
    """Forward pass plus input gradients only, skipping parameter gradients.

    This is the hot path of the Langevin sampler; with ``output_grads=None``
    the upstream gradient defaults to ones, which for a scalar head yields
    d(output)/d(input) per row.
    """
    x = _check_batch(spec, batch)
    activations = [x]
    h = x
    last = spec.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w.T + b
        if i < last:
            h = np.maximum(z, 0.0)
        elif spec.output_head == SQUASH:
            h = 2.0 / (1.0 + np.exp(-z)) - 1.0
        else:
            h = z
        activations.append(h)
    if output_grads is None:
        g = np.ones_like(h)
    else:
        g = np.asarray(output_grads, dtype=np.float64)
    if spec.output_head == SQUASH:
        g = g * (1.0 - h**2) / 2.0
    for i in range(spec.n_layers - 1, -1, -1):
        g = g @ params.weights[i]
        if i > 0:
            g = g * (activations[i] > 0.0)
    return h, g


@dataclass
class AdamState:
    """Adam moments; shapes mirror the parameters they track."""

    m: MlpParams
    v: MlpParams
    t: int = 0

    @staticmethod
    def zeros(params: MlpParams) -> "AdamState":
        return AdamState(m=params.zeros_like(), v=params.zeros_like(), t=0)


def adam_step(
    params: MlpParams,
    grads: MlpParams,
    state: AdamState,
    lr: float,
    beta1: float = 0.1,
    beta2: float = 0.999,
    eps: float = 1e-7,
) -> tuple:
    """One bias-corrected Adam update; returns new (params, state).

    The default moment coefficients are the package-wide training settings,
    not the common (0.9, 0.999) pair; callers can override per run.
    """
    if lr <= 0:
        raise ConfigurationError("learning rate must be positive")
    if not grads.all_finite():
        raise NumericsError("non-finite gradients: update rejected")
    t = state.t + 1
    new_w, new_b = [], []
    m_w, m_b, v_w, v_b = [], [], [], []
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for kind in ("weights", "biases"):
        ps = getattr(params, kind)
        gs = getattr(grads, kind)
        ms = getattr(state.m, kind)
        vs = getattr(state.v, kind)
        if len(ps) != len(gs):
            raise ConfigurationError("gradient layer count does not match parameters")
        outs = new_w if kind == "weights" else new_b
        m_out = m_w if kind == "weights" else m_b
        v_out = v_w if kind == "weights" else v_b
        for p, g, m, v in zip(ps, gs, ms, vs):
            if p.shape != g.shape:
                raise ConfigurationError(f"gradient shape {g.shape} != param shape {p.shape}")
            m_new = beta1 * m + (1.0 - beta1) * g
            v_new = beta2 * v + (1.0 - beta2) * g * g
            m_hat = m_new / c1
            v_hat = v_new / c2
            outs.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
            m_out.append(m_new)
            v_out.append(v_new)
    return (
        MlpParams(new_w, new_b),
        AdamState(m=MlpParams(m_w, m_b), v=MlpParams(v_w, v_b), t=t),
    )
