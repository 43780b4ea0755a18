"""
Minimal dense feed-forward network engine.

Implements exactly what the two training phases need: a forward pass over a
stack of affine layers with elementwise activations, exact analytic gradients
for a mean-squared-error reconstruction loss and a softmax cross-entropy
classification loss, and Adam updates with bias correction.

All numerics are float64. Models are plain values (dataclasses holding numpy
arrays): they can be copied, pickled, and moved between worker processes
freely; nothing here mutates shared state.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "identity", "sigmoid")

# Probabilities are clamped into [PROB_CLAMP, 1 - PROB_CLAMP] before logs.
PROB_CLAMP = 1e-12


class ShapeError(ValueError):
    """Raised when array dimensions do not line up."""


class TrainingDiverged(RuntimeError):
    """Raised when a loss turns NaN/inf during optimization."""


@dataclass
class Layer:
    weights: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise ShapeError(
                f"layer shapes inconsistent: W{self.weights.shape}, b{self.bias.shape}"
            )


@dataclass
class MlpModel:
    """An ordered stack of dense layers; output of layer i feeds layer i+1."""

    layers: list[Layer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("model needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.weights.shape[1] != nxt.weights.shape[0]:
                raise ShapeError(
                    f"layer widths mismatch: {prev.weights.shape} -> {nxt.weights.shape}"
                )

    @property
    def topology(self) -> tuple[int, ...]:
        """Layer widths, input first: (d_in, w1, ..., w_out)."""
        widths = [self.layers[0].weights.shape[0]]
        widths += [layer.weights.shape[1] for layer in self.layers]
        return tuple(widths)

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[0]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[1]

    def copy(self) -> "MlpModel":
        return MlpModel(
            [Layer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers]
        )

    def parameters(self) -> list[np.ndarray]:
        """Flat list [W1, b1, W2, b2, ...]; views, not copies."""
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.bias)
        return out


def init_mlp(widths, activations, rng_seed=0) -> MlpModel:
    """Build a seeded MLP with Glorot-uniform weights and zero biases.

    Parameters
    ----------
    widths : sequence of int
        Layer widths including input: (d_in, w1, ..., w_out).
    activations : sequence of str or str
        One activation per layer, or a single name applied to all layers.
    rng_seed : int or numpy seed-like
        Weights are uniform in +-sqrt(6 / (fan_in + fan_out)), seeded.
    """
    widths = list(widths)
    if len(widths) < 2:
        raise ValueError("need at least an input and an output width")
    n_layers = len(widths) - 1
    if isinstance(activations, str):
        activations = [activations] * n_layers
    activations = list(activations)
    if len(activations) != n_layers:
        raise ValueError(f"expected {n_layers} activations, got {len(activations)}")
    rng = np.random.default_rng(rng_seed)
    layers = []
    for fan_in, fan_out, act in zip(widths, widths[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        layers.append(Layer(w, np.zeros(fan_out), act))
    return MlpModel(layers)


def _apply_activation(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        # Stable on both tails.
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def _activation_grad(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0.0).astype(z.dtype)
    if kind == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


@dataclass
class ForwardCache:
    """Per-layer records sufficient for exact backprop."""

    inputs: list[np.ndarray] = field(default_factory=list)  # a_{l-1} per layer
    pre_activations: list[np.ndarray] = field(default_factory=list)  # z_l
    activations: list[np.ndarray] = field(default_factory=list)  # a_l


def forward(model: MlpModel, batch: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Run the batch through the model; return (output, cache).

    ``batch`` is (n, d_in); output is (n, d_out). The cache holds every
    intermediate needed by :func:`backward`.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise ShapeError(
            f"batch shape {batch.shape} incompatible with input width {model.input_dim}"
        )
    cache = ForwardCache()
    a = batch
    for layer in model.layers:
        z = a @ layer.weights + layer.bias
        cache.inputs.append(a)
        cache.pre_activations.append(z)
        a = _apply_activation(z, layer.activation)
        cache.activations.append(a)
    return a, cache


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def mse_loss(reconstruction: np.ndarray, target: np.ndarray) -> float:
    """Mean over the batch of the squared L2 norm of the residual rows."""
    reconstruction = np.asarray(reconstruction, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if reconstruction.shape != target.shape:
        raise ShapeError(
            f"shape mismatch: {reconstruction.shape} vs {target.shape}"
        )
    diff = reconstruction - target
    return float(np.mean(np.sum(diff * diff, axis=1)))


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy of class-1 probabilities against 0/1 labels."""
    probs = np.asarray(probs, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if probs.size == 0:
        raise ValueError("empty input")
    if probs.shape != labels.shape:
        raise ShapeError(f"length mismatch: {probs.shape} vs {labels.shape}")
    p = np.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def cross_entropy_from_logits(logits: np.ndarray, labels: np.ndarray) -> float:
    """Softmax cross-entropy of 2-logit rows; equals bce_loss on p_1."""
    return bce_loss(softmax(logits)[:, 1], labels)


def backward(model: MlpModel, cache: ForwardCache, loss_kind: str, targets) -> list:
    """Exact analytic gradients of the chosen loss w.r.t. every parameter.

    Parameters
    ----------
    loss_kind : {"mse", "cross_entropy"}
        "mse" differentiates mean ||output - targets||^2 over the batch;
        "cross_entropy" differentiates softmax cross-entropy of the (n, 2)
        output against integer labels.
    targets : ndarray
        Target matrix for "mse", 0/1 label vector for "cross_entropy".

    Returns
    -------
    list of (dW, db) tuples, one per layer, shapes matching the model.
    """
    if len(cache.activations) != len(model.layers):
        raise ShapeError("cache does not match model (stale or truncated)")
    output = cache.activations[-1]
    n = output.shape[0]
    if loss_kind == "mse":
        targets = np.asarray(targets, dtype=np.float64)
        if targets.shape != output.shape:
            raise ShapeError(f"target shape {targets.shape} vs output {output.shape}")
        grad_out = 2.0 * (output - targets) / n
    elif loss_kind == "cross_entropy":
        labels = np.asarray(targets).ravel().astype(np.intp)
        if labels.shape[0] != n:
            raise ShapeError(f"{labels.shape[0]} labels for {n} rows")
        if output.shape[1] != 2:
            raise ShapeError("cross_entropy expects a 2-logit output layer")
        probs = softmax(output)
        grad_out = probs.copy()
        grad_out[np.arange(n), labels] -= 1.0
        grad_out /= n
    else:
        raise ValueError(f"unknown loss kind {loss_kind!r}")

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(model.layers)
    upstream = grad_out
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        z = cache.pre_activations[i]
        a = cache.activations[i]
        if cache.inputs[i].shape[1] != layer.weights.shape[0]:
            raise ShapeError("cache does not match model (stale or truncated)")
        dz = upstream * _activation_grad(z, a, layer.activation)
        grads[i] = (cache.inputs[i].T @ dz, dz.sum(axis=0))
        if i > 0:
            upstream = dz @ layer.weights.T
    return grads


@dataclass
class AdamState:
    """First/second-moment accumulators matching the model's layer shapes."""

    m: list  # (mW, mb) per layer
    v: list  # (vW, vb) per layer
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_model(cls, model: MlpModel, lr: float = 1e-3, **kw) -> "AdamState":
        m = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in model.layers]
        v = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in model.layers]
        return cls(m=m, v=v, step=0, lr=lr, **kw)


def adam_step(model: MlpModel, grads: list, state: AdamState):
    """In-place Adam update with bias correction; returns (model, state).

    A layer whose gradients have been zero at every step (so its moments are
    still zero) is left bitwise unchanged; this is what encoder freezing
    relies on.
    """
    if len(grads) != len(model.layers) or len(state.m) != len(model.layers):
        raise ShapeError("gradient/state lists do not match model layers")
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for layer, (dw, db), mom, sec in zip(model.layers, grads, state.m, state.v):
        if dw.shape != layer.weights.shape or db.shape != layer.bias.shape:
            raise ShapeError("gradient shapes do not match layer shapes")
        for param, grad, m_acc, v_acc in (
            (layer.weights, dw, mom[0], sec[0]),
            (layer.bias, db, mom[1], sec[1]),
        ):
            m_acc *= state.beta1
            m_acc += (1.0 - state.beta1) * grad
            v_acc *= state.beta2
            v_acc += (1.0 - state.beta2) * grad * grad
            param -= state.lr * (m_acc / bc1) / (np.sqrt(v_acc / bc2) + state.eps)
    return model, state


def clone_adam_state(state: AdamState) -> AdamState:
    return copy.deepcopy(state)
