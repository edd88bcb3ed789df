"""The action-value network and its optimizer.

A fully connected network maps the flattened 108-value state to one expected
reward per action: three ReLU hidden layers of 256 units and a linear output
of 15 units. Forward pass, squared-error loss on the taken actions,
backpropagated gradients and the Adam update are implemented directly on
numpy arrays so parameters, optimizer moments and checkpoints stay plain
data. Smaller layer layouts are supported throughout; the test suite relies
on them for finite-difference verification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CheckpointError, NonFiniteError

DEFAULT_LAYER_SIZES = (108, 256, 256, 256, 15)


@dataclass
class QNetworkParams:
    """Per-layer weight matrices (fan_in x fan_out) and bias vectors."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("weights and biases must be parallel, non-empty lists")
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float) for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {i}: weight {w.shape} and bias {b.shape} mismatch")
            if i and self.weights[i - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {i}: input size does not chain")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass
class Batch:
    """Training samples: states, the action taken in each, and its target."""

    states: np.ndarray        # (n, input_dim)
    actions: np.ndarray       # (n,) int indices
    targets: np.ndarray       # (n,) floats

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.actions = np.asarray(self.actions, dtype=int)
        self.targets = np.asarray(self.targets, dtype=float)
        n = self.states.shape[0]
        if self.actions.shape != (n,) or self.targets.shape != (n,):
            raise ValueError("states, actions and targets must agree in length")


def init_params(seed: int | np.random.SeedSequence,
                layer_sizes: tuple[int, ...] = DEFAULT_LAYER_SIZES) -> QNetworkParams:
    """Scaled-uniform initialization, deterministic per seed; biases zero."""
    if len(layer_sizes) < 2:
        raise ValueError("need at least an input and an output layer")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return QNetworkParams(weights, biases)


def clone_params(params: QNetworkParams) -> QNetworkParams:
    return QNetworkParams([w.copy() for w in params.weights],
                          [b.copy() for b in params.biases])


def _forward_cached(params: QNetworkParams, x: np.ndarray):
    """Forward over a batch, keeping pre-activations for backprop."""
    activations = [x]
    pre = []
    a = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w + b
        if not np.isfinite(z).all():
            raise NonFiniteError(f"non-finite values in layer {i} pre-activation")
        pre.append(z)
        a = z if i == last else np.maximum(z, 0.0)
        activations.append(a)
    return activations, pre


def forward(params: QNetworkParams, x) -> np.ndarray:
    """Action values for one state vector (linear output, no activation)."""
    arr = np.asarray(x, dtype=float)
    out, _ = _forward_cached(params, arr[None, :])
    return out[-1][0]


def forward_batch(params: QNetworkParams, states: np.ndarray) -> np.ndarray:
    out, _ = _forward_cached(params, np.atleast_2d(np.asarray(states, dtype=float)))
    return out[-1]


def q_loss(params: QNetworkParams, batch: Batch) -> float:
    """Mean over the batch of half the squared target error on taken actions."""
    q = forward_batch(params, batch.states)
    taken = q[np.arange(len(batch.actions)), batch.actions]
    return float(np.mean(0.5 * (batch.targets - taken) ** 2))


def gradients(params: QNetworkParams, batch: Batch) -> QNetworkParams:
    """Exact gradient of q_loss with respect to every weight and bias."""
    activations, pre = _forward_cached(params, batch.states)
    n = batch.states.shape[0]
    out = activations[-1]

    delta = np.zeros_like(out)
    idx = np.arange(n)
    delta[idx, batch.actions] = (out[idx, batch.actions] - batch.targets) / n

    grad_w = [np.empty(0)] * len(params.weights)
    grad_b = [np.empty(0)] * len(params.biases)
    for i in range(len(params.weights) - 1, -1, -1):
        grad_w[i] = activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ params.weights[i].T) * (pre[i - 1] > 0.0)
        if not (np.isfinite(grad_w[i]).all() and np.isfinite(grad_b[i]).all()):
            raise NonFiniteError(f"non-finite gradient in layer {i}")
    return QNetworkParams(grad_w, grad_b)


@dataclass
class AdamState:
    """First/second moment accumulators matching the parameter shapes."""

    m_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_weights: list[np.ndarray]
    v_biases: list[np.ndarray]
    t: int = 0
    lr: float = 0.0001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: QNetworkParams, lr: float = 0.0001,
                   beta1: float = 0.9, beta2: float = 0.999,
                   eps: float = 1e-8) -> "AdamState":
        return cls(
            m_weights=[np.zeros_like(w) for w in params.weights],
            m_biases=[np.zeros_like(b) for b in params.biases],
            v_weights=[np.zeros_like(w) for w in params.weights],
            v_biases=[np.zeros_like(b) for b in params.biases],
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
        )


def adam_step(params: QNetworkParams, state: AdamState,
              grads: QNetworkParams) -> tuple[QNetworkParams, AdamState]:
    """One Adam update with bias correction. Updates both arguments in place."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1 ** state.t
    corr2 = 1.0 - b2 ** state.t
    groups = (
        (params.weights, state.m_weights, state.v_weights, grads.weights),
        (params.biases, state.m_biases, state.v_biases, grads.biases),
    )
    for tensors, ms, vs, gs in groups:
        for p, m, v, g in zip(tensors, ms, vs, gs):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * np.square(g)
            p -= state.lr * (m / corr1) / (np.sqrt(v / corr2) + state.eps)
    return params, state


def save_checkpoint(params: QNetworkParams, adam_state: AdamState | None,
                    metadata: dict, path) -> None:
    doc = {
        "format": "qnet-checkpoint",
        "version": 1,
        "layer_sizes": list(params.layer_sizes),
        "weights": [w.reshape(-1).tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "adam": None,
        "metadata": metadata,
    }
    if adam_state is not None:
        doc["adam"] = {
            "t": adam_state.t,
            "lr": adam_state.lr,
            "beta1": adam_state.beta1,
            "beta2": adam_state.beta2,
            "eps": adam_state.eps,
            "m_weights": [m.reshape(-1).tolist() for m in adam_state.m_weights],
            "m_biases": [m.tolist() for m in adam_state.m_biases],
            "v_weights": [v.reshape(-1).tolist() for v in adam_state.v_weights],
            "v_biases": [v.tolist() for v in adam_state.v_biases],
        }
    Path(path).write_text(json.dumps(doc))


def _restore_layers(flat_weights, flat_biases, layer_sizes):
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        w = np.asarray(flat_weights[i], dtype=float)
        b = np.asarray(flat_biases[i], dtype=float)
        if w.size != fan_in * fan_out or b.size != fan_out:
            raise CheckpointError(
                f"layer {i}: stored arrays do not match declared sizes "
                f"{fan_in}x{fan_out}"
            )
        weights.append(w.reshape(fan_in, fan_out))
        biases.append(b)
    return weights, biases


def load_checkpoint(path) -> tuple[QNetworkParams, AdamState | None, dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot parse checkpoint {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != "qnet-checkpoint":
        raise CheckpointError(f"{path} is not a network checkpoint")
    try:
        layer_sizes = tuple(int(s) for s in doc["layer_sizes"])
        weights, biases = _restore_layers(doc["weights"], doc["biases"], layer_sizes)
        params = QNetworkParams(weights, biases)
        adam = None
        if doc.get("adam") is not None:
            a = doc["adam"]
            mw, mb = _restore_layers(a["m_weights"], a["m_biases"], layer_sizes)
            vw, vb = _restore_layers(a["v_weights"], a["v_biases"], layer_sizes)
            adam = AdamState(m_weights=mw, m_biases=mb, v_weights=vw, v_biases=vb,
                             t=int(a["t"]), lr=float(a["lr"]), beta1=float(a["beta1"]),
                             beta2=float(a["beta2"]), eps=float(a["eps"]))
        metadata = doc.get("metadata") or {}
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    return params, adam, metadata
