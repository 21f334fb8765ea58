"""A small ReLU MLP classifier with analytic backpropagation.

Weights are stored as ``(out, in)`` matrices so a layer computes
``W @ x + b``; batches are row-major ``(batch, features)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import affine

CHECKPOINT_FORMAT = "durmlab-mlp"
CHECKPOINT_VERSION = 1


@dataclass
class MlpParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.ndim != 1 or W.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i}: weight {W.shape} and bias {b.shape} do not conform")
            if i > 0 and W.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(
                    f"layer {i}: input width {W.shape[1]} != previous output width "
                    f"{self.weights[i - 1].shape[0]}"
                )
        if self.activation != "relu":
            raise ValueError(f"unsupported activation {self.activation!r}")

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_width(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_width] + [W.shape[0] for W in self.weights]

    @property
    def num_parameters(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))

    def arrays(self) -> list[np.ndarray]:
        """Parameter arrays in canonical order: W0, b0, W1, b1, ..."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend((W, b))
        return out

    def copy(self) -> MlpParams:
        return MlpParams([W.copy() for W in self.weights], [b.copy() for b in self.biases], self.activation)

    def map(self, fn) -> MlpParams:
        return MlpParams([fn(W) for W in self.weights], [fn(b) for b in self.biases], self.activation)

    def zip_map(self, other: MlpParams, fn) -> MlpParams:
        if self.layer_sizes != other.layer_sizes:
            raise ValueError(f"shape mismatch: {self.layer_sizes} vs {other.layer_sizes}")
        return MlpParams(
            [fn(a, b) for a, b in zip(self.weights, other.weights)],
            [fn(a, b) for a, b in zip(self.biases, other.biases)],
            self.activation,
        )

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def unflatten(self, flat: np.ndarray) -> MlpParams:
        """New params with this object's shapes, filled from ``flat``."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.num_parameters,):
            raise ValueError(f"expected {self.num_parameters} values, got {flat.shape}")
        weights, biases, pos = [], [], 0
        for W, b in zip(self.weights, self.biases):
            weights.append(flat[pos:pos + W.size].reshape(W.shape).copy())
            pos += W.size
            biases.append(flat[pos:pos + b.size].copy())
            pos += b.size
        return MlpParams(weights, biases, self.activation)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


def zeros_like(params: MlpParams) -> MlpParams:
    return params.map(np.zeros_like)


def init_params(layer_sizes: list[int], rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights, zero biases.

    Dummy-class rows of the output layer get exactly the same treatment as
    real-class rows.
    """
    if len(layer_sizes) < 2 or any(int(n) < 1 for n in layer_sizes):
        raise ValueError(f"invalid layer sizes {layer_sizes}")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-a, a, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


@dataclass
class ForwardTrace:
    """Intermediates of one forward pass.

    ``activations[0]`` is the input; ``pre_activations[i]`` is the affine
    output of layer ``i``.
    """

    params: MlpParams = field(repr=False)
    activations: list[np.ndarray]
    pre_activations: list[np.ndarray]
    single: bool


def forward(params: MlpParams, x) -> tuple[np.ndarray, ForwardTrace]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != params.input_width:
        raise ValueError(f"input width {X.shape[-1]} does not match network input {params.input_width}")
    acts, pres = [X], []
    h = X
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = affine(W, h, b)
        pres.append(z)
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    logits = h[0] if single else h
    return logits, ForwardTrace(params, acts, pres, single)


def backward(params: MlpParams, trace: ForwardTrace, dlogits, *, input_grad: bool = False):
    """Backpropagate ``dlogits`` (d loss / d logits) through the network.

    Gradients are summed over batch rows; scale ``dlogits`` by ``1/B`` for a
    batch-mean loss. Returns an ``MlpParams`` of gradients, plus the input
    gradient when ``input_grad`` is set.
    """
    if trace.params is not params:
        raise ValueError("stale trace: produced by a different parameter object")
    d = np.asarray(dlogits, dtype=np.float64)
    if trace.single:
        d = d[None, :]
    if d.shape != trace.pre_activations[-1].shape:
        raise ValueError(f"dlogits shape {d.shape} does not match logits {trace.pre_activations[-1].shape}")
    n = len(params.weights)
    gW: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            # relu subgradient at 0 is 0
            d = d * (trace.pre_activations[i] > 0.0)
        gW[i] = d.T @ trace.activations[i]
        gb[i] = d.sum(axis=0)
        if i > 0 or input_grad:
            d = d @ params.weights[i]
    grads = MlpParams(gW, gb, params.activation)
    if input_grad:
        dx = d[0] if trace.single else d
        return grads, dx
    return grads


def predict(params: MlpParams, x) -> np.ndarray | int:
    """Argmax over all C + C_d logits; ``np.argmax`` breaks ties to the lowest index."""
    logits, _ = forward(params, x)
    idx = np.argmax(logits, axis=-1)
    return int(idx) if np.ndim(idx) == 0 else idx


def params_to_dict(params: MlpParams, **meta) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "activation": params.activation,
        **meta,
        "layers": [
            {"rows": W.shape[0], "cols": W.shape[1], "weight": W.ravel().tolist(), "bias": b.tolist()}
            for W, b in zip(params.weights, params.biases)
        ],
    }


def params_from_dict(doc: dict) -> MlpParams:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    weights, biases = [], []
    for i, layer in enumerate(doc["layers"]):
        rows, cols = int(layer["rows"]), int(layer["cols"])
        W = np.asarray(layer["weight"], dtype=np.float64)
        b = np.asarray(layer["bias"], dtype=np.float64)
        if W.size != rows * cols or b.size != rows:
            raise ValueError(f"layer {i}: value count does not match declared shape {rows}x{cols}")
        weights.append(W.reshape(rows, cols))
        biases.append(b)
    params = MlpParams(weights, biases, doc.get("activation", "relu"))
    if not params.all_finite():
        raise ValueError("checkpoint contains non-finite values")
    return params


def save_checkpoint(path, params: MlpParams, **meta) -> None:
    Path(path).write_text(json.dumps(params_to_dict(params, **meta)) + "\n")


def load_checkpoint(path) -> tuple[MlpParams, dict]:
    """Load a checkpoint; returns the params and the metadata fields."""
    doc = json.loads(Path(path).read_text())
    params = params_from_dict(doc)
    meta = {k: v for k, v in doc.items() if k not in ("format", "version", "activation", "layers")}
    return params, meta
