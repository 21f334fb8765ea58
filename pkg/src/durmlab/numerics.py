"""Softmax, cross-entropy and analytic logit gradients.

Every function accepts either a single vector or a 2-D batch whose last
axis indexes classes. All arithmetic is float64.
"""

from __future__ import annotations

import numpy as np

PROB_FLOOR = 1e-12


def _as_float_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _check_same_shape(p: np.ndarray, y: np.ndarray) -> None:
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: probabilities {p.shape} vs labels {y.shape}")


def softmax(z) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = _as_float_array(z, "logits")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(z) -> np.ndarray:
    z = _as_float_array(z, "logits")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def cross_entropy(p, y):
    """Cross-entropy ``-sum(y * log p)`` with p floored at ``PROB_FLOOR``.

    For a one-hot ``y`` this is ``-log p[k]``. Soft targets (mixup) are
    accepted. Returns a scalar for 1-D input and one loss per row for 2-D.
    """
    p = _as_float_array(p, "probabilities")
    y = _as_float_array(y, "labels")
    _check_same_shape(p, y)
    logp = np.log(np.maximum(p, PROB_FLOOR))
    loss = -np.sum(y * logp, axis=-1)
    if loss.ndim == 0:
        return float(loss)
    return loss


def grad_logits(p, y) -> np.ndarray:
    """Gradient of the cross-entropy loss with respect to the logits, ``p - y``.

    The gradient ``g`` in the DuRM analysis is the negation of this.
    """
    p = _as_float_array(p, "probabilities")
    y = _as_float_array(y, "labels")
    _check_same_shape(p, y)
    return p - y


def affine(W, x, b) -> np.ndarray:
    """Return ``W @ x + b``; ``x`` may be a vector or a batch of row vectors."""
    W = _as_float_array(W, "weights")
    x = _as_float_array(x, "inputs")
    b = _as_float_array(b, "bias")
    if W.ndim != 2 or b.ndim != 1:
        raise ValueError("weights must be 2-D and bias 1-D")
    rows, cols = W.shape
    if b.shape[0] != rows:
        raise ValueError(f"shape mismatch: weights {W.shape} vs bias {b.shape}")
    if x.shape[-1] != cols:
        raise ValueError(f"shape mismatch: weights {W.shape} vs inputs {x.shape}")
    if x.ndim == 1:
        return W @ x + b
    return x @ W.T + b


def one_hot(labels, width: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= width):
        raise ValueError(f"label out of range for width {width}")
    out = np.zeros(labels.shape + (width,), dtype=np.float64)
    if labels.ndim == 0:
        out[labels] = 1.0
    else:
        out[np.arange(labels.shape[0]), labels] = 1.0
    return out
