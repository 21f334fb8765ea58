"""FGSM and PGD input perturbations against a trained classifier."""

from __future__ import annotations

import numpy as np

from ..head import HeadConfig, pad_labels
from ..model import MlpParams, backward, forward
from ..numerics import softmax


def input_gradient(params: MlpParams, X, labels, head: HeadConfig) -> np.ndarray:
    """Gradient of each sample's cross-entropy loss with respect to its input."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    logits, trace = forward(params, X)
    dlogits = softmax(logits) - pad_labels(labels, head)
    _, dx = backward(params, trace, dlogits, input_grad=True)
    if not np.all(np.isfinite(dx)):
        raise FloatingPointError("non-finite input gradient")
    return dx


def fgsm(params, X, labels, head, epsilon, lo=None, hi=None) -> np.ndarray:
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if epsilon == 0:
        return X.copy()
    adv = X + epsilon * np.sign(input_gradient(params, X, labels, head))
    return _clip(adv, lo, hi)


def pgd(params, X, labels, head, epsilon, steps, step_size, lo=None, hi=None) -> np.ndarray:
    """Iterated gradient-sign steps projected onto the L-inf ball around ``X``."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if steps < 1:
        raise ValueError("pgd needs steps >= 1")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    adv = X.copy()
    for _ in range(steps):
        adv = adv + step_size * np.sign(input_gradient(params, adv, labels, head))
        adv = np.clip(adv, X - epsilon, X + epsilon)
        adv = _clip(adv, lo, hi)
    return adv


def adversarial_perturb(mode, params, X, labels, head, epsilon, steps=1, step_size=None, lo=None, hi=None):
    if mode == "fgsm":
        return fgsm(params, X, labels, head, epsilon, lo, hi)
    if mode == "pgd":
        return pgd(params, X, labels, head, epsilon, steps, epsilon if step_size is None else step_size, lo, hi)
    raise ValueError(f"unknown attack {mode!r}")


def _clip(X, lo, hi):
    if lo is None and hi is None:
        return X
    return np.clip(X, lo, hi)


def feature_range(X) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension ``(min, max)`` of ``X``, the default clip box for attacks."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return X.min(axis=0), X.max(axis=0)
