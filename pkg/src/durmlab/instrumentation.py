"""Gradient statistics, push/pull decomposition and flatness probes.

Sign convention: everything recorded here uses the loss gradient
``p - y``. The per-class quantity ``g_k`` of the DuRM analysis is its
negation, so ``push + pull == grad_sum``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import MlpParams

log = logging.getLogger(__name__)

TAU_CAP = 1e12
EPS_FLOOR = 1.0 / TAU_CAP


def decompose_push_pull(probs, labels, k: int) -> tuple[float, float]:
    """Split the summed class-k logit gradient into push and pull terms.

    ``labels`` are either class indices or (soft) target rows. For soft
    targets the pull term weighs each sample by its target mass on ``k``.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    if not 0 <= k < probs.shape[1]:
        raise ValueError(f"class index {k} outside [0, {probs.shape[1]})")
    labels = np.asarray(labels)
    if labels.ndim == 2:
        y_k = labels[:, k].astype(np.float64)
    else:
        y_k = (labels.reshape(-1) == k).astype(np.float64)
    p_k = probs[:, k]
    push = float(np.sum((1.0 - y_k) * p_k))
    pull = float(np.sum(y_k * (p_k - 1.0)))
    return push, pull


@dataclass
class GradientTrace:
    """Per-epoch, per-logit gradient statistics collected during training.

    Row ``e`` of each array-valued series belongs to epoch ``e`` (1-based
    epochs are stored at index ``e - 1``). Columns run over all C + C_d logits.
    """

    num_classes: int
    num_dummy: int
    grad_sum: list[np.ndarray] = field(default_factory=list)
    grad_var: list[np.ndarray] = field(default_factory=list)
    push: list[np.ndarray] = field(default_factory=list)
    pull: list[np.ndarray] = field(default_factory=list)
    dummy_fraction: list[np.ndarray] = field(default_factory=list)
    fraction_underflows: list[int] = field(default_factory=list)
    layer_grad_var: list[list[float]] = field(default_factory=list)
    step_grad_norm: list[float] = field(default_factory=list)
    epochs: list[int] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.num_classes + self.num_dummy

    def within_epoch_variance(self) -> np.ndarray:
        return np.array(self.grad_var).reshape(-1, self.width)

    def across_epoch_variance(self) -> np.ndarray:
        """Variance across epochs of each logit's summed gradient (ddof=1)."""
        sums = np.array(self.grad_sum).reshape(-1, self.width)
        if sums.shape[0] < 2:
            return np.zeros(self.width)
        return sums.var(axis=0, ddof=1)

    def as_dict(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "num_dummy": self.num_dummy,
            "epochs": list(self.epochs),
            "grad_sum": [a.tolist() for a in self.grad_sum],
            "grad_var": [a.tolist() for a in self.grad_var],
            "grad_var_across_epochs": self.across_epoch_variance().tolist(),
            "push": [a.tolist() for a in self.push],
            "pull": [a.tolist() for a in self.pull],
            "dummy_fraction": [a.tolist() for a in self.dummy_fraction],
            "fraction_underflows": list(self.fraction_underflows),
            "layer_grad_var": [list(v) for v in self.layer_grad_var],
            "step_grad_norm": list(self.step_grad_norm),
        }


def record_epoch_gradients(
    trace: GradientTrace,
    epoch: int,
    sample_grads,
    targets,
    dummy_fraction: np.ndarray | None = None,
    fraction_underflows: int = 0,
    layer_grad_var: list[float] | None = None,
) -> GradientTrace:
    """Store one epoch's per-logit gradient sum, variance and push/pull split.

    ``sample_grads`` holds one row of logit gradients ``p - y`` per training
    sample, captured before the parameter update of its batch. Variance is
    the unbiased (N-1) estimate over those rows.
    """
    if epoch in trace.epochs:
        raise ValueError(f"epoch {epoch} already recorded")
    G = np.atleast_2d(np.asarray(sample_grads, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if G.shape != Y.shape or G.shape[1] != trace.width:
        raise ValueError(f"expected ({G.shape[0]}, {trace.width}) gradients and targets, got {G.shape} and {Y.shape}")
    P = G + Y
    trace.epochs.append(int(epoch))
    trace.grad_sum.append(G.sum(axis=0))
    trace.grad_var.append(G.var(axis=0, ddof=1) if G.shape[0] > 1 else np.zeros(trace.width))
    trace.push.append(np.sum((1.0 - Y) * P, axis=0))
    trace.pull.append(np.sum(Y * (P - 1.0), axis=0))
    if trace.num_dummy:
        trace.dummy_fraction.append(
            np.full(trace.num_dummy, np.nan) if dummy_fraction is None else np.asarray(dummy_fraction, dtype=np.float64)
        )
        trace.fraction_underflows.append(int(fraction_underflows))
    if layer_grad_var is not None:
        trace.layer_grad_var.append([float(v) for v in layer_grad_var])
    return trace


def model_distance(params_t: MlpParams, params_0: MlpParams) -> float:
    """Squared Euclidean distance between two parameter sets."""
    if params_t.layer_sizes != params_0.layer_sizes:
        raise ValueError(f"shape mismatch: {params_t.layer_sizes} vs {params_0.layer_sizes}")
    diff = params_t.flatten() - params_0.flatten()
    return float(diff @ diff)


@dataclass
class EigenEstimate:
    rho: float
    converged: bool
    history: list[float]


def estimate_top_hessian_eigenvalue(
    grad_fn: Callable[[np.ndarray], np.ndarray],
    w: np.ndarray,
    iterations: int = 50,
    fd_step: float = 1e-4,
    seed: int = 0,
    init: np.ndarray | None = None,
) -> EigenEstimate:
    """Power iteration on finite-difference Hessian-vector products.

    Each product is ``(grad(w + h s) - grad(w - h s)) / (2h)`` for the unit
    iterate ``s``. Returns the final Rayleigh quotient; ``converged`` is
    False when the last two estimates differ by more than 1%.
    """
    if iterations < 10:
        raise ValueError("iterations must be >= 10")
    w = np.asarray(w, dtype=np.float64)
    if init is None:
        s = np.random.default_rng(seed).standard_normal(w.shape)
    else:
        s = np.array(init, dtype=np.float64)
    s /= np.linalg.norm(s)
    history: list[float] = []
    for _ in range(iterations):
        hv = (grad_fn(w + fd_step * s) - grad_fn(w - fd_step * s)) / (2.0 * fd_step)
        if not np.all(np.isfinite(hv)):
            raise FloatingPointError("non-finite Hessian-vector product")
        history.append(float(s @ hv))
        norm = np.linalg.norm(hv)
        if norm == 0.0:
            break
        s = hv / norm
    rho = history[-1]
    converged = len(history) < 2 or abs(history[-1] - history[-2]) <= 0.01 * max(abs(history[-1]), 1e-300)
    if not converged:
        log.warning("power iteration not converged after %d iterations: %r -> %r", iterations, history[-2], history[-1])
    return EigenEstimate(rho, converged, history)


def estimate_flatness(
    loss_fn: Callable[[np.ndarray], float],
    w: np.ndarray,
    delta: float,
    trials: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Largest loss increase over random perturbations of norm exactly ``delta``.

    Returns ``(epsilon_hat, tau)`` with ``tau = 1 / max(epsilon_hat, 1e-12)``.
    The same seed yields the same directions for every ``delta``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    w = np.asarray(w, dtype=np.float64)
    base = float(loss_fn(w))
    rng = np.random.default_rng(seed)
    eps = 0.0
    for _ in range(trials):
        v = rng.standard_normal(w.shape)
        v *= delta / np.linalg.norm(v)
        perturbed = float(loss_fn(w + v))
        if not np.isfinite(perturbed):
            raise FloatingPointError("non-finite perturbed loss")
        eps = max(eps, perturbed - base)
    return eps, 1.0 / max(eps, EPS_FLOOR)


@dataclass
class FlatnessReport:
    model_distance: list[float]
    cumulative_grad_norm: list[float]
    rho: float
    rho_converged: bool
    epsilon_hat: float
    tau: float
    delta: float
    min_step_grad_norm: float

    def as_dict(self) -> dict:
        return {
            "model_distance": list(self.model_distance),
            "cumulative_grad_norm": list(self.cumulative_grad_norm),
            "rho": self.rho,
            "rho_converged": self.rho_converged,
            "epsilon_hat": self.epsilon_hat,
            "tau": self.tau,
            "delta": self.delta,
            "min_step_grad_norm": self.min_step_grad_norm,
        }
