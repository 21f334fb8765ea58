"""Regularizers that DuRM is combined with: EMA, SWA, mixup, early stopping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import MlpParams


def ema_update(shadow: MlpParams, params: MlpParams, decay: float) -> MlpParams:
    if not 0.0 <= decay <= 1.0:
        raise ValueError(f"ema decay must be in [0, 1], got {decay}")
    return shadow.zip_map(params, lambda s, p: decay * s + (1.0 - decay) * p)


@dataclass
class SwaState:
    start_epoch: int
    mean: MlpParams | None = None
    count: int = 0


def swa_update(state: SwaState, params: MlpParams, epoch: int) -> SwaState:
    """Fold an epoch-end checkpoint into the running mean; no-op before ``start_epoch``."""
    if epoch < state.start_epoch:
        return state
    if state.mean is None:
        return SwaState(state.start_epoch, params.copy(), 1)
    n = state.count + 1
    mean = state.mean.zip_map(params, lambda m, p: m + (p - m) / n)
    return SwaState(state.start_epoch, mean, n)


def mixup(x_i, x_j, y_i, y_j, lam: float):
    """Convex combination of two inputs and their target vectors."""
    x = lam * np.asarray(x_i, dtype=np.float64) + (1.0 - lam) * np.asarray(x_j, dtype=np.float64)
    y = lam * np.asarray(y_i, dtype=np.float64) + (1.0 - lam) * np.asarray(y_j, dtype=np.float64)
    return x, y


def mixup_batch(X: np.ndarray, Y: np.ndarray, alpha: float, rng: np.random.Generator):
    """Mix a batch with a shuffled copy of itself using one ``lam ~ Beta(alpha, alpha)``."""
    if not alpha > 0:
        raise ValueError("mixup alpha must be positive")
    lam = float(rng.beta(alpha, alpha))
    perm = rng.permutation(X.shape[0])
    Xm, Ym = mixup(X, X[perm], Y, Y[perm], lam)
    return Xm, Ym, lam


class EarlyStopper:
    """Signals a stop once validation loss has not improved for ``patience`` epochs."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError("patience must be >= 1")
        self.patience = patience
        self.best = np.inf
        self.bad_epochs = 0

    def update(self, val_loss: float) -> bool:
        if val_loss < self.best:
            self.best = val_loss
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
        return self.bad_epochs >= self.patience
