"""The dummy-class output head: label padding and dummy-class measurements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HeadConfig:
    num_classes: int
    num_dummy: int = 0

    def __post_init__(self) -> None:
        if int(self.num_classes) < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if int(self.num_dummy) < 0:
            raise ValueError(f"num_dummy must be >= 0, got {self.num_dummy}")

    @property
    def width(self) -> int:
        return self.num_classes + self.num_dummy

    @property
    def mode(self) -> str:
        return "ERM" if self.num_dummy == 0 else "DuRM"


def pad_label(y: int, config: HeadConfig) -> np.ndarray:
    """One-hot of length C + C_d; the dummy block is always zero."""
    if not 0 <= int(y) < config.num_classes:
        raise ValueError(f"label {y} outside the real classes [0, {config.num_classes})")
    out = np.zeros(config.width)
    out[int(y)] = 1.0
    return out


def pad_labels(labels, config: HeadConfig) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= config.num_classes):
        bad = labels[(labels < 0) | (labels >= config.num_classes)][0]
        raise ValueError(f"label {bad} outside the real classes [0, {config.num_classes})")
    out = np.zeros((labels.shape[0], config.width))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def count_dummy_predictions(predictions, config: HeadConfig) -> int:
    predictions = np.asarray(predictions, dtype=np.int64)
    if predictions.size and (predictions.min() < 0 or predictions.max() >= config.width):
        raise ValueError(f"prediction index outside [0, {config.width})")
    return int(np.count_nonzero(predictions >= config.num_classes))


def gradient_fraction(p_dummy) -> tuple[np.ndarray, bool]:
    """Share of the total dummy-class probability held by each dummy class.

    Works on one vector or on rows of a batch. Returns ``(fractions,
    underflow)``: rows whose dummy mass is exactly zero get the uniform
    fraction and set the flag instead of raising.
    """
    p = np.asarray(p_dummy, dtype=np.float64)
    if p.shape[-1] == 0:
        raise ValueError("no dummy classes")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("dummy probabilities must be finite and non-negative")
    total = p.sum(axis=-1, keepdims=True)
    zero = total == 0.0
    uniform = np.full_like(p, 1.0 / p.shape[-1])
    frac = np.where(zero, uniform, p / np.where(zero, 1.0, total))
    return frac, bool(np.any(zero))
