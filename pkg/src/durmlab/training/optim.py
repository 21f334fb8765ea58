"""Momentum SGD with L2 weight decay."""

from __future__ import annotations

import numpy as np

from ..model import MlpParams, zeros_like


def sgd_step(
    params: MlpParams,
    grads: MlpParams,
    velocity: MlpParams | None,
    learning_rate: float,
    momentum: float = 0.0,
    weight_decay: float = 0.0,
) -> tuple[MlpParams, MlpParams]:
    """One heavy-ball step.

    ``v <- momentum * v - lr * (grad + weight_decay * param)``, then
    ``param <- param + v``. Weight decay applies to biases as well.
    """
    if not grads.all_finite():
        raise FloatingPointError("non-finite gradient")
    if velocity is None:
        velocity = zeros_like(params)
    new_v = []
    for v, g, p in zip(velocity.arrays(), grads.arrays(), params.arrays()):
        if v.shape != g.shape or g.shape != p.shape:
            raise ValueError(f"shape mismatch: {p.shape} / {g.shape} / {v.shape}")
        new_v.append(momentum * v - learning_rate * (g + weight_decay * p))
    v_params = MlpParams(new_v[0::2], new_v[1::2], params.activation)
    return params.zip_map(v_params, np.add), v_params
