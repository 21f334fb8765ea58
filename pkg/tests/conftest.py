from __future__ import annotations

import numpy as np
import pytest

from durmlab.model import MlpParams, forward
from durmlab.numerics import cross_entropy, softmax

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def _loss_and_masks(params: MlpParams, X, Y) -> tuple[float, list[np.ndarray]]:
    logits, trace = forward(params, X)
    masks = [z > 0 for z in trace.pre_activations[:-1]]
    return float(np.sum(cross_entropy(softmax(logits), Y))), masks


def summed_loss(params: MlpParams, X, Y) -> float:
    return _loss_and_masks(params, X, Y)[0]


def finite_difference_grad(params: MlpParams, X, Y, h: float = 1e-4, min_h: float = 1e-9) -> np.ndarray:
    """Five-point central differences of the summed loss, one coordinate at a time.

    A difference quotient is only meaningful while no ReLU changes state
    inside the stencil, so the step is shrunk by 10x until the activation
    pattern at every stencil point matches the unperturbed one.
    """
    w = params.flatten()
    _, base_masks = _loss_and_masks(params, X, Y)
    out = np.empty_like(w)
    for i in range(w.size):
        step = h
        while True:
            values, smooth = [], True
            for k in (2, 1, -1, -2):
                v = w.copy()
                v[i] += k * step
                loss, masks = _loss_and_masks(params.unflatten(v), X, Y)
                values.append(loss)
                smooth &= all(np.array_equal(a, b) for a, b in zip(masks, base_masks))
            if smooth or step <= min_h:
                break
            step /= 10.0
        f2, f1, m1, m2 = values
        out[i] = (-f2 + 8 * f1 - 8 * m1 + m2) / (12 * step)
    return out


@pytest.fixture
def record_acceptance():
    def record(name: str, ok: bool, detail: str = "") -> None:
        ACCEPTANCE_RESULTS[name] = (bool(ok), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")
