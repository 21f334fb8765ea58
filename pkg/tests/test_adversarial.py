from __future__ import annotations

import numpy as np
import pytest

from durmlab.data import gen_blobs, train_test_split
from durmlab.head import HeadConfig
from durmlab.model import init_params, predict
from durmlab.training import (
    TrainConfig,
    adversarial_perturb,
    feature_range,
    fgsm,
    input_gradient,
    pgd,
    train,
)


@pytest.fixture(scope="module")
def model():
    head = HeadConfig(3, 2)
    params = init_params([2, 8, 5], np.random.default_rng(0))
    X = np.random.default_rng(1).normal(size=(12, 2))
    labels = np.arange(12) % 3
    return params, head, X, labels


def test_fgsm_zero_is_identity(model):
    params, head, X, labels = model
    np.testing.assert_array_equal(fgsm(params, X, labels, head, 0.0), X)


def test_fgsm_moves_by_epsilon_along_gradient_sign(model):
    params, head, X, labels = model
    adv = fgsm(params, X, labels, head, 0.1)
    np.testing.assert_allclose(adv - X, 0.1 * np.sign(input_gradient(params, X, labels, head)))


def test_pgd_single_step_equals_fgsm(model):
    params, head, X, labels = model
    np.testing.assert_array_equal(pgd(params, X, labels, head, 0.2, 1, 0.2), fgsm(params, X, labels, head, 0.2))
    np.testing.assert_array_equal(
        adversarial_perturb("pgd", params, X, labels, head, 0.2), fgsm(params, X, labels, head, 0.2)
    )


def test_pgd_stays_in_ball_and_box(model):
    params, head, X, labels = model
    lo, hi = feature_range(X)
    adv = pgd(params, X, labels, head, 0.3, 10, 0.1, lo, hi)
    assert np.all(np.abs(adv - X) <= 0.3 + 1e-12)
    assert np.all(adv >= lo) and np.all(adv <= hi)


def test_attack_argument_validation(model):
    params, head, X, labels = model
    with pytest.raises(ValueError):
        fgsm(params, X, labels, head, -0.1)
    with pytest.raises(ValueError):
        pgd(params, X, labels, head, 0.1, 0, 0.1)
    with pytest.raises(ValueError):
        adversarial_perturb("cw", params, X, labels, head, 0.1)


def test_attack_lowers_accuracy_on_overlapping_blobs():
    data = gen_blobs(0, 3, 100, 2, 2.5, 1.0)
    tr, te = train_test_split(data, 1 / 3, 0)
    head = HeadConfig(3, 2)
    res = train(tr, TrainConfig(head=head, epochs=30, batch_size=16))
    clean = np.mean(predict(res.final_params, te.features) == te.labels)
    adv = fgsm(res.final_params, te.features, te.labels, head, 0.1)
    robust = np.mean(predict(res.final_params, adv) == te.labels)
    assert robust < clean


def test_linear_two_class_input_gradient_symbolic():
    # for logits Wx + b with two classes: grad_x = (p_1 - y_1) * (w_1 - w_0)
    from durmlab.model import MlpParams

    rng = np.random.default_rng(3)
    W, b = rng.normal(size=(2, 4)), rng.normal(size=2)
    params, head = MlpParams([W], [b]), HeadConfig(2)
    X = rng.normal(size=(10, 4))
    labels = rng.integers(0, 2, 10)
    z = X @ W.T + b
    p1 = 1 / (1 + np.exp(z[:, 0] - z[:, 1]))
    expected = (p1 - (labels == 1))[:, None] * (W[1] - W[0])
    got = input_gradient(params, X, labels, head)
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-15)
    np.testing.assert_array_equal(np.sign(fgsm(params, X, labels, head, 0.5) - X), np.sign(expected))
