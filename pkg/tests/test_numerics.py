from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from durmlab.numerics import affine, cross_entropy, grad_logits, log_softmax, one_hot, softmax

# e^k / (e + e^2 + e^3), evaluated with 30-digit decimal arithmetic
SOFTMAX_123 = np.array([0.0900305731703804579980, 0.244728471054797652473, 0.665240955774821889529])
CE_123_CLASS0 = 2.40760596444438030448

finite_logits = arrays(np.float64, st.integers(2, 8), elements=st.floats(-50, 50))


def test_softmax_known_values():
    np.testing.assert_allclose(softmax([1.0, 2.0, 3.0]), SOFTMAX_123, rtol=1e-14)


def test_cross_entropy_known_value():
    p = softmax([1.0, 2.0, 3.0])
    assert cross_entropy(p, [1.0, 0.0, 0.0]) == pytest.approx(CE_123_CLASS0, rel=1e-14)


def test_softmax_shift_invariant_and_stable():
    z = np.array([1000.0, 1001.0, 1002.0])
    np.testing.assert_allclose(softmax(z), SOFTMAX_123, rtol=1e-12)
    np.testing.assert_allclose(np.exp(log_softmax(z)), SOFTMAX_123, rtol=1e-12)


def test_cross_entropy_floors_zero_probability():
    loss = cross_entropy(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    assert loss == pytest.approx(-np.log(1e-12))


def test_batch_cross_entropy_is_per_row():
    p = softmax(np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]]))
    y = np.eye(3)[[0, 2]]
    np.testing.assert_allclose(cross_entropy(p, y), [CE_123_CLASS0, np.log(3.0)], rtol=1e-13)


def test_grad_logits_matches_finite_differences():
    rng = np.random.default_rng(3)
    z = rng.normal(size=5)
    y = np.eye(5)[2]
    analytic = grad_logits(softmax(z), y)
    h = 1e-6
    numeric = np.array([
        (cross_entropy(softmax(z + h * e), y) - cross_entropy(softmax(z - h * e), y)) / (2 * h) for e in np.eye(5)
    ])
    np.testing.assert_allclose(analytic, numeric, atol=1e-8)


def test_affine_matches_loops():
    rng = np.random.default_rng(0)
    W, b, X = rng.normal(size=(4, 3)), rng.normal(size=4), rng.normal(size=(6, 3))
    loops = np.array([[sum(W[o, i] * x[i] for i in range(3)) + b[o] for o in range(4)] for x in X])
    np.testing.assert_allclose(affine(W, X, b), loops, rtol=1e-13)
    np.testing.assert_allclose(affine(W, X[0], b), loops[0], rtol=1e-13)


def test_affine_rejects_bad_shapes():
    with pytest.raises(ValueError):
        affine(np.zeros((2, 3)), np.zeros(4), np.zeros(2))
    with pytest.raises(ValueError):
        affine(np.zeros((2, 3)), np.zeros(3), np.zeros(3))


@pytest.mark.parametrize("bad", [[], [1.0, np.nan], [np.inf, 0.0]])
def test_softmax_rejects_empty_or_nonfinite(bad):
    with pytest.raises(ValueError):
        softmax(np.array(bad))


def test_grad_logits_length_mismatch():
    with pytest.raises(ValueError):
        grad_logits(np.ones(3) / 3, np.eye(4)[0])


def test_one_hot():
    np.testing.assert_array_equal(one_hot([2, 0], 4), [[0, 0, 1, 0], [1, 0, 0, 0]])


@settings(max_examples=200, deadline=None)
@given(finite_logits)
def test_softmax_is_a_distribution(z):
    p = softmax(z)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1.0) < 1e-12


@settings(max_examples=200, deadline=None)
@given(finite_logits, st.floats(-100, 100))
def test_softmax_shift_property(z, c):
    np.testing.assert_allclose(softmax(z + c), softmax(z), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(finite_logits, st.data())
def test_logit_gradient_sums_to_zero(z, data):
    k = data.draw(st.integers(0, z.size - 1))
    g = grad_logits(softmax(z), np.eye(z.size)[k])
    assert abs(g.sum()) < 1e-12
    assert g[k] <= 0
    assert np.all(np.delete(g, k) >= 0)


def test_cross_entropy_small_examples():
    assert cross_entropy(np.array([0.0, 1.0]), np.array([0.0, 1.0])) == 0.0
    assert cross_entropy(np.array([0.5, 0.5]), np.array([1.0, 0.0])) == pytest.approx(0.6931471805599453, rel=1e-15)
    np.testing.assert_array_equal(grad_logits(np.array([0.5, 0.5]), np.array([1.0, 0.0])), [-0.5, 0.5])


def test_affine_trivial_cases():
    x = np.array([1.5, -2.0, 0.25])
    np.testing.assert_array_equal(affine(np.eye(3), x, np.zeros(3)), x)
    np.testing.assert_array_equal(affine(np.zeros((2, 3)), x, np.array([4.0, 5.0])), [4.0, 5.0])


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(2, 6), elements=st.floats(-5, 5)), st.data())
def test_grad_logits_finite_difference_property(z, data):
    k = data.draw(st.integers(0, z.size - 1))
    y = np.eye(z.size)[k]
    h = 1e-5
    numeric = np.array([
        (cross_entropy(softmax(z + h * e), y) - cross_entropy(softmax(z - h * e), y)) / (2 * h) for e in np.eye(z.size)
    ])
    np.testing.assert_allclose(grad_logits(softmax(z), y), numeric, atol=1e-6)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(2, 8), elements=st.floats(-1e3, 1e3)))
def test_softmax_sums_to_one_for_large_inputs(z):
    assert abs(softmax(z).sum() - 1.0) < 1e-12
