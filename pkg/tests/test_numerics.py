#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the dense-matrix kernel and its backward passes.
"""

import numpy as np
import pytest

from src.common.errors import NumericError, ShapeError
from src.common.numerics import (
    as_mat,
    avg_pool_all,
    avg_pool_all_backward,
    avg_pool_window,
    avg_pool_window_backward,
    cosine,
    cosine_backward,
    cosine_matrix,
    cosine_matrix_backward,
    finite_diff_gradient,
    matmul,
    max_pool_all,
    max_pool_all_backward,
    max_pool_window,
    max_pool_window_backward,
    relative_error,
    sigmoid,
    weighted_pool_window,
    weighted_pool_window_backward,
    wide_conv_backward,
    wide_conv_forward,
)


def test_matmul_examples():
    """Test matrix products against hand arithmetic."""
    m = as_mat([[1, 2], [3, 4]])
    np.testing.assert_array_equal(matmul(np.eye(2), m), m)
    np.testing.assert_array_equal(matmul(as_mat([[1, 1]]), np.eye(2)), [[1, 1]])
    np.testing.assert_array_equal(matmul(m, as_mat([[5], [6]])), [[17], [39]])


def test_matmul_shape_error_names_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 2\).*\(3, 1\)"):
        matmul(np.ones((2, 2)), np.ones((3, 1)))


def test_cosine_examples():
    """Test collinear, orthogonal and diagonal vectors plus the zero-vector rule."""
    assert cosine([1, 0], [2, 0]) == pytest.approx(1.0)
    assert cosine([1, 0], [0, 3]) == pytest.approx(0.0)
    assert cosine([1, 1], [1, 0]) == pytest.approx(0.70711, abs=1e-5)
    assert cosine([0, 0], [1, 2]) == 0.0
    du, dv = cosine_backward(np.zeros(2), np.array([1.0, 2.0]), 1.0)
    assert not du.any() and not dv.any()
    with pytest.raises(ShapeError):
        cosine([1, 2], [1, 2, 3])


def test_wide_conv_hand_example():
    """Test the padded-window example with tanh activation."""
    out = wide_conv_forward(as_mat([[1, 2]]), as_mat([[1, 1]]), np.zeros(1), 2)
    np.testing.assert_allclose(out, [[0.76159, 0.99505, 0.96403]], atol=1e-5)


def test_wide_conv_zero_filter_and_width():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 5))
    for w in (1, 2, 3):
        out = wide_conv_forward(x, np.zeros((4, 3 * w)), np.zeros(4), w)
        assert out.shape == (4, 5 + w - 1)
        assert not out.any()


def test_wide_conv_zero_channel_invariance():
    """Appending a zero channel map leaves the output unchanged for any filter extension."""
    rng = np.random.default_rng(1)
    d_in, s, w, d_out = 2, 5, 3, 4
    x = rng.normal(size=(d_in, s))
    filt = rng.normal(size=(d_out, d_in * w))
    bias = rng.normal(size=d_out)
    base = wide_conv_forward(x, filt, bias, w)

    x_ext = np.vstack([x, np.zeros((d_in, s))])
    filt_ext = np.empty((d_out, 2 * d_in * w))
    for k in range(w):
        filt_ext[:, k * 2 * d_in:k * 2 * d_in + d_in] = filt[:, k * d_in:(k + 1) * d_in]
        filt_ext[:, k * 2 * d_in + d_in:(k + 1) * 2 * d_in] = rng.normal(size=(d_out, d_in))
    np.testing.assert_allclose(wide_conv_forward(x_ext, filt_ext, bias, w), base, rtol=0, atol=1e-12)


def test_wide_conv_shape_errors():
    with pytest.raises(ShapeError):
        wide_conv_forward(np.ones((2, 3)), np.ones((1, 5)), np.zeros(1), 2)
    with pytest.raises(ShapeError):
        wide_conv_forward(np.ones((2, 3)), np.ones((1, 0)), np.zeros(1), 0)


def test_avg_pool_window_examples():
    np.testing.assert_array_equal(avg_pool_window(as_mat([[1, 3, 5]]), 2), [[2, 4]])
    np.testing.assert_array_equal(avg_pool_window(as_mat([[1, 3], [2, 4]]), 2), [[2], [3]])
    m = np.random.default_rng(2).normal(size=(3, 4))
    np.testing.assert_array_equal(avg_pool_window(m, 1), m)
    with pytest.raises(ShapeError):
        avg_pool_window(as_mat([[1, 2]]), 3)


def test_weighted_pool_window_examples():
    """Test the hand example and the reductions to plain averaging."""
    m = as_mat([[1, 2, 3]])
    np.testing.assert_allclose(weighted_pool_window(m, np.array([1.0, 0.0, 2.0]), 2), [[1, 6]])
    assert not weighted_pool_window(m, np.zeros(3), 2).any()

    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 6))
    for w in (1, 2, 3):
        np.testing.assert_allclose(weighted_pool_window(m, np.full(6, 1.0 / w), w), avg_pool_window(m, w))
        np.testing.assert_allclose(weighted_pool_window(m, np.full(6, 0.7), w), avg_pool_window(m, w) * 0.7 * w)
    with pytest.raises(ShapeError):
        weighted_pool_window(m, np.ones(5), 2)


def test_all_pooling_examples():
    np.testing.assert_array_equal(avg_pool_all(as_mat([[1, 3], [2, 4]])), [2, 3])
    np.testing.assert_array_equal(avg_pool_all(as_mat([[0, 0, 6]])), [2])
    np.testing.assert_array_equal(avg_pool_all(as_mat([[5], [7]])), [5, 7])
    np.testing.assert_array_equal(max_pool_window(as_mat([[1, 3, 2]]), 2), [[3, 3]])
    np.testing.assert_array_equal(max_pool_all(as_mat([[1, 3], [4, 2]])), [3, 4])
    with pytest.raises(ShapeError):
        avg_pool_all(np.ones((2, 0)))


def test_finite_diff_gradient_examples():
    x = as_mat([[1, 2]])
    np.testing.assert_allclose(finite_diff_gradient(lambda m: float(np.sum(m ** 2)), x), [[2, 4]], atol=1e-6)
    assert not finite_diff_gradient(lambda m: 3.0, x).any()
    y = np.random.default_rng(4).normal(size=(2, 3))
    expected = np.zeros((2, 3))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(finite_diff_gradient(lambda m: float(m[0, 0]), y), expected, atol=1e-9)
    with pytest.raises(NumericError):
        finite_diff_gradient(lambda m: float("nan"), x)


def test_sigmoid_is_stable():
    assert sigmoid(0.0) == 0.5
    assert 0.0 <= sigmoid(-800.0) < 1e-300
    assert sigmoid(800.0) == 1.0


@pytest.mark.parametrize("w", [1, 2, 3])
def test_wide_conv_backward_matches_finite_differences(w):
    """Test input, filter and bias gradients of the convolution."""
    rng = np.random.default_rng(10 + w)
    x = rng.normal(size=(4, 6))
    filt = rng.normal(scale=0.5, size=(3, 4 * w))
    bias = rng.normal(size=3)
    upstream = rng.normal(size=(3, 6 + w - 1))

    out = wide_conv_forward(x, filt, bias, w)
    dx, dfilt, dbias = wide_conv_backward(x, filt, out, upstream, w)

    def loss_x(m):
        return float(np.sum(upstream * wide_conv_forward(m, filt, bias, w)))

    def loss_f(m):
        return float(np.sum(upstream * wide_conv_forward(x, m, bias, w)))

    def loss_b(m):
        return float(np.sum(upstream * wide_conv_forward(x, filt, m.ravel(), w)))

    assert relative_error(dx, finite_diff_gradient(loss_x, x)) <= 1e-4
    assert relative_error(dfilt, finite_diff_gradient(loss_f, filt)) <= 1e-4
    numeric_b = finite_diff_gradient(loss_b, bias.reshape(1, -1)).ravel()
    assert relative_error(dbias, numeric_b) <= 1e-4


@pytest.mark.parametrize("w", [1, 2, 3])
def test_pooling_backward_matches_finite_differences(w):
    rng = np.random.default_rng(20 + w)
    m = rng.normal(size=(3, 7))
    weights = rng.normal(size=7)
    upstream = rng.normal(size=(3, 7 - w + 1))

    np.testing.assert_allclose(
        avg_pool_window_backward(upstream, w),
        finite_diff_gradient(lambda x: float(np.sum(upstream * avg_pool_window(x, w))), m),
        atol=1e-6,
    )
    dm, dweights = weighted_pool_window_backward(m, weights, upstream, w)
    np.testing.assert_allclose(
        dm, finite_diff_gradient(lambda x: float(np.sum(upstream * weighted_pool_window(x, weights, w))), m),
        atol=1e-6,
    )
    numeric_w = finite_diff_gradient(
        lambda x: float(np.sum(upstream * weighted_pool_window(m, x.ravel(), w))), weights.reshape(1, -1)
    ).ravel()
    np.testing.assert_allclose(dweights, numeric_w, atol=1e-6)
    np.testing.assert_allclose(
        max_pool_window_backward(m, upstream, w),
        finite_diff_gradient(lambda x: float(np.sum(upstream * max_pool_window(x, w))), m),
        atol=1e-6,
    )


def test_all_pooling_backward_matches_finite_differences():
    rng = np.random.default_rng(30)
    m = rng.normal(size=(4, 5))
    upstream = rng.normal(size=4)
    np.testing.assert_allclose(
        avg_pool_all_backward(upstream, 5),
        finite_diff_gradient(lambda x: float(upstream @ avg_pool_all(x)), m),
        atol=1e-6,
    )
    np.testing.assert_allclose(
        max_pool_all_backward(m, upstream),
        finite_diff_gradient(lambda x: float(upstream @ max_pool_all(x)), m),
        atol=1e-6,
    )


def test_cosine_matrix_backward_matches_finite_differences():
    """Test the pairwise-cosine gradient, including a zero column."""
    rng = np.random.default_rng(40)
    first = rng.normal(size=(3, 4))
    second = rng.normal(size=(3, 4))
    second[:, 3] = 0.0
    upstream = rng.normal(size=(4, 4))
    d_first, d_second = cosine_matrix_backward(first, second, upstream)

    numeric_first = finite_diff_gradient(lambda x: float(np.sum(upstream * cosine_matrix(x, second))), first)
    assert relative_error(d_first, numeric_first) <= 1e-4
    assert not d_second[:, 3].any()
    numeric_second = finite_diff_gradient(lambda x: float(np.sum(upstream * cosine_matrix(first, x))), second)
    assert relative_error(d_second[:, :3], numeric_second[:, :3]) <= 1e-4
