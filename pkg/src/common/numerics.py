#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Dense matrix kernel for the TCNN matching engine.

This module provides the forward and backward passes of every layer the
matching models are built from:
- Matrix product and column cosine similarity
- Wide convolution with tanh activation
- Window / whole-sentence average, weighted and max pooling
- Central finite differences used as the gradient oracle

A Mat is a 2-D numpy array of float64. All functions are pure.
"""

from typing import Callable, Tuple

import numpy as np

from .errors import ArgumentError, NumericError, ShapeError

Mat = np.ndarray

# Norms below this are treated as zero vectors (cosine 0, gradient 0).
ZERO_NORM = 1e-12


def as_mat(values) -> Mat:
    """
    Convert a nested sequence into a float64 matrix.

    Args:
        values: Nested sequence or array with two dimensions

    Returns:
        A contiguous float64 array
    """
    m = np.array(values, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    return m


def matmul(a: Mat, b: Mat) -> Mat:
    """
    Standard matrix product.

    Args:
        a: Matrix of shape m×k
        b: Matrix of shape k×n

    Returns:
        The m×n product

    Raises:
        ShapeError: If a.cols != b.rows
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """
    Cosine similarity of two vectors, 0 when either one is a zero vector.

    Args:
        u: First vector
        v: Second vector of the same length

    Returns:
        u·v / (‖u‖‖v‖), clipped to [-1, 1]
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ShapeError(f"cosine of vectors with lengths {u.size} and {v.size}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < ZERO_NORM or nv < ZERO_NORM:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_backward(u: np.ndarray, v: np.ndarray, grad: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradient of grad·cosine(u, v) with respect to u and v.

    Returns:
        Tuple (du, dv); both zero when either vector has zero norm
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < ZERO_NORM or nv < ZERO_NORM:
        return np.zeros_like(u), np.zeros_like(v)
    c = np.dot(u, v) / (nu * nv)
    du = grad * (v / (nu * nv) - c * u / (nu * nu))
    dv = grad * (u / (nu * nv) - c * v / (nv * nv))
    return du, dv


def _unit_columns(m: Mat) -> Tuple[Mat, np.ndarray]:
    norms = np.linalg.norm(m, axis=0)
    safe = np.where(norms < ZERO_NORM, 1.0, norms)
    unit = m / safe
    unit[:, norms < ZERO_NORM] = 0.0
    return unit, norms


def cosine_matrix(first: Mat, second: Mat) -> Mat:
    """
    Pairwise column cosines: out[i, j] = cosine(first[:, i], second[:, j]).

    Args:
        first: Matrix d×n1
        second: Matrix d×n2

    Returns:
        The n1×n2 cosine matrix
    """
    if first.ndim != 2 or second.ndim != 2 or first.shape[0] != second.shape[0]:
        raise ShapeError(f"cosine matrix of {first.shape} and {second.shape}")
    u1, _ = _unit_columns(first)
    u2, _ = _unit_columns(second)
    return u1.T @ u2


def _unit_backward(unit: Mat, norms: np.ndarray, d_unit: Mat) -> Mat:
    # d(x/|x|) = (I - x̂x̂ᵀ)/|x|
    proj = np.sum(unit * d_unit, axis=0)
    safe = np.where(norms < ZERO_NORM, 1.0, norms)
    dm = (d_unit - unit * proj) / safe
    dm[:, norms < ZERO_NORM] = 0.0
    return dm


def cosine_matrix_backward(first: Mat, second: Mat, grad: Mat) -> Tuple[Mat, Mat]:
    """
    Backward pass of cosine_matrix.

    Args:
        first: Forward input d×n1
        second: Forward input d×n2
        grad: Upstream gradient n1×n2

    Returns:
        Tuple (d_first, d_second)
    """
    u1, n1 = _unit_columns(first)
    u2, n2 = _unit_columns(second)
    d_u1 = u2 @ grad.T
    d_u2 = u1 @ grad
    return _unit_backward(u1, n1, d_u1), _unit_backward(u2, n2, d_u2)


def _unfold(x: Mat, w: int) -> Mat:
    """Stack the w-column windows of the zero-padded input, one window per column."""
    height, s = x.shape
    padded = np.pad(x, ((0, 0), (w - 1, w - 1)))
    n = s + w - 1
    windows = np.empty((w * height, n), dtype=np.float64)
    for k in range(w):
        windows[k * height:(k + 1) * height, :] = padded[:, k:k + n]
    return windows


def wide_conv_forward(x: Mat, filt: Mat, bias: np.ndarray, w: int) -> Mat:
    """
    Wide convolution with tanh activation.

    The input is zero-padded with w-1 columns on each side; output column j is
    tanh(filter · [padded[:, j]; ...; padded[:, j+w-1]] + bias).

    Args:
        x: Input of shape (c·d_in)×s, a vertical stack of channel maps
        filt: Filter of shape d_out×(c·d_in·w)
        bias: Bias vector of length d_out
        w: Window width

    Returns:
        The d_out×(s+w-1) activation map

    Raises:
        ShapeError: If w < 1 or the filter does not fit the input
    """
    if w < 1:
        raise ShapeError(f"window width must be >= 1, got {w}")
    if x.ndim != 2 or filt.ndim != 2:
        raise ShapeError(f"convolution of {x.shape} with filter {filt.shape}")
    if filt.shape[1] != x.shape[0] * w:
        raise ShapeError(
            f"filter {filt.shape} does not fit input {x.shape} with window {w}"
        )
    bias = np.asarray(bias, dtype=np.float64).ravel()
    if bias.size != filt.shape[0]:
        raise ShapeError(f"bias length {bias.size} does not match filter {filt.shape}")
    return np.tanh(filt @ _unfold(x, w) + bias[:, None])


def wide_conv_backward(
    x: Mat,
    filt: Mat,
    out: Mat,
    grad: Mat,
    w: int
) -> Tuple[Mat, Mat, np.ndarray]:
    """
    Backward pass of wide_conv_forward.

    Args:
        x: Forward input
        filt: Forward filter
        out: Forward output (post-tanh)
        grad: Upstream gradient, same shape as out
        w: Window width

    Returns:
        Tuple (d_input, d_filter, d_bias)
    """
    height, s = x.shape
    dz = grad * (1.0 - out * out)
    d_filt = dz @ _unfold(x, w).T
    d_bias = dz.sum(axis=1)
    d_windows = filt.T @ dz
    n = s + w - 1
    d_padded = np.zeros((height, s + 2 * (w - 1)), dtype=np.float64)
    for k in range(w):
        d_padded[:, k:k + n] += d_windows[k * height:(k + 1) * height, :]
    return d_padded[:, w - 1:w - 1 + s], d_filt, d_bias


def avg_pool_window(m: Mat, w: int) -> Mat:
    """
    Column-wise averaging over w consecutive columns ("w-ap").

    Args:
        m: Matrix d×(s+w-1)
        w: Window width

    Returns:
        Matrix d×s
    """
    if w < 1 or w > m.shape[1]:
        raise ShapeError(f"window {w} does not fit matrix {m.shape}")
    s = m.shape[1] - w + 1
    out = np.zeros((m.shape[0], s), dtype=np.float64)
    for k in range(w):
        out += m[:, k:k + s]
    return out / w


def avg_pool_window_backward(grad: Mat, w: int) -> Mat:
    """Backward pass of avg_pool_window."""
    d, s = grad.shape
    dm = np.zeros((d, s + w - 1), dtype=np.float64)
    for k in range(w):
        dm[:, k:k + s] += grad / w
    return dm


def weighted_pool_window(m: Mat, weights: np.ndarray, w: int) -> Mat:
    """
    Attention-weighted window pooling (unnormalized weighted sum).

    out[:, j] = sum over k in j..j+w-1 of weights[k]·m[:, k]

    Args:
        m: Matrix d×(s+w-1)
        weights: Per-column weights, length m.cols
        w: Window width

    Returns:
        Matrix d×s
    """
    weights = np.asarray(weights, dtype=np.float64).ravel()
    if weights.size != m.shape[1]:
        raise ShapeError(
            f"{weights.size} pooling weights for a matrix with {m.shape[1]} columns"
        )
    if w < 1 or w > m.shape[1]:
        raise ShapeError(f"window {w} does not fit matrix {m.shape}")
    scaled = m * weights[None, :]
    s = m.shape[1] - w + 1
    out = np.zeros((m.shape[0], s), dtype=np.float64)
    for k in range(w):
        out += scaled[:, k:k + s]
    return out


def weighted_pool_window_backward(
    m: Mat,
    weights: np.ndarray,
    grad: Mat,
    w: int
) -> Tuple[Mat, np.ndarray]:
    """
    Backward pass of weighted_pool_window.

    Returns:
        Tuple (d_m, d_weights)
    """
    s = grad.shape[1]
    d_scaled = np.zeros_like(m)
    for k in range(w):
        d_scaled[:, k:k + s] += grad
    return d_scaled * weights[None, :], np.sum(d_scaled * m, axis=0)


def avg_pool_all(m: Mat) -> np.ndarray:
    """
    Column-wise averaging over all columns ("all-ap").

    Args:
        m: Matrix d×n, n >= 1

    Returns:
        Vector of the d row means
    """
    if m.ndim != 2 or m.shape[1] < 1:
        raise ShapeError(f"cannot average an empty matrix {m.shape}")
    return m.mean(axis=1)


def avg_pool_all_backward(grad: np.ndarray, n: int) -> Mat:
    """Backward pass of avg_pool_all for an input with n columns."""
    return np.repeat((grad / n)[:, None], n, axis=1)


def max_pool_window(m: Mat, w: int) -> Mat:
    """Column-wise maximum over w consecutive columns."""
    if w < 1 or w > m.shape[1]:
        raise ShapeError(f"window {w} does not fit matrix {m.shape}")
    s = m.shape[1] - w + 1
    stacked = np.stack([m[:, k:k + s] for k in range(w)])
    return stacked.max(axis=0)


def max_pool_window_backward(m: Mat, grad: Mat, w: int) -> Mat:
    """Backward pass of max_pool_window; ties route to the first maximum."""
    s = grad.shape[1]
    stacked = np.stack([m[:, k:k + s] for k in range(w)])
    arg = stacked.argmax(axis=0)
    dm = np.zeros_like(m)
    rows = np.arange(m.shape[0])[:, None]
    cols = np.arange(s)[None, :] + arg
    np.add.at(dm, (np.broadcast_to(rows, cols.shape), cols), grad)
    return dm


def max_pool_all(m: Mat) -> np.ndarray:
    """Row-wise maximum over all columns."""
    if m.ndim != 2 or m.shape[1] < 1:
        raise ShapeError(f"cannot pool an empty matrix {m.shape}")
    return m.max(axis=1)


def max_pool_all_backward(m: Mat, grad: np.ndarray) -> Mat:
    """Backward pass of max_pool_all; ties route to the first maximum."""
    dm = np.zeros_like(m)
    dm[np.arange(m.shape[0]), m.argmax(axis=1)] = grad
    return dm


def sigmoid(z: float) -> float:
    """Numerically stable logistic function."""
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def finite_diff_gradient(f: Callable[[Mat], float], x: Mat, epsilon: float = 1e-5) -> Mat:
    """
    Central-difference gradient of a scalar function of a matrix.

    Args:
        f: Scalar function of a matrix shaped like x
        x: Point at which to differentiate (not modified)
        epsilon: Step size, > 0

    Returns:
        Matrix of (f(x+εe_ij) - f(x-εe_ij)) / (2ε)

    Raises:
        NumericError: If f returns a non-finite value
    """
    if epsilon <= 0:
        raise ArgumentError(f"epsilon must be positive, got {epsilon}")
    probe = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(probe)
    for idx in np.ndindex(probe.shape):
        original = probe[idx]
        probe[idx] = original + epsilon
        upper = f(probe)
        probe[idx] = original - epsilon
        lower = f(probe)
        probe[idx] = original
        if not (np.isfinite(upper) and np.isfinite(lower)):
            raise NumericError(f"function is not finite near entry {idx}")
        grad[idx] = (upper - lower) / (2.0 * epsilon)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max absolute difference scaled by max(1, ‖numeric‖∞)."""
    if analytic.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(numeric))))
    return float(np.max(np.abs(analytic - numeric))) / scale
