#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Attention operations of the ATCNN-1 and ATCNN-2 blocks.

Orientation is fixed throughout: A_qt has rows indexing T positions and
columns indexing Q positions; A_qa has rows indexing Q and columns indexing A.
With this layout every attention feature map has its columns aligned with
the positions of the sentence it is stacked onto.

In two-tower mode the answer tower is absent; functions accept None for the
A-side inputs and return None for the A-side outputs.
"""

from typing import Optional, Tuple

import numpy as np

from ..common.errors import ShapeError
from ..common.numerics import Mat, cosine_matrix, cosine_matrix_backward, matmul


def attention_matrix(first: Mat, second: Mat) -> Mat:
    """
    Pairwise column cosines between two feature maps.

    Args:
        first: Feature map d×s (rows of the result)
        second: Feature map d×s (columns of the result)

    Returns:
        The s×s matrix out[i, j] = cosine(first[:, i], second[:, j])
    """
    if first.shape != second.shape:
        raise ShapeError(f"attention between maps of shape {first.shape} and {second.shape}")
    return cosine_matrix(first, second)


def attention_matrix_backward(first: Mat, second: Mat, grad: Mat) -> Tuple[Mat, Mat]:
    """Backward pass of attention_matrix: (d_first, d_second)."""
    return cosine_matrix_backward(first, second, grad)


def _check(a: Mat, w: Mat) -> None:
    if a.shape[0] != a.shape[1] or w.shape[1] != a.shape[0]:
        raise ShapeError(f"attention matrix {a.shape} does not fit weights {w.shape}")


def atcnn1_attention_maps(
    a_qt: Mat,
    a_qa: Optional[Mat],
    w_qt0: Mat,
    w_qt1: Mat,
    w_qa0: Optional[Mat] = None,
    w_qa1: Optional[Mat] = None
) -> Tuple[Mat, Mat, Optional[Mat]]:
    """
    ATCNN-1 attention feature maps.

    F_T = W_qt0·A_qtᵀ, F_Q = (W_qt1·A_qt + W_qa0·A_qaᵀ)/2, F_A = W_qa1·A_qa.
    Without an answer tower F_Q = W_qt1·A_qt and F_A is None.

    Returns:
        Tuple (F_T, F_Q, F_A), each d_in×s
    """
    _check(a_qt, w_qt0)
    _check(a_qt, w_qt1)
    f_t = matmul(w_qt0, a_qt.T)
    if a_qa is None:
        return f_t, matmul(w_qt1, a_qt), None
    _check(a_qa, w_qa0)
    _check(a_qa, w_qa1)
    f_q = (matmul(w_qt1, a_qt) + matmul(w_qa0, a_qa.T)) / 2.0
    f_a = matmul(w_qa1, a_qa)
    return f_t, f_q, f_a


def atcnn2_attention_maps(
    a_qt: Mat,
    a_qa: Optional[Mat],
    w_qt1: Mat,
    w_qa0: Optional[Mat] = None
) -> Tuple[Mat, Optional[Mat]]:
    """
    ATCNN-2 attention feature maps of Q: F_QT = W_qt1·A_qt, F_QA = W_qa0·A_qaᵀ.

    Returns:
        Tuple (F_QT, F_QA); F_QA is None without an answer tower
    """
    _check(a_qt, w_qt1)
    f_qt = matmul(w_qt1, a_qt)
    if a_qa is None:
        return f_qt, None
    _check(a_qa, w_qa0)
    return f_qt, matmul(w_qa0, a_qa.T)


def pooling_weights(
    a_qt: Mat,
    a_qa: Optional[Mat]
) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """
    Attention pooling weights: each position's total attention mass.

    weights_T = row sums of A_qt', weights_A = column sums of A_qa',
    weights_Q = (column sums of A_qt' + row sums of A_qa') / 2.
    Without an answer tower weights_Q is the column sums of A_qt'.

    Args:
        a_qt: Attention matrix on convolution outputs, n×n
        a_qa: Attention matrix on convolution outputs, n×n, or None

    Returns:
        Tuple (weights_T, weights_Q, weights_A)
    """
    if a_qt.shape[0] != a_qt.shape[1]:
        raise ShapeError(f"pooling attention must be square, got {a_qt.shape}")
    weights_t = a_qt.sum(axis=1)
    if a_qa is None:
        return weights_t, a_qt.sum(axis=0), None
    if a_qa.shape != a_qt.shape:
        raise ShapeError(f"pooling attention shapes differ: {a_qt.shape} and {a_qa.shape}")
    weights_q = (a_qt.sum(axis=0) + a_qa.sum(axis=1)) / 2.0
    return weights_t, weights_q, a_qa.sum(axis=0)


def pooling_weights_backward(
    n: int,
    d_weights_t: np.ndarray,
    d_weights_q: np.ndarray,
    d_weights_a: Optional[np.ndarray]
) -> Tuple[Mat, Optional[Mat]]:
    """
    Backward pass of pooling_weights.

    Returns:
        Tuple (d_A_qt', d_A_qa'); the second is None without an answer tower
    """
    if d_weights_a is None:
        return d_weights_t[:, None] + d_weights_q[None, :], None
    d_qt = d_weights_t[:, None] + d_weights_q[None, :] / 2.0
    d_qa = d_weights_a[None, :] + d_weights_q[:, None] / 2.0
    return np.broadcast_to(d_qt, (n, n)).copy(), np.broadcast_to(d_qa, (n, n)).copy()
