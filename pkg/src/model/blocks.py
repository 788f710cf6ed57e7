#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
One "convolution & pooling" block of the TCNN, ATCNN-1 and ATCNN-2 models.

Towers are keyed "q", "t" and "a" (query, knowledge title, knowledge answer).
All towers of a block convolve with the same filter and bias.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from ..common.errors import ShapeError
from ..common.numerics import (
    Mat,
    avg_pool_all,
    avg_pool_all_backward,
    avg_pool_window,
    avg_pool_window_backward,
    max_pool_all,
    max_pool_all_backward,
    max_pool_window,
    max_pool_window_backward,
    matmul,
    weighted_pool_window,
    weighted_pool_window_backward,
    wide_conv_backward,
    wide_conv_forward,
)
from .attention import (
    attention_matrix,
    attention_matrix_backward,
    atcnn1_attention_maps,
    atcnn2_attention_maps,
    pooling_weights,
    pooling_weights_backward,
)
from .config import ATCNN1, ModelConfig, ModelParams, block_key


def pool_all(m: Mat, mode: str) -> np.ndarray:
    """Sentence vector of a feature map ("all-ap", or row max in max mode)."""
    return max_pool_all(m) if mode == "max" else avg_pool_all(m)


def pool_all_backward(m: Mat, grad: np.ndarray, mode: str) -> Mat:
    if mode == "max":
        return max_pool_all_backward(m, grad)
    return avg_pool_all_backward(grad, m.shape[1])


@dataclass
class BlockOutput:
    """Per-tower window-pooled maps (next block input) and sentence vectors."""

    pooled: Dict[str, Mat]
    vectors: Dict[str, np.ndarray]
    cache: Dict[str, Any] = field(default_factory=dict, repr=False)


def _attention_inputs(
    reps: Dict[str, Mat],
    params: ModelParams,
    block: int,
    cfg: ModelConfig,
    cache: Dict[str, Any]
) -> Dict[str, list]:
    """Attention feature maps to stack under each tower's representation."""
    a_qt = attention_matrix(reps["t"], reps["q"])
    a_qa = attention_matrix(reps["q"], reps["a"]) if "a" in reps else None
    weights = {name: params[block_key(block, name)] for name in cfg.attention_names()}
    cache.update(a_qt=a_qt, a_qa=a_qa, attention_weights=weights)
    zero = np.zeros_like(reps["q"])

    if cfg.variant == ATCNN1:
        f_t, f_q, f_a = atcnn1_attention_maps(
            a_qt, a_qa, weights["W_qt0"], weights["W_qt1"],
            weights.get("W_qa0"), weights.get("W_qa1")
        )
        extra = {"q": [f_q], "t": [f_t]}
        if f_a is not None:
            extra["a"] = [f_a]
        return extra

    f_qt, f_qa = atcnn2_attention_maps(a_qt, a_qa, weights["W_qt1"], weights.get("W_qa0"))
    f_t = matmul(weights["W_qt0"], a_qt.T)
    extra = {
        "q": [f_qt, f_qa if f_qa is not None else zero],
        "t": [f_t, zero],
    }
    if a_qa is not None:
        extra["a"] = [matmul(weights["W_qa1"], a_qa), zero]
    return extra


def block_forward(
    reps: Dict[str, Mat],
    params: ModelParams,
    block: int,
    cfg: ModelConfig
) -> BlockOutput:
    """
    Run one block over the towers.

    tcnn: convolve, then window-average and all-average.
    atcnn1/atcnn2: build attention feature maps on the block inputs, stack
    them as extra channels, convolve, recompute attention on the convolution
    outputs and use each position's attention mass as window pooling weights.

    Args:
        reps: Tower name ("q", "t", optional "a") to d_in×s input map
        params: Model parameters
        block: 1-based block index
        cfg: Model configuration

    Returns:
        BlockOutput with P maps (d×s), sentence vectors (d) and a backward cache
    """
    shapes = {x: r.shape for x, r in reps.items()}
    if len(set(shapes.values())) != 1:
        raise ShapeError(f"tower inputs differ in shape: {shapes}")
    filt = params[block_key(block, "filter")]
    bias = params[block_key(block, "bias")]
    w = cfg.window
    cache: Dict[str, Any] = {"reps": reps}

    if cfg.attention:
        extra = _attention_inputs(reps, params, block, cfg, cache)
        inputs = {x: np.vstack([reps[x]] + extra[x]) for x in reps}
    else:
        inputs = dict(reps)
    convs = {x: wide_conv_forward(inputs[x], filt, bias, w) for x in reps}
    cache.update(inputs=inputs, convs=convs)

    if cfg.attention:
        p_qt = attention_matrix(convs["t"], convs["q"])
        p_qa = attention_matrix(convs["q"], convs["a"]) if "a" in convs else None
        weights_t, weights_q, weights_a = pooling_weights(p_qt, p_qa)
        pool_weights = {"q": weights_q, "t": weights_t}
        if weights_a is not None:
            pool_weights["a"] = weights_a
        cache["pool_weights"] = pool_weights
        pooled = {x: weighted_pool_window(convs[x], pool_weights[x], w) for x in convs}
    elif cfg.pool_mode == "max":
        pooled = {x: max_pool_window(c, w) for x, c in convs.items()}
    else:
        pooled = {x: avg_pool_window(c, w) for x, c in convs.items()}

    vectors = {x: pool_all(c, cfg.pool_mode) for x, c in convs.items()}
    return BlockOutput(pooled=pooled, vectors=vectors, cache=cache)


def _attention_maps_backward(
    d_extra: Dict[str, list],
    cache: Dict[str, Any],
    cfg: ModelConfig,
    grads: Dict[str, Mat]
) -> Tuple[Mat, Mat]:
    """Backward through the attention feature maps into A_qt / A_qa and the W matrices."""
    a_qt = cache["a_qt"]
    a_qa = cache["a_qa"]
    weights = cache["attention_weights"]
    d_a_qt = np.zeros_like(a_qt)
    d_a_qa = np.zeros_like(a_qa) if a_qa is not None else None

    # F_T = W_qt0 · A_qtᵀ in both variants
    d_f_t = d_extra["t"][0]
    grads["W_qt0"] = d_f_t @ a_qt
    d_a_qt += (weights["W_qt0"].T @ d_f_t).T

    if cfg.variant == ATCNN1:
        d_f_q = d_extra["q"][0]
        if a_qa is None:
            grads["W_qt1"] = d_f_q @ a_qt.T
            d_a_qt += weights["W_qt1"].T @ d_f_q
            return d_a_qt, d_a_qa
        half = d_f_q / 2.0
        grads["W_qt1"] = half @ a_qt.T
        d_a_qt += weights["W_qt1"].T @ half
        grads["W_qa0"] = half @ a_qa
        d_a_qa += (weights["W_qa0"].T @ half).T
    else:
        d_f_qt = d_extra["q"][0]
        grads["W_qt1"] = d_f_qt @ a_qt.T
        d_a_qt += weights["W_qt1"].T @ d_f_qt
        if a_qa is None:
            return d_a_qt, d_a_qa
        d_f_qa = d_extra["q"][1]
        grads["W_qa0"] = d_f_qa @ a_qa
        d_a_qa += (weights["W_qa0"].T @ d_f_qa).T

    # F_A = W_qa1 · A_qa
    d_f_a = d_extra["a"][0]
    grads["W_qa1"] = d_f_a @ a_qa.T
    d_a_qa += weights["W_qa1"].T @ d_f_a
    return d_a_qt, d_a_qa


def block_backward(
    d_pooled: Dict[str, Mat],
    d_vectors: Dict[str, np.ndarray],
    output: BlockOutput,
    params: ModelParams,
    block: int,
    cfg: ModelConfig
) -> Tuple[Dict[str, Mat], Dict[str, Mat]]:
    """
    Backward pass of block_forward.

    Args:
        d_pooled: Gradient of each tower's P map
        d_vectors: Gradient of each tower's sentence vector
        output: The BlockOutput returned by block_forward
        params: Model parameters
        block: 1-based block index
        cfg: Model configuration

    Returns:
        Tuple (gradient of each tower's input map, parameter gradients keyed
        by full tensor name)
    """
    cache = output.cache
    reps, inputs, convs = cache["reps"], cache["inputs"], cache["convs"]
    filt = params[block_key(block, "filter")]
    w = cfg.window

    d_convs: Dict[str, Mat] = {}
    d_weights: Dict[str, np.ndarray] = {}
    for x, conv in convs.items():
        d_conv = pool_all_backward(conv, d_vectors[x], cfg.pool_mode)
        if cfg.attention:
            d_m, d_weights[x] = weighted_pool_window_backward(
                conv, cache["pool_weights"][x], d_pooled[x], w
            )
            d_conv = d_conv + d_m
        elif cfg.pool_mode == "max":
            d_conv = d_conv + max_pool_window_backward(conv, d_pooled[x], w)
        else:
            d_conv = d_conv + avg_pool_window_backward(d_pooled[x], w)
        d_convs[x] = d_conv

    if cfg.attention:
        n = convs["q"].shape[1]
        d_p_qt, d_p_qa = pooling_weights_backward(
            n, d_weights["t"], d_weights["q"], d_weights.get("a")
        )
        d_t, d_q = attention_matrix_backward(convs["t"], convs["q"], d_p_qt)
        d_convs["t"] = d_convs["t"] + d_t
        d_convs["q"] = d_convs["q"] + d_q
        if d_p_qa is not None:
            d_q, d_a = attention_matrix_backward(convs["q"], convs["a"], d_p_qa)
            d_convs["q"] = d_convs["q"] + d_q
            d_convs["a"] = d_convs["a"] + d_a

    d_filter = np.zeros_like(filt)
    d_bias = np.zeros(filt.shape[0], dtype=np.float64)
    d_reps: Dict[str, Mat] = {}
    d_extra: Dict[str, list] = {}
    d_in = reps["q"].shape[0]
    for x in convs:
        d_input, d_f, d_b = wide_conv_backward(inputs[x], filt, convs[x], d_convs[x], w)
        d_filter += d_f
        d_bias += d_b
        d_reps[x] = d_input[:d_in]
        d_extra[x] = [
            d_input[k * d_in:(k + 1) * d_in] for k in range(1, cfg.channels)
        ]

    grads = {block_key(block, "filter"): d_filter, block_key(block, "bias"): d_bias}
    if cfg.attention:
        w_grads: Dict[str, Mat] = {}
        d_a_qt, d_a_qa = _attention_maps_backward(d_extra, cache, cfg, w_grads)
        for name, g in w_grads.items():
            grads[block_key(block, name)] = g
        d_t, d_q = attention_matrix_backward(reps["t"], reps["q"], d_a_qt)
        d_reps["t"] = d_reps["t"] + d_t
        d_reps["q"] = d_reps["q"] + d_q
        if d_a_qa is not None:
            d_q, d_a = attention_matrix_backward(reps["q"], reps["a"], d_a_qa)
            d_reps["q"] = d_reps["q"] + d_q
            d_reps["a"] = d_reps["a"] + d_a
    return d_reps, grads
