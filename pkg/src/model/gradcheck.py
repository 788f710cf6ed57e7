#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Finite-difference check of the analytic model gradients.

A small random model (all tensors randomized, biases and output layer
included) is evaluated on random batches; every parameter group's analytic
gradient is compared with central differences of the loss.
"""

import logging
from dataclasses import replace
from typing import Dict, List, Optional

import numpy as np

from ..common.numerics import finite_diff_gradient, relative_error
from ..text.vocabulary import PAD_ID
from .config import EMBEDDINGS, ModelConfig, ModelParams
from .network import Example, batch_loss, gradients

TOLERANCE = 1e-4


def small_config(variant: str, seed: int = 0, **overrides) -> ModelConfig:
    """The s=7, l=8, d=6, w=3, L=2 configuration used for gradient checks."""
    cfg = ModelConfig(
        variant=variant, seq_len=7, embed_dim=8, window=3, filters=6, blocks=2, seed=seed
    )
    return replace(cfg, **overrides).validate()


def random_params(cfg: ModelConfig, vocab_size: int, rng: np.random.Generator) -> ModelParams:
    """Initialized parameters with biases and output layer randomized too."""
    params = ModelParams.initialize(cfg, vocab_size)
    for name, tensor in params.items():
        if name != EMBEDDINGS and tensor.ndim == 1:
            tensor[:] = rng.uniform(-0.5, 0.5, size=tensor.shape)
    params[EMBEDDINGS][:, PAD_ID + 1:] = rng.uniform(
        -0.5, 0.5, size=(cfg.embed_dim, vocab_size - 1)
    )
    return params


def random_batch(
    cfg: ModelConfig,
    vocab_size: int,
    size: int,
    rng: np.random.Generator
) -> List[Example]:
    """Random examples whose sequences end in PAD runs of random length."""
    batch: List[Example] = []
    for _ in range(size):
        seqs = []
        for _ in range(3):
            length = int(rng.integers(1, cfg.seq_len + 1))
            ids = list(rng.integers(1, vocab_size, size=length)) + [PAD_ID] * (cfg.seq_len - length)
            seqs.append([int(i) for i in ids])
        batch.append((seqs[0], seqs[1], seqs[2] if cfg.use_answer else None, int(rng.integers(0, 2))))
    return batch


def _numeric_entries(loss, tensor: np.ndarray, indices, epsilon: float) -> np.ndarray:
    values = np.zeros(len(indices))
    for k, idx in enumerate(indices):
        original = tensor[idx]
        tensor[idx] = original + epsilon
        upper = loss()
        tensor[idx] = original - epsilon
        lower = loss()
        tensor[idx] = original
        values[k] = (upper - lower) / (2.0 * epsilon)
    return values


def check_gradients(
    cfg: ModelConfig,
    batch_count: int = 3,
    batch_size: int = 4,
    vocab_size: int = 12,
    seed: int = 0,
    epsilon: float = 1e-5,
    l2: float = 1e-3,
    pos_weight: float = 1.5,
    max_entries: Optional[int] = None
) -> Dict[str, float]:
    """
    Compare analytic and numeric gradients for every parameter group.

    Args:
        cfg: Model configuration (keep it small)
        batch_count: Number of random batches
        batch_size: Examples per batch
        vocab_size: Size of the random vocabulary
        seed: Seed of the random model and batches
        epsilon: Finite-difference step
        l2: Regularization strength included in the loss
        pos_weight: Positive-class weight included in the loss
        max_entries: Check at most this many random entries per tensor
            (None checks every entry)

    Returns:
        Mapping of tensor name to the max relative error over all batches
    """
    rng = np.random.default_rng(seed)
    params = random_params(cfg, vocab_size, rng)
    errors: Dict[str, float] = {name: 0.0 for name in params}

    for batch_index in range(batch_count):
        batch = random_batch(cfg, vocab_size, batch_size, rng)
        analytic, _ = gradients(batch, params, cfg, l2=l2, pos_weight=pos_weight)

        def loss() -> float:
            return batch_loss(batch, params, cfg, l2=l2, pos_weight=pos_weight)

        for name, tensor in params.items():
            target = tensor[:, PAD_ID + 1:] if name == EMBEDDINGS else tensor
            expected = analytic[name][:, PAD_ID + 1:] if name == EMBEDDINGS else analytic[name]
            if max_entries is None:
                def loss_of(x: np.ndarray) -> float:
                    saved = target.copy()
                    target[...] = x
                    try:
                        return loss()
                    finally:
                        target[...] = saved
                numeric = finite_diff_gradient(loss_of, target, epsilon)
                err = relative_error(expected, numeric)
            else:
                all_indices = list(np.ndindex(target.shape))
                picks = rng.choice(len(all_indices), size=min(max_entries, len(all_indices)), replace=False)
                indices = [all_indices[int(p)] for p in picks]
                numeric = _numeric_entries(loss, target, indices, epsilon)
                err = relative_error(np.array([expected[idx] for idx in indices]), numeric)
            errors[name] = max(errors[name], err)
        logging.debug(f"Gradient check batch {batch_index + 1}/{batch_count} done")
    return errors
