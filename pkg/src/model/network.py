#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Scoring and gradients of the triple-tower matching models.

The embedded query, title and answer run through L blocks; the sentence
vectors of every level (level 0 = embeddings) give the cosine features
[cos(v_q, v_t), cos(v_q, v_a)] fed to a logistic-regression output layer.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..common.errors import ArgumentError, NumericError
from ..common.numerics import cosine, cosine_backward, sigmoid
from ..retrieval.knowledge_base import KnowledgeEntry
from ..text.embeddings import embed, embed_backward
from ..text.tokenizer import tokenize
from ..text.vocabulary import PAD_ID, Vocabulary, encode
from ..train.loss import bce_logit_gradient, bce_with_logits
from .blocks import BlockOutput, block_backward, block_forward, pool_all, pool_all_backward
from .config import EMBEDDINGS, OUTPUT_BIAS, OUTPUT_WEIGHTS, ModelConfig, ModelParams

# One labeled example: (query ids, title ids, answer ids, label).
Example = Tuple[Sequence[int], Sequence[int], Optional[Sequence[int]], int]


@dataclass
class Forward:
    """Everything the backward pass needs from one forward pass."""

    ids: Dict[str, Sequence[int]]
    embedded: Dict[str, np.ndarray]
    levels: List[Dict[str, np.ndarray]]
    blocks: List[BlockOutput]
    features: np.ndarray
    logit: float
    probability: float


def _feature_pairs(cfg: ModelConfig) -> List[Tuple[str, str]]:
    return [("q", "t"), ("q", "a")] if cfg.use_answer else [("q", "t")]


def forward(
    q_ids: Sequence[int],
    t_ids: Sequence[int],
    a_ids: Optional[Sequence[int]],
    params: ModelParams,
    cfg: ModelConfig
) -> Forward:
    """
    Full forward pass for one (query, title, answer) triple.

    Args:
        q_ids: Query ids of length s
        t_ids: Title ids of length s
        a_ids: Answer ids of length s (ignored in two-tower mode)
        params: Model parameters
        cfg: Model configuration

    Returns:
        The Forward record, including the score
    """
    ids: Dict[str, Sequence[int]] = {"q": q_ids, "t": t_ids}
    if cfg.use_answer:
        if a_ids is None:
            raise ArgumentError("answer ids are required when use_answer is set")
        ids["a"] = a_ids
    table = params[EMBEDDINGS]
    embedded = {x: embed(seq, table) for x, seq in ids.items()}
    levels = [{x: pool_all(m, cfg.pool_mode) for x, m in embedded.items()}]
    blocks: List[BlockOutput] = []
    reps = embedded
    for b in range(1, cfg.blocks + 1):
        out = block_forward(reps, params, b, cfg)
        blocks.append(out)
        levels.append(out.vectors)
        reps = out.pooled

    features = np.array([
        cosine(level[first], level[second])
        for level in levels
        for first, second in _feature_pairs(cfg)
    ])
    logit = float(params[OUTPUT_WEIGHTS] @ features + params[OUTPUT_BIAS][0])
    return Forward(ids, embedded, levels, blocks, features, logit, sigmoid(logit))


def score(
    q_ids: Sequence[int],
    t_ids: Sequence[int],
    a_ids: Optional[Sequence[int]],
    params: ModelParams,
    cfg: ModelConfig
) -> float:
    """
    Normalized similarity of a (query, title, answer) triple.

    Returns:
        Probability in (0, 1)
    """
    return forward(q_ids, t_ids, a_ids, params, cfg).probability


def backward(fwd: Forward, d_logit: float, params: ModelParams, cfg: ModelConfig) -> Dict[str, np.ndarray]:
    """
    Gradients of every parameter given the loss gradient at the logit.

    Args:
        fwd: Forward record of the example
        d_logit: dLoss/dz
        params: Model parameters
        cfg: Model configuration

    Returns:
        Mapping of tensor name to gradient (PAD embedding column zero)
    """
    grads: Dict[str, np.ndarray] = {
        OUTPUT_WEIGHTS: d_logit * fwd.features,
        OUTPUT_BIAS: np.array([d_logit]),
    }
    d_features = d_logit * params[OUTPUT_WEIGHTS]

    pairs = _feature_pairs(cfg)
    d_levels: List[Dict[str, np.ndarray]] = []
    k = 0
    for level in fwd.levels:
        d_level = {x: np.zeros_like(v) for x, v in level.items()}
        for first, second in pairs:
            d_u, d_v = cosine_backward(level[first], level[second], d_features[k])
            d_level[first] += d_u
            d_level[second] += d_v
            k += 1
        d_levels.append(d_level)

    d_reps: Optional[Dict[str, np.ndarray]] = None
    for b in range(cfg.blocks, 0, -1):
        out = fwd.blocks[b - 1]
        d_pooled = d_reps if d_reps is not None else {
            x: np.zeros_like(p) for x, p in out.pooled.items()
        }
        d_reps, block_grads = block_backward(d_pooled, d_levels[b], out, params, b, cfg)
        grads.update(block_grads)

    vocab_size = params.vocab_size
    d_table = np.zeros_like(params[EMBEDDINGS])
    for x, m in fwd.embedded.items():
        d_embedded = d_reps[x] + pool_all_backward(m, d_levels[0][x], cfg.pool_mode)
        d_table += embed_backward(fwd.ids[x], d_embedded, vocab_size)
    grads[EMBEDDINGS] = d_table
    return grads


def l2_penalty(params: ModelParams) -> float:
    """Sum of squares of every parameter, PAD embedding column excluded."""
    total = 0.0
    for name, tensor in params.items():
        if name == EMBEDDINGS:
            total += float(np.sum(tensor[:, PAD_ID + 1:] ** 2))
        else:
            total += float(np.sum(tensor ** 2))
    return total


def batch_loss(
    batch: Sequence[Example],
    params: ModelParams,
    cfg: ModelConfig,
    l2: float = 0.0,
    pos_weight: float = 1.0
) -> float:
    """Mean weighted BCE plus λ‖params‖², forward pass only."""
    if not batch:
        raise ArgumentError("cannot compute the loss of an empty batch")
    total = sum(
        bce_with_logits(forward(q, t, a, params, cfg).logit, y, pos_weight)
        for q, t, a, y in batch
    )
    return total / len(batch) + l2 * l2_penalty(params)


def gradients(
    batch: Sequence[Example],
    params: ModelParams,
    cfg: ModelConfig,
    l2: float = 0.0,
    pos_weight: float = 1.0
) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Exact gradients of the mean weighted BCE plus λ‖params‖².

    Args:
        batch: Examples (q_ids, t_ids, a_ids, y)
        params: Model parameters
        cfg: Model configuration
        l2: Regularization strength λ
        pos_weight: Positive-class weight of the loss

    Returns:
        Tuple (gradient per tensor name, mean loss)

    Raises:
        ArgumentError: On an empty batch or a non-binary label
    """
    if not batch:
        raise ArgumentError("cannot compute gradients of an empty batch")
    grads = {name: np.zeros_like(t) for name, t in params.items()}
    total = 0.0
    for q_ids, t_ids, a_ids, y in batch:
        if y not in (0, 1):
            raise ArgumentError(f"labels must be 0 or 1, got {y}")
        fwd = forward(q_ids, t_ids, a_ids, params, cfg)
        total += bce_with_logits(fwd.logit, y, pos_weight)
        d_logit = bce_logit_gradient(fwd.probability, y, pos_weight)
        for name, g in backward(fwd, d_logit, params, cfg).items():
            grads[name] += g

    n = len(batch)
    loss = total / n
    for name in grads:
        grads[name] /= n
        if l2:
            grads[name] += 2.0 * l2 * params[name]
    grads[EMBEDDINGS][:, PAD_ID] = 0.0
    if l2:
        loss += l2 * l2_penalty(params)
    if not np.isfinite(loss):
        raise NumericError("loss is not finite")
    return grads, loss


class Matcher:
    """Scores (query, knowledge entry) pairs with a trained matching model."""

    def __init__(self, params: ModelParams, cfg: ModelConfig, vocab: Vocabulary):
        """
        Initialize the matcher.

        Args:
            params: Trained parameters
            cfg: Model configuration
            vocab: Vocabulary the parameters were trained with
        """
        params.check_shapes(cfg)
        self.params = params
        self.cfg = cfg
        self.vocab = vocab
        self.name = cfg.variant.upper()

    def encode_text(self, text: str) -> List[int]:
        """Tokenize and encode text to s ids."""
        return encode(tokenize(text, self.cfg.tokenizer), self.vocab, self.cfg.seq_len)

    def encode_triple(self, query: str, entry: KnowledgeEntry) -> Tuple[List[int], List[int], List[int]]:
        return self.encode_text(query), self.encode_text(entry.title), self.encode_text(entry.answer)

    def score_ids(self, q_ids: Sequence[int], t_ids: Sequence[int], a_ids: Sequence[int]) -> float:
        return score(q_ids, t_ids, a_ids, self.params, self.cfg)

    def score_pair(self, query: str, entry: KnowledgeEntry) -> float:
        """
        Score a query against one knowledge entry.

        Args:
            query: Query text
            entry: Knowledge entry (title and answer)

        Returns:
            Normalized similarity in (0, 1)
        """
        return self.score_ids(*self.encode_triple(query, entry))
