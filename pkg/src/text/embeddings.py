#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Word embeddings for the TCNN matching engine.

The embedding table is an l×V matrix whose columns are word vectors.
Column 0 belongs to PAD and is always zero.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..common.errors import ShapeError
from .vocabulary import PAD_ID, Vocabulary


def init_embeddings(
    vocab_size: int,
    dim: int,
    rng: np.random.Generator,
    scale: float = 0.1
) -> np.ndarray:
    """
    Create a random embedding table.

    Args:
        vocab_size: Number of columns V
        dim: Embedding dimension l
        rng: Seeded generator
        scale: Entries are uniform in ±scale

    Returns:
        The l×V table with a zero PAD column
    """
    table = rng.uniform(-scale, scale, size=(dim, vocab_size))
    table[:, PAD_ID] = 0.0
    return table


def load_pretrained(
    path: str,
    vocab: Vocabulary,
    dim: int,
    rng: np.random.Generator
) -> np.ndarray:
    """
    Build an embedding table from a "token v1 v2 ... vl" text file.

    Tokens missing from the file (UNK included) keep their random vectors;
    lines with the wrong dimension are skipped with a warning.

    Args:
        path: Path to the pretrained vector file
        vocab: Vocabulary to fill
        dim: Embedding dimension l
        rng: Seeded generator for the missing vectors

    Returns:
        The l×V table
    """
    table = init_embeddings(len(vocab), dim, rng)
    found = 0
    with open(Path(path), 'r', encoding='utf-8') as f:
        for number, line in enumerate(f, start=1):
            parts = line.rstrip().split(" ")
            if len(parts) < 2:
                continue
            token = parts[0]
            if token not in vocab or vocab.lookup(token) == PAD_ID:
                continue
            if len(parts) - 1 != dim:
                logging.warning(
                    f"Skipping pretrained vector on line {number}: "
                    f"dimension {len(parts) - 1}, expected {dim}"
                )
                continue
            table[:, vocab.lookup(token)] = np.array(parts[1:], dtype=np.float64)
            found += 1
    logging.info(f"Loaded {found} pretrained vectors for {len(vocab)} vocabulary entries")
    return table


def embed(ids: Sequence[int], table: np.ndarray) -> np.ndarray:
    """
    Look up the embedding columns of an id sequence.

    Args:
        ids: Id sequence of length s
        table: The l×V embedding table

    Returns:
        The l×s feature map
    """
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[1]):
        raise IndexError(f"token id out of range for a vocabulary of {table.shape[1]}")
    return table[:, ids]


def embed_backward(ids: Sequence[int], grad: np.ndarray, vocab_size: int) -> np.ndarray:
    """
    Scatter a feature-map gradient back onto the embedding table.

    Args:
        ids: Id sequence used in the forward pass
        grad: Gradient of the l×s feature map
        vocab_size: Number of table columns V

    Returns:
        The l×V table gradient; the PAD column is zero
    """
    ids = np.asarray(ids, dtype=np.int64)
    if grad.shape[1] != ids.size:
        raise ShapeError(f"gradient {grad.shape} for {ids.size} ids")
    d_table = np.zeros((grad.shape[0], vocab_size), dtype=np.float64)
    np.add.at(d_table.T, ids, grad.T)
    d_table[:, PAD_ID] = 0.0
    return d_table
