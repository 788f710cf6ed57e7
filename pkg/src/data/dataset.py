#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Labeled dataset handling for the TCNN matching engine.

This module loads and saves (query, kb_id, label) triples as JSON lines and
partitions them into 60/20/20 train/validation/test splits.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np

from ..common.errors import ArgumentError, DataError, ParseError
from ..retrieval.knowledge_base import KnowledgeBase


@dataclass(frozen=True)
class LabeledTriple:
    """Supervision record: a query, a knowledge id and a 0/1 relatedness label."""

    query: str
    kb_id: str
    label: int


@dataclass
class Splits:
    """Disjoint train/validation/test partitions of a dataset."""

    train: List[LabeledTriple]
    valid: List[LabeledTriple]
    test: List[LabeledTriple]
    seed: int


def load_dataset(path: str, kb: KnowledgeBase) -> List[LabeledTriple]:
    """
    Load labeled triples from a JSON-lines file.

    Args:
        path: Path to the dataset file (keys query, kb_id, label)
        kb: Knowledge base the kb_ids must resolve in

    Returns:
        Triples in file order

    Raises:
        ParseError: On a malformed line or a non-binary label (with line number)
        DataError: On a kb_id missing from the knowledge base
    """
    triples: List[LabeledTriple] = []
    with open(Path(path), 'r', encoding='utf-8') as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                query = record["query"]
                kb_id = str(record["kb_id"])
                label = record["label"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise ParseError(f"malformed triple: {e}", line=number)
            if not isinstance(query, str):
                raise ParseError("query must be a string", line=number)
            if isinstance(label, bool) or label not in (0, 1):
                raise ParseError(f"label must be 0 or 1, got {label!r}", line=number)
            if not kb.has(kb_id):
                raise DataError(f"line {number}: unknown knowledge id: {kb_id}")
            triples.append(LabeledTriple(query=query, kb_id=kb_id, label=int(label)))
    return triples


def save_dataset(triples: Sequence[LabeledTriple], path: str) -> None:
    """
    Write triples as JSON lines.

    Args:
        triples: Triples to write
        path: Output path
    """
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding='utf-8', newline='\n') as f:
        for t in triples:
            record = {"query": t.query, "kb_id": t.kb_id, "label": t.label}
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def split(triples: Sequence[LabeledTriple], seed: int) -> Splits:
    """
    Seeded 60/20/20 partition.

    Args:
        triples: At least 5 triples
        seed: Shuffle seed

    Returns:
        The splits; deterministic per seed

    Raises:
        ArgumentError: If there are fewer than 5 triples
    """
    n = len(triples)
    if n < 5:
        raise ArgumentError(f"need at least 5 triples to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [triples[int(i)] for i in order]
    n_train = int(round(0.6 * n))
    n_valid = int(round(0.2 * n))
    return Splits(
        train=shuffled[:n_train],
        valid=shuffled[n_train:n_train + n_valid],
        test=shuffled[n_train + n_valid:],
        seed=seed,
    )
