#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
BM25 candidate retrieval over the knowledge base.

Titles and answers are indexed as separate fields; a document's score is
the field-weighted sum of per-field BM25 scores. The index is immutable
after build, so concurrent searches are safe.
"""

import json
import logging
import math
from collections import Counter, defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from ..common.errors import ArgumentError, DataError, ParseError
from ..text.tokenizer import WHITESPACE, tokenize
from .knowledge_base import KnowledgeEntry, kb_vocabulary_hash

FIELDS = ("title", "answer")
DEFAULT_FIELD_WEIGHTS = {"title": 2.0, "answer": 1.0}
DEFAULT_K = 15


def bm25_idf(n_docs: int, df: int) -> float:
    """Non-negative BM25 idf: ln(1 + (N - df + 0.5) / (df + 0.5))."""
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def bm25_tf(tf: int, length: int, avg_length: float, k1: float, b: float) -> float:
    """Saturated, length-normalized term frequency."""
    return tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * length / avg_length))


class Bm25Index:
    """Fielded BM25 inverted index."""

    def __init__(
        self,
        k1: float = 1.2,
        b: float = 0.75,
        field_weights: Optional[Dict[str, float]] = None,
        tokenizer: str = WHITESPACE
    ):
        """
        Initialize an empty index.

        Args:
            k1: Term-frequency saturation
            b: Length normalization strength
            field_weights: Weight of the title and answer fields
            tokenizer: Tokenizer mode used for documents and queries
        """
        self.k1 = k1
        self.b = b
        self.field_weights = dict(field_weights or DEFAULT_FIELD_WEIGHTS)
        self.tokenizer = tokenizer
        self.doc_ids: List[str] = []
        self.postings: Dict[str, List[Tuple[int, str, int]]] = {}
        self.field_lengths: Dict[str, List[int]] = {f: [] for f in FIELDS}
        self.avg_lengths: Dict[str, float] = {f: 0.0 for f in FIELDS}
        self.vocab_hash = ""
        self._df: Dict[Tuple[str, str], int] = {}

    @classmethod
    def build(
        cls,
        entries: Iterable[KnowledgeEntry],
        tokenizer: str = WHITESPACE,
        k1: float = 1.2,
        b: float = 0.75,
        field_weights: Optional[Dict[str, float]] = None
    ) -> "Bm25Index":
        """
        Build the index.

        Args:
            entries: Knowledge entries with unique ids
            tokenizer: Tokenizer mode
            k1: Term-frequency saturation
            b: Length normalization strength
            field_weights: Weight of the title and answer fields

        Returns:
            The built index

        Raises:
            DataError: On a duplicate id
        """
        index = cls(k1=k1, b=b, field_weights=field_weights, tokenizer=tokenizer)
        entries = list(entries)
        seen = set()
        postings: Dict[str, List[Tuple[int, str, int]]] = defaultdict(list)
        for doc, entry in enumerate(entries):
            if entry.id in seen:
                raise DataError(f"duplicate knowledge id: {entry.id}")
            seen.add(entry.id)
            index.doc_ids.append(entry.id)
            for field in FIELDS:
                tokens = tokenize(getattr(entry, field), tokenizer)
                index.field_lengths[field].append(len(tokens))
                for term, tf in Counter(tokens).items():
                    postings[term].append((doc, field, tf))
        index.postings = dict(postings)
        index.vocab_hash = kb_vocabulary_hash(entries, tokenizer)
        index._finalize()
        logging.info(f"Indexed {index.document_count} documents, {index.term_count} terms")
        return index

    def _finalize(self) -> None:
        n = len(self.doc_ids)
        for field in FIELDS:
            self.avg_lengths[field] = sum(self.field_lengths[field]) / n if n else 0.0
        self._df = Counter(
            (term, field) for term, plist in self.postings.items() for _, field, _ in plist
        )

    @property
    def document_count(self) -> int:
        return len(self.doc_ids)

    @property
    def term_count(self) -> int:
        return len(self.postings)

    def search(self, query: str, k: int = DEFAULT_K) -> List[Tuple[str, float]]:
        """
        Rank documents for a query.

        Args:
            query: Query text
            k: Maximum number of results, >= 1

        Returns:
            Up to k (id, score) pairs by descending score, ties by ascending id;
            empty when no query token is indexed

        Raises:
            ArgumentError: If k < 1
        """
        if k < 1:
            raise ArgumentError(f"k must be >= 1, got {k}")
        n = len(self.doc_ids)
        scores: Dict[int, float] = defaultdict(float)
        for term in tokenize(query, self.tokenizer):
            for doc, field, tf in self.postings.get(term, ()):
                weight = self.field_weights.get(field, 0.0)
                if weight == 0.0:
                    continue
                idf = bm25_idf(n, self._df[(term, field)])
                length = self.field_lengths[field][doc]
                scores[doc] += weight * idf * bm25_tf(
                    tf, length, self.avg_lengths[field], self.k1, self.b
                )
        ranked = sorted(
            ((self.doc_ids[doc], s) for doc, s in scores.items()),
            key=lambda item: (-item[1], item[0])
        )
        return ranked[:k]

    def to_dict(self) -> Dict:
        return {
            "k1": self.k1,
            "b": self.b,
            "field_weights": self.field_weights,
            "tokenizer": self.tokenizer,
            "vocab_hash": self.vocab_hash,
            "doc_ids": self.doc_ids,
            "field_lengths": self.field_lengths,
            "postings": {t: [list(p) for p in plist] for t, plist in self.postings.items()},
        }

    def save(self, path: str) -> None:
        """
        Save as canonical JSON; identical indexes produce identical bytes.

        Args:
            path: Output path
        """
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
            f.write("\n")

    @classmethod
    def load(cls, path: str) -> "Bm25Index":
        """
        Load an index written by save().

        Args:
            path: Path to the index file

        Returns:
            The loaded index

        Raises:
            ParseError: If the file is not a valid index
        """
        with open(Path(path), 'r', encoding='utf-8') as f:
            try:
                data = json.load(f)
                index = cls(
                    k1=float(data["k1"]),
                    b=float(data["b"]),
                    field_weights={k: float(v) for k, v in data["field_weights"].items()},
                    tokenizer=data["tokenizer"],
                )
                index.vocab_hash = data["vocab_hash"]
                index.doc_ids = list(data["doc_ids"])
                index.field_lengths = {f: list(data["field_lengths"][f]) for f in FIELDS}
                index.postings = {
                    t: [(int(d), str(fl), int(tf)) for d, fl, tf in plist]
                    for t, plist in data["postings"].items()
                }
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise ParseError(f"not a valid index file {path}: {e}")
        index._finalize()
        return index
