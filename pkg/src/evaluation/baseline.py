#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
WordAverage baseline: cosine of mean word embeddings.
"""

from typing import Sequence

import numpy as np

from ..common.numerics import cosine
from ..retrieval.knowledge_base import KnowledgeEntry
from ..text.tokenizer import WHITESPACE, tokenize
from ..text.vocabulary import UNK_ID, Vocabulary


def sentence_vector(ids: Sequence[int], embeddings: np.ndarray) -> np.ndarray:
    """
    Mean embedding of the known tokens.

    PAD and UNK ids carry no meaning and are skipped.

    Returns:
        Vector of length l; zero when no id is known
    """
    known = [i for i in ids if i > UNK_ID]
    if not known:
        return np.zeros(embeddings.shape[0], dtype=np.float64)
    return embeddings[:, known].mean(axis=1)


def word_average_score(
    query_ids: Sequence[int],
    title_ids: Sequence[int],
    answer_ids: Sequence[int],
    embeddings: np.ndarray
) -> float:
    """
    WordAverage similarity of a query and a knowledge entry.

    Args:
        query_ids: Query token ids
        title_ids: Title token ids
        answer_ids: Answer token ids
        embeddings: The l×V embedding table

    Returns:
        (cosine(query vector, mean of title and answer vectors) + 1) / 2, in [0, 1]
    """
    q = sentence_vector(query_ids, embeddings)
    entry = (sentence_vector(title_ids, embeddings) + sentence_vector(answer_ids, embeddings)) / 2.0
    return (cosine(q, entry) + 1.0) / 2.0


class WordAverageBaseline:
    """Scores (query, entry) pairs with the WordAverage baseline."""

    name = "WordAverage"

    def __init__(self, embeddings: np.ndarray, vocab: Vocabulary, tokenizer: str = WHITESPACE):
        """
        Initialize the baseline.

        Args:
            embeddings: The l×V embedding table (e.g. a trained model's)
            vocab: Vocabulary of the table
            tokenizer: Tokenizer mode
        """
        self.embeddings = embeddings
        self.vocab = vocab
        self.tokenizer = tokenizer

    def _ids(self, text: str):
        return [self.vocab.lookup(t) for t in tokenize(text, self.tokenizer)]

    def score_pair(self, query: str, entry: KnowledgeEntry) -> float:
        return word_average_score(
            self._ids(query), self._ids(entry.title), self._ids(entry.answer), self.embeddings
        )
