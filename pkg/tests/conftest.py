#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Shared fixtures for the TCNN matching engine tests.
"""

import pytest

from src.data.dataset import LabeledTriple
from src.model.config import ModelConfig
from src.retrieval.knowledge_base import KnowledgeBase, KnowledgeEntry
from src.text.tokenizer import tokenize
from src.text.vocabulary import Vocabulary


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: training or gradient checks at full size")


@pytest.fixture
def tiny_kb():
    """Four FAQ entries."""
    return KnowledgeBase([
        KnowledgeEntry("kb1", "how to cancel my order", "open the order center and tap cancel"),
        KnowledgeEntry("kb2", "track my parcel from abroad", "the logistics page shows the parcel status"),
        KnowledgeEntry("kb3", "reset my password", "use the security settings to reset the password"),
        KnowledgeEntry("kb4", "apply a coupon at checkout", "enter the coupon code on the payment page"),
    ])


@pytest.fixture
def tiny_triples():
    return [
        LabeledTriple("cancel order", "kb1", 1),
        LabeledTriple("where is my parcel", "kb2", 1),
        LabeledTriple("cancel order", "kb4", 0),
        LabeledTriple("forgot password", "kb3", 1),
        LabeledTriple("coupon not working", "kb1", 0),
    ]


@pytest.fixture
def tiny_vocab(tiny_kb, tiny_triples):
    sequences = [tokenize(e.title) for e in tiny_kb] + [tokenize(e.answer) for e in tiny_kb]
    sequences += [tokenize(t.query) for t in tiny_triples]
    return Vocabulary.build(sequences)


@pytest.fixture
def small_model_config():
    """Factory for small, fast model configurations."""
    def make(variant="tcnn", **overrides):
        values = dict(
            variant=variant, seq_len=6, embed_dim=8, window=2, filters=5, blocks=2, seed=3
        )
        values.update(overrides)
        return ModelConfig(**values).validate()
    return make
