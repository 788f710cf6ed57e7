#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Basic flow test for the TCNN matching engine.

This test verifies that generating data, indexing, training, saving,
reloading and evaluating work together as expected.
"""

import pytest

from src.data.dataset import load_dataset, split
from src.data.synthetic import SyntheticFaqGenerator, generate_synthetic
from src.evaluation.baseline import WordAverageBaseline
from src.evaluation.metrics import format_table, threshold_sweep
from src.evaluation.ranking import build_ranked_queries, rank_candidates
from src.model.config import EMBEDDINGS, VARIANTS, ModelConfig
from src.retrieval.bm25 import Bm25Index
from src.retrieval.knowledge_base import KnowledgeBase
from src.train.checkpoint import load_checkpoint, save_checkpoint
from src.train.trainer import TrainConfig, Trainer, build_vocabulary


@pytest.mark.parametrize("variant", ["tcnn", "atcnn1", "atcnn2"])
def test_end_to_end_flow(tmp_path, variant):
    """Test the synthetic corpus through training to a rendered report."""
    # Generate a small corpus and split it
    corpus = SyntheticFaqGenerator(11).generate(20, 30)
    parts = split(corpus.triples, seed=11)

    # Index the knowledge base
    index = Bm25Index.build(corpus.kb)
    assert index.document_count == 20

    # Train a small model for a couple of epochs
    cfg = ModelConfig(variant=variant, seq_len=10, embed_dim=8, window=2, filters=6, blocks=2, seed=1)
    tcfg = TrainConfig(max_epochs=2, patience=2, batch_size=8, seed=1)
    vocab = build_vocabulary(corpus.kb, parts.train, cfg.tokenizer)
    trainer = Trainer(corpus.kb, vocab, cfg, tcfg, index=index)
    ckpt, history = trainer.fit(parts.train, parts.valid)
    assert len(history) == 2
    assert ckpt.kb_hash == index.vocab_hash

    # Save and reload the checkpoint
    path = tmp_path / f"{variant}.ckpt"
    save_checkpoint(ckpt, str(path))
    loaded = load_checkpoint(str(path))
    matcher = loaded.matcher()

    # Evaluate the model and the baseline on the test split
    reports = []
    for scorer in (matcher, WordAverageBaseline(loaded.params[EMBEDDINGS], loaded.vocab)):
        ranked = build_ranked_queries(parts.test, scorer, corpus.kb, index, k=5)
        assert ranked
        reports.append(threshold_sweep(ranked, step=0.05, method=scorer.name))
    for report in reports:
        assert 0.0 <= report.selected.f1 <= 1.0
    table = format_table(reports)
    assert variant.upper() in table
    assert "WordAverage" in table

    # Answer one question with the reloaded model
    entry = next(iter(corpus.kb))
    ids = [kb_id for kb_id, _ in index.search(entry.title, 5)]
    result = rank_candidates(entry.title, ids, matcher, corpus.kb)
    assert entry.id in {c.kb_id for c in result.candidates}
    assert all(0.0 < c.score < 1.0 for c in result.candidates)


@pytest.mark.slow
@pytest.mark.parametrize("variant", VARIANTS)
def test_default_models_beat_word_average(tmp_path, variant):
    """Test default configurations on the 500-entry synthetic corpus."""
    # Generate the corpus and split it
    kb_path, data_path = generate_synthetic(42, 500, 300, str(tmp_path))
    kb = KnowledgeBase.load(kb_path)
    parts = split(load_dataset(data_path, kb), seed=42)
    index = Bm25Index.build(kb)

    # Train with the default model and training settings
    cfg = ModelConfig(variant=variant)
    vocab = build_vocabulary(kb, parts.train, cfg.tokenizer)
    ckpt, _ = Trainer(kb, vocab, cfg, TrainConfig(), index=index).fit(parts.train, parts.valid)

    # Compare against the baseline on the same trained embeddings
    model_f1, baseline_f1 = (
        threshold_sweep(build_ranked_queries(parts.test, scorer, kb, index), method=scorer.name).selected.f1
        for scorer in (ckpt.matcher(), WordAverageBaseline(ckpt.params[EMBEDDINGS], ckpt.vocab))
    )
    assert model_f1 >= 0.80
    assert model_f1 > baseline_f1
