#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for labeled datasets, splits and the synthetic FAQ generator.
"""

import pytest

from src.common.errors import ArgumentError, DataError, ParseError
from src.data.dataset import LabeledTriple, load_dataset, save_dataset, split
from src.data.synthetic import DATASET_FILE, KB_FILE, SyntheticFaqGenerator, generate_synthetic
from src.retrieval.knowledge_base import KnowledgeBase


def test_dataset_save_load(tmp_path, tiny_kb, tiny_triples):
    path = tmp_path / "data.jsonl"
    save_dataset(tiny_triples, str(path))
    with open(path, "a", encoding="utf-8") as f:
        f.write("\n")
    assert load_dataset(str(path), tiny_kb) == tiny_triples


@pytest.mark.parametrize("line, error", [
    ('{"query": "q", "kb_id": "kb1"', ParseError),
    ('{"query": "q", "label": 1}', ParseError),
    ('{"query": "q", "kb_id": "kb1", "label": 2}', ParseError),
    ('{"query": "q", "kb_id": "kb1", "label": true}', ParseError),
    ('{"query": 5, "kb_id": "kb1", "label": 1}', ParseError),
    ('{"query": "q", "kb_id": "kb9", "label": 1}', DataError),
])
def test_load_dataset_rejects_bad_records(tmp_path, tiny_kb, line, error):
    path = tmp_path / "data.jsonl"
    path.write_text('{"query": "ok", "kb_id": "kb2", "label": 0}\n' + line + "\n", encoding="utf-8")
    with pytest.raises(error) as info:
        load_dataset(str(path), tiny_kb)
    assert "line 2" in str(info.value)


def test_split_partitions_deterministically():
    triples = [LabeledTriple(f"q{i}", "kb1", i % 2) for i in range(10)]
    parts = split(triples, seed=3)
    assert (len(parts.train), len(parts.valid), len(parts.test)) == (6, 2, 2)
    assert sorted(parts.train + parts.valid + parts.test, key=lambda t: t.query) == sorted(
        triples, key=lambda t: t.query
    )
    assert split(triples, seed=3) == parts
    assert split(triples, seed=4).train != parts.train

    five = split(triples[:5], seed=0)
    assert (len(five.train), len(five.valid), len(five.test)) == (3, 1, 1)
    with pytest.raises(ArgumentError):
        split(triples[:4], seed=0)


def test_synthetic_corpus_shape_and_determinism():
    corpus = SyntheticFaqGenerator(42).generate(30, 20)
    assert len(corpus.kb) == 30
    assert len(corpus.triples) == 20
    assert sum(t.label for t in corpus.triples) == 10
    assert all(corpus.kb.has(t.kb_id) for t in corpus.triples)

    again = SyntheticFaqGenerator(42).generate(30, 20)
    assert list(again.kb) == list(corpus.kb)
    assert again.triples == corpus.triples
    assert SyntheticFaqGenerator(43).generate(30, 20).triples != corpus.triples


def test_related_queries_keep_their_qualifier():
    """Paraphrases never drop the qualifier that distinguishes sibling entries."""
    corpus = SyntheticFaqGenerator(5).generate(40, 40)
    for t in corpus.triples:
        if t.label == 1:
            qualifier = " ".join(corpus.kb.get(t.kb_id).title.split()[-2:])
            assert qualifier in t.query


def test_synthetic_generator_validates_sizes():
    gen = SyntheticFaqGenerator(0)
    with pytest.raises(ArgumentError):
        gen.generate(9, 20)
    with pytest.raises(ArgumentError):
        gen.generate(20, 9)
    with pytest.raises(ArgumentError):
        gen.generate(1440, 20)


def test_generate_synthetic_writes_loadable_files(tmp_path):
    kb_path, data_path = generate_synthetic(7, 12, 10, str(tmp_path / "synth"))
    assert kb_path.endswith(KB_FILE) and data_path.endswith(DATASET_FILE)
    kb = KnowledgeBase.load(kb_path)
    assert len(kb) == 12
    assert len(load_dataset(data_path, kb)) == 10

    again_kb, again_data = generate_synthetic(7, 12, 10, str(tmp_path / "again"))
    assert open(again_kb, "rb").read() == open(kb_path, "rb").read()
    assert open(again_data, "rb").read() == open(data_path, "rb").read()
