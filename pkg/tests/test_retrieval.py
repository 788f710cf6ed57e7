#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the knowledge base and BM25 candidate retrieval.
"""

import math
import random

import pytest

from src.common.errors import ArgumentError, DataError, ParseError
from src.retrieval.bm25 import DEFAULT_K, FIELDS, Bm25Index
from src.retrieval.knowledge_base import KnowledgeBase, KnowledgeEntry, kb_vocabulary_hash

TITLE_ONLY = {"title": 1.0, "answer": 0.0}


def _brute_force(entries, query, k1=1.2, b=0.75, weights=None):
    """Evaluate the BM25 formula directly over every document."""
    weights = weights or {"title": 2.0, "answer": 1.0}
    n = len(entries)
    docs = {f: [getattr(e, f).split() for e in entries] for f in FIELDS}
    avg = {f: sum(len(d) for d in docs[f]) / n for f in FIELDS}
    scores = {}
    for i, entry in enumerate(entries):
        total, matched = 0.0, False
        for term in query.split():
            for f in FIELDS:
                tf = docs[f][i].count(term)
                if tf == 0 or weights[f] == 0.0:
                    continue
                matched = True
                df = sum(1 for d in docs[f] if term in d)
                idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
                norm = tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(docs[f][i]) / avg[f]))
                total += weights[f] * idf * norm
        if matched:
            scores[entry.id] = total
    return scores


def test_bm25_hand_example():
    """Test the three-document title-only example."""
    entries = [
        KnowledgeEntry("d1", "refund policy", ""),
        KnowledgeEntry("d2", "shipping fee", ""),
        KnowledgeEntry("d3", "refund shipping time", ""),
    ]
    index = Bm25Index.build(entries, field_weights=TITLE_ONLY)
    results = index.search("refund", k=10)
    assert [doc for doc, _ in results] == ["d1", "d3"]
    assert results[0][1] == pytest.approx(0.4992, abs=1e-4)
    assert results[1][1] == pytest.approx(0.4208, abs=1e-4)


def test_bm25_matches_brute_force_scorer():
    rng = random.Random(7)
    words = [f"w{i}" for i in range(12)]
    for trial in range(20):
        n = rng.randint(1, 50)
        entries = [
            KnowledgeEntry(
                f"doc{i:02d}",
                " ".join(rng.choices(words, k=rng.randint(1, 6))),
                " ".join(rng.choices(words, k=rng.randint(0, 10))),
            )
            for i in range(n)
        ]
        index = Bm25Index.build(entries)
        query = " ".join(rng.choices(words + ["zzz"], k=rng.randint(1, 4)))
        expected = _brute_force(entries, query)
        results = index.search(query, k=50)

        assert {doc for doc, _ in results} == set(expected), f"trial {trial}"
        for doc, value in results:
            assert value == pytest.approx(expected[doc], abs=1e-9)
            assert value > 0.0
        for (doc, value), (next_doc, next_value) in zip(results, results[1:]):
            assert value > next_value or (value == next_value and doc < next_doc)
            assert expected[doc] >= expected[next_doc] - 1e-9


def test_bm25_edge_cases():
    empty = Bm25Index.build([])
    assert empty.document_count == 0
    assert empty.search("refund") == []

    single = Bm25Index.build([KnowledgeEntry("only", "refund policy", "we refund in 7 days")])
    results = single.search("refund policy")
    assert results[0][0] == "only" and results[0][1] > 0.0
    assert single.search("unindexed words") == []
    with pytest.raises(ArgumentError):
        single.search("refund", k=0)


def test_bm25_truncates_to_k_and_breaks_ties_by_id(tiny_kb):
    entries = [KnowledgeEntry(f"e{i}", "same title", "same answer") for i in (3, 1, 2)]
    index = Bm25Index.build(entries)
    assert [doc for doc, _ in index.search("same", k=2)] == ["e1", "e2"]
    assert len(Bm25Index.build(tiny_kb).search("my", k=DEFAULT_K)) == 3


def test_bm25_rejects_duplicate_ids():
    entries = [KnowledgeEntry("x", "a", ""), KnowledgeEntry("x", "b", "")]
    with pytest.raises(DataError, match="x"):
        Bm25Index.build(entries)


def test_bm25_save_load_and_rebuild(tmp_path, tiny_kb):
    index = Bm25Index.build(tiny_kb)
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    index.save(str(first))
    Bm25Index.build(tiny_kb).save(str(second))
    assert first.read_bytes() == second.read_bytes()

    loaded = Bm25Index.load(str(first))
    assert loaded.vocab_hash == index.vocab_hash
    for query in ("cancel my order", "parcel", "coupon code payment"):
        assert loaded.search(query) == index.search(query)

    broken = tmp_path / "broken.json"
    broken.write_text("{\"k1\": 1.2}", encoding="utf-8")
    with pytest.raises(ParseError):
        Bm25Index.load(str(broken))


def test_knowledge_base_save_load(tmp_path, tiny_kb):
    path = tmp_path / "kb.jsonl"
    tiny_kb.save(str(path))
    loaded = KnowledgeBase.load(str(path))
    assert loaded.ids() == ["kb1", "kb2", "kb3", "kb4"]
    assert loaded.get("kb3") == tiny_kb.get("kb3")


def test_knowledge_base_errors(tmp_path):
    kb = KnowledgeBase([KnowledgeEntry("a", "title", "answer")])
    with pytest.raises(DataError):
        kb.add(KnowledgeEntry("a", "other", "answer"))
    with pytest.raises(DataError):
        kb.add(KnowledgeEntry("b", "   ", "answer"))
    with pytest.raises(DataError):
        kb.get("missing")

    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "title": "t", "answer": "x"}\n{"id": "b"}\n', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        KnowledgeBase.load(str(path))
    assert info.value.line == 2


def test_kb_vocabulary_hash(tiny_kb):
    """The fingerprint ignores entry order and depends on the tokenizer mode."""
    reversed_kb = list(tiny_kb)[::-1]
    assert kb_vocabulary_hash(reversed_kb, "whitespace") == kb_vocabulary_hash(tiny_kb, "whitespace")
    assert kb_vocabulary_hash(tiny_kb, "cjk-char") != kb_vocabulary_hash(tiny_kb, "whitespace")
    assert Bm25Index.build(tiny_kb).vocab_hash == kb_vocabulary_hash(tiny_kb, "whitespace")
