#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Candidate reranking for the TCNN matching engine.

Candidates retrieved for a query are scored with a matching model and
sorted by descending score (ties by ascending id).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence

from ..data.dataset import LabeledTriple
from ..retrieval.bm25 import DEFAULT_K, Bm25Index
from ..retrieval.knowledge_base import KnowledgeBase, KnowledgeEntry


class PairScorer(Protocol):
    """Anything that scores a query against a knowledge entry."""

    name: str

    def score_pair(self, query: str, entry: KnowledgeEntry) -> float:
        ...


@dataclass(frozen=True)
class Candidate:
    kb_id: str
    score: float
    label: int


@dataclass
class RankedQuery:
    """A query with its candidates sorted by descending score."""

    query: str
    candidates: List[Candidate] = field(default_factory=list)

    @property
    def top(self) -> Optional[Candidate]:
        return self.candidates[0] if self.candidates else None

    @property
    def has_related(self) -> bool:
        return any(c.label == 1 for c in self.candidates)


def rank_candidates(
    query: str,
    candidate_ids: Sequence[str],
    scorer: PairScorer,
    kb: KnowledgeBase,
    labels: Optional[Dict[str, int]] = None,
    threads: int = 1
) -> RankedQuery:
    """
    Score and sort the candidates of one query.

    Args:
        query: Query text
        candidate_ids: Knowledge ids to rerank
        scorer: Matching model
        kb: Knowledge base the ids resolve in
        labels: Optional relatedness label per id (missing ids count as 0)
        threads: Scoring workers; the result does not depend on it

    Returns:
        The ranked query

    Raises:
        DataError: If a candidate id is not in the knowledge base
    """
    entries = [kb.get(kb_id) for kb_id in candidate_ids]
    if threads > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(lambda e: scorer.score_pair(query, e), entries))
    else:
        scores = [scorer.score_pair(query, e) for e in entries]
    labels = labels or {}
    candidates = [
        Candidate(kb_id=e.id, score=s, label=int(labels.get(e.id, 0)))
        for e, s in zip(entries, scores)
    ]
    candidates.sort(key=lambda c: (-c.score, c.kb_id))
    return RankedQuery(query=query, candidates=candidates)


def group_by_query(triples: Sequence[LabeledTriple]) -> Dict[str, Dict[str, int]]:
    """
    Group labeled triples by query text, in first-appearance order.

    Returns:
        Mapping of query text to {kb_id: label}; a related label wins over an
        unrelated one for the same pair
    """
    groups: Dict[str, Dict[str, int]] = {}
    for t in triples:
        labels = groups.setdefault(t.query, {})
        labels[t.kb_id] = max(labels.get(t.kb_id, 0), t.label)
    return groups


def build_ranked_queries(
    triples: Sequence[LabeledTriple],
    scorer: PairScorer,
    kb: KnowledgeBase,
    index: Optional[Bm25Index] = None,
    k: int = DEFAULT_K,
    threads: int = 1
) -> List[RankedQuery]:
    """
    Rerank the candidates of every labeled query.

    Candidates are the BM25 top-k of the query (when an index is given)
    followed by the query's labeled ids; unlabeled candidates are unrelated.

    Args:
        triples: Labeled triples, grouped by query text
        scorer: Matching model
        kb: Knowledge base
        index: Optional BM25 index for candidate generation
        k: Number of retrieved candidates per query
        threads: Scoring workers

    Returns:
        One RankedQuery per distinct query
    """
    ranked: List[RankedQuery] = []
    for query, labels in group_by_query(triples).items():
        ids: List[str] = []
        if index is not None:
            ids = [kb_id for kb_id, _ in index.search(query, k)]
        ids.extend(kb_id for kb_id in labels if kb_id not in ids)
        ranked.append(rank_candidates(query, ids, scorer, kb, labels, threads))
    return ranked
