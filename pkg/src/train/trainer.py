#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Supervised training of the matching models.

This module provides:
- The training hyperparameters (TrainConfig)
- Vocabulary construction from the knowledge base and training queries
- The training loop: retrieved hard negatives, seeded shuffling, mini-batch
  AdaGrad on weighted BCE plus L2, early stopping on validation F1@1
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..common.config import build_dataclass, dataclass_lines
from ..common.errors import ArgumentError, DataError, NumericError
from ..data.dataset import LabeledTriple
from ..evaluation.metrics import threshold_sweep
from ..evaluation.ranking import build_ranked_queries, group_by_query
from ..model.config import ModelConfig, ModelParams
from ..model.network import Example, Matcher, gradients
from ..retrieval.bm25 import DEFAULT_K, Bm25Index
from ..retrieval.knowledge_base import KnowledgeBase, kb_vocabulary_hash
from ..text.tokenizer import tokenize
from ..text.vocabulary import Vocabulary
from .checkpoint import META_BEST_F1, META_EPOCH, META_KB_HASH, META_THRESHOLD, Checkpoint
from .optimizer import adagrad_step


@dataclass
class TrainConfig:
    """Training hyperparameters."""

    learning_rate: float = 0.05
    l2: float = 1e-4
    batch_size: int = 32
    max_epochs: int = 30
    patience: int = 5
    seed: int = 42
    pos_weight: float = 1.0
    negatives: int = 4
    track_train_accuracy: bool = False

    def validate(self) -> "TrainConfig":
        """
        Check the hyperparameter ranges.

        Raises:
            ArgumentError: If any value is out of range
        """
        if self.learning_rate <= 0:
            raise ArgumentError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ArgumentError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ArgumentError(f"patience must be >= 1, got {self.patience}")
        if self.negatives < 0:
            raise ArgumentError(f"negatives must be >= 0, got {self.negatives}")
        if self.max_epochs < 1:
            raise ArgumentError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.l2 < 0 or self.pos_weight <= 0:
            raise ArgumentError("l2 must be >= 0 and pos_weight > 0")
        return self

    def to_lines(self) -> List[str]:
        return dataclass_lines(self)

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "TrainConfig":
        return build_dataclass(cls, values).validate()


def build_vocabulary(
    kb: KnowledgeBase,
    triples: Iterable[LabeledTriple],
    tokenizer: str,
    min_count: int = 1
) -> Vocabulary:
    """
    Vocabulary over all knowledge titles and answers plus the training queries.

    Args:
        kb: Knowledge base
        triples: Training triples
        tokenizer: Tokenizer mode
        min_count: Minimum token count

    Returns:
        The vocabulary
    """
    sequences: List[List[str]] = []
    for entry in kb:
        sequences.append(tokenize(entry.title, tokenizer))
        sequences.append(tokenize(entry.answer, tokenizer))
    sequences.extend(tokenize(t.query, tokenizer) for t in triples)
    return Vocabulary.build(sequences, min_count)


def balanced_pos_weight(triples: Sequence[LabeledTriple]) -> float:
    """Negative count over positive count, 1.0 if either class is missing."""
    positives = sum(t.label for t in triples)
    negatives = len(triples) - positives
    if positives == 0 or negatives == 0:
        return 1.0
    return negatives / positives


class Trainer:
    """Trains one matching model against a knowledge base."""

    def __init__(
        self,
        kb: KnowledgeBase,
        vocab: Vocabulary,
        cfg: ModelConfig,
        tcfg: TrainConfig,
        embeddings: Optional[np.ndarray] = None,
        index: Optional[Bm25Index] = None,
        threads: int = 1
    ):
        """
        Initialize the trainer with freshly initialized parameters.

        Args:
            kb: Knowledge base the triples refer to
            vocab: Vocabulary of the model
            cfg: Model configuration
            tcfg: Training configuration
            embeddings: Optional pretrained l×V table
            index: BM25 index for mined negatives and validation candidates;
                built over the knowledge base when omitted
            threads: Workers for validation scoring
        """
        self.kb = kb
        self.vocab = vocab
        self.cfg = cfg.validate()
        self.tcfg = tcfg.validate()
        self.index = index if index is not None else Bm25Index.build(kb, tokenizer=cfg.tokenizer)
        self.threads = threads
        self.params = ModelParams.initialize(cfg, len(vocab), embeddings)
        self.matcher = Matcher(self.params, cfg, vocab)
        self._entry_ids: Dict[str, Tuple[List[int], List[int]]] = {}

    def encode(self, triples: Sequence[LabeledTriple]) -> List[Example]:
        """
        Encode triples into model examples.

        Raises:
            DataError: If a kb_id does not resolve in the knowledge base
        """
        examples: List[Example] = []
        for t in triples:
            if not self.kb.has(t.kb_id):
                raise DataError(f"unknown kb_id: {t.kb_id}")
            if t.kb_id not in self._entry_ids:
                entry = self.kb.get(t.kb_id)
                self._entry_ids[t.kb_id] = (
                    self.matcher.encode_text(entry.title),
                    self.matcher.encode_text(entry.answer),
                )
            title_ids, answer_ids = self._entry_ids[t.kb_id]
            examples.append((self.matcher.encode_text(t.query), title_ids, answer_ids, t.label))
        return examples

    def accuracy(self, triples: Sequence[LabeledTriple], threshold: float = 0.5) -> float:
        """
        Share of triples whose thresholded score equals the label.

        Args:
            triples: Labeled triples
            threshold: Decision threshold on the score

        Returns:
            Accuracy in [0, 1]
        """
        examples = self.encode(triples)
        if not examples:
            raise ArgumentError("cannot compute the accuracy of an empty set")
        hits = sum(
            int((self.matcher.score_ids(q, t, a) >= threshold) == bool(y))
            for q, t, a, y in examples
        )
        return hits / len(examples)

    def negative_pools(self, triples: Sequence[LabeledTriple]) -> Dict[str, List[str]]:
        """
        Retrieved candidates of every training query that carry no label.

        These are the entries the reranker has to separate from the gold one
        at query time, mostly siblings sharing the action or the qualifier.

        Args:
            triples: Training triples

        Returns:
            Mapping of query text to the unlabeled ids of its BM25 top-k, in
            retrieval order
        """
        return {
            query: [kb_id for kb_id, _ in self.index.search(query, DEFAULT_K) if kb_id not in labels]
            for query, labels in group_by_query(triples).items()
        }

    def sample_negatives(
        self,
        pools: Dict[str, List[str]],
        rng: np.random.Generator
    ) -> List[LabeledTriple]:
        """Draw up to `negatives` unrelated triples per query from its pool."""
        mined: List[LabeledTriple] = []
        for query, pool in pools.items():
            if not pool:
                continue
            picks = rng.choice(len(pool), size=min(self.tcfg.negatives, len(pool)), replace=False)
            mined.extend(LabeledTriple(query, pool[int(i)], 0) for i in sorted(picks))
        return mined

    def validation_report(self, valid: Sequence[LabeledTriple]):
        ranked = build_ranked_queries(
            valid, self.matcher, self.kb, self.index, threads=self.threads
        )
        return threshold_sweep(ranked, method=self.matcher.name)

    def _train_epoch(self, examples: List[Example], rng: np.random.Generator,
                     accumulators: Dict[str, np.ndarray], epoch: int) -> float:
        order = rng.permutation(len(examples))
        size = self.tcfg.batch_size
        total = 0.0
        for batch_no, start in enumerate(range(0, len(order), size), start=1):
            batch = [examples[int(i)] for i in order[start:start + size]]
            try:
                grads, loss = gradients(
                    batch, self.params, self.cfg, self.tcfg.l2, self.tcfg.pos_weight
                )
            except NumericError as e:
                raise NumericError(str(e), epoch=epoch, batch=batch_no)
            for name, tensor in self.params.items():
                adagrad_step(tensor, grads[name], accumulators[name], self.tcfg.learning_rate)
            logging.debug(f"epoch {epoch} batch {batch_no}: loss {loss:.6f}")
            total += loss * len(batch)
        return total / len(examples)

    def fit(
        self,
        train: Sequence[LabeledTriple],
        valid: Sequence[LabeledTriple]
    ) -> Tuple[Checkpoint, List[Dict[str, float]]]:
        """
        Train until max_epochs or until validation F1@1 stops improving.

        Every epoch adds freshly sampled retrieved negatives to the labeled
        triples (see negative_pools). The parameters with the best validation
        F1@1 are kept and restored into the trainer at the end.

        Args:
            train: Training triples
            valid: Validation triples

        Returns:
            Tuple (best checkpoint, per-epoch history)

        Raises:
            ArgumentError: If a split is empty
            DataError: If a kb_id does not resolve
            NumericError: If the loss becomes non-finite (with epoch and batch)
        """
        if not train or not valid:
            raise ArgumentError("training and validation sets must be non-empty")
        labeled = self.encode(train)
        self.encode(valid)
        pools = self.negative_pools(train) if self.tcfg.negatives else {}
        logging.info(
            f"Training on {len(labeled)} labeled triples plus up to {self.tcfg.negatives} "
            f"retrieved negatives for each of {len(pools)} queries per epoch"
        )
        rng = np.random.default_rng(self.tcfg.seed)
        accumulators = {name: np.zeros_like(t) for name, t in self.params.items()}

        history: List[Dict[str, float]] = []
        best_f1 = -np.inf
        best_params = self.params.copy()
        best_epoch, best_threshold = 0, 0.5
        stale = 0
        for epoch in range(1, self.tcfg.max_epochs + 1):
            examples = labeled
            if pools:
                examples = labeled + self.encode(self.sample_negatives(pools, rng))
            loss = self._train_epoch(examples, rng, accumulators, epoch)
            report = self.validation_report(valid)
            record: Dict[str, float] = {
                "epoch": epoch,
                "loss": loss,
                "valid_f1": report.selected.f1,
                "threshold": report.selected_threshold,
            }
            if self.tcfg.track_train_accuracy:
                record["train_accuracy"] = self.accuracy(train)
            history.append(record)
            logging.info(
                f"Epoch {epoch}: loss {loss:.6f}, valid F1@1 {report.selected.f1:.4f} "
                f"at threshold {report.selected_threshold:.2f}"
            )
            if report.selected.f1 > best_f1:
                best_f1 = report.selected.f1
                best_params = self.params.copy()
                best_epoch, best_threshold = epoch, report.selected_threshold
                stale = 0
            else:
                stale += 1
                if stale >= self.tcfg.patience:
                    logging.info(f"Early stop after epoch {epoch}: no improvement for {stale} epochs")
                    break

        for name, tensor in best_params.items():
            self.params[name][...] = tensor
        metadata = {
            META_EPOCH: str(best_epoch),
            META_BEST_F1: repr(float(best_f1)),
            META_THRESHOLD: repr(float(best_threshold)),
            META_KB_HASH: kb_vocabulary_hash(self.kb, self.cfg.tokenizer),
        }
        return Checkpoint(self.cfg, self.vocab, best_params, metadata), history
