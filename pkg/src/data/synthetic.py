#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Synthetic e-commerce FAQ corpus for desk-scale experiments.

Knowledge entries are built from (action, object, qualifier) slots over an
orders / shipping / refunds / accounts vocabulary. Related queries are
rule-based paraphrases of a KB title (synonym swap, reorder, particle drop);
answers name the synonyms of their action and object.
Unrelated queries paraphrase a held-out entry that is not in the KB and are
paired with its closest KB sibling, so no KB entry answers them.
"""

import logging
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from ..common.errors import ArgumentError
from ..retrieval.knowledge_base import KnowledgeBase, KnowledgeEntry
from .dataset import LabeledTriple, save_dataset

KB_FILE = "kb.jsonl"
DATASET_FILE = "dataset.jsonl"

ACTIONS: Dict[str, List[str]] = {
    "cancel": ["call off", "abort"],
    "change": ["modify", "update"],
    "track": ["follow", "trace"],
    "return": ["send back", "give back"],
    "confirm": ["verify", "validate"],
    "delay": ["postpone", "hold"],
    "split": ["divide", "separate"],
    "merge": ["combine", "join"],
    "reset": ["restore", "renew"],
    "view": ["check", "see"],
}

OBJECTS: Dict[str, List[str]] = {
    "order": ["purchase"],
    "parcel": ["package", "shipment"],
    "refund": ["reimbursement", "repayment"],
    "account": ["profile"],
    "password": ["passcode", "login code"],
    "address": ["shipping location"],
    "invoice": ["receipt", "bill"],
    "coupon": ["voucher", "promo code"],
    "payment": ["transaction"],
    "delivery": ["courier slot"],
    "subscription": ["membership"],
    "wishlist": ["saved items"],
}

# Qualifier words are never swapped or dropped by the paraphraser.
QUALIFIERS: List[str] = [
    "after shipping",
    "before payment",
    "with points",
    "from abroad",
    "on mobile",
    "for gifts",
    "during promotions",
    "without login",
    "at checkout",
    "by phone",
    "in stores",
    "via chat",
]

SECTIONS: Dict[str, str] = {
    "order": "order center",
    "parcel": "logistics page",
    "refund": "refund center",
    "account": "account settings",
    "password": "security settings",
    "address": "address book",
    "invoice": "billing page",
    "coupon": "coupon wallet",
    "payment": "payment page",
    "delivery": "delivery tracker",
    "subscription": "membership hub",
    "wishlist": "favorites tab",
}

TEMPLATES: List[str] = [
    "how do i {action} my {object}",
    "can i {action} my {object}",
    "i want to {action} the {object}",
    "is it possible to {action} a {object}",
]

PARTICLES = {"my", "the", "a", "do", "i", "to", "it", "is"}

Slot = Tuple[str, str, str]


@dataclass
class SyntheticCorpus:
    """Generated knowledge base and labeled triples."""

    kb: KnowledgeBase
    triples: List[LabeledTriple]


class SyntheticFaqGenerator:
    """Deterministic generator of FAQ knowledge and labeled queries."""

    def __init__(self, seed: int):
        """
        Initialize the generator.

        Args:
            seed: Seed; equal seeds give identical corpora
        """
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def _pick(self, options: List[str]) -> str:
        return options[int(self.rng.integers(len(options)))]

    @staticmethod
    def title(slot: Slot) -> str:
        action, obj, qualifier = slot
        return f"how to {action} my {obj} {qualifier}"

    @staticmethod
    def answer(slot: Slot) -> str:
        action, obj, qualifier = slot
        actions = " or ".join(ACTIONS[action])
        objects = " or ".join(OBJECTS[obj])
        return (
            f"to {action} your {obj} {qualifier} open the {SECTIONS[obj]} "
            f"select the {obj} and tap {action} "
            f"this also works to {actions} a {objects} {qualifier}"
        )

    def paraphrase(self, slot: Slot) -> str:
        """
        Rule-based paraphrase of a title: synonym swap, reorder and particle drop.

        Args:
            slot: (action, object, qualifier) of the entry

        Returns:
            Query text
        """
        action, obj, qualifier = slot
        if self.rng.random() < 0.5:
            action = self._pick(ACTIONS[action])
        if self.rng.random() < 0.5:
            obj = self._pick(OBJECTS[obj])
        words = self._pick(TEMPLATES).format(action=action, object=obj).split()
        if self.rng.random() < 0.4:
            words = [w for w in words if w not in PARTICLES]
        body = " ".join(words)
        if self.rng.random() < 0.3:
            return f"{qualifier} {body}"
        return f"{body} {qualifier}"

    def generate(self, n_entries: int, n_queries: int) -> SyntheticCorpus:
        """
        Generate a corpus.

        Args:
            n_entries: Number of KB entries, >= 10
            n_queries: Number of labeled queries, >= 10; half related

        Returns:
            The corpus

        Raises:
            ArgumentError: On sizes out of range
        """
        if n_entries < 10 or n_queries < 10:
            raise ArgumentError("need at least 10 entries and 10 queries")
        n_unrelated = n_queries // 2
        slots: List[Slot] = list(product(ACTIONS, OBJECTS, QUALIFIERS))
        if n_entries + n_unrelated > len(slots):
            raise ArgumentError(
                f"at most {len(slots)} distinct entries plus held-out slots are available"
            )
        order = self.rng.permutation(len(slots))
        kb_slots = [slots[int(i)] for i in order[:n_entries]]
        held_out = [slots[int(i)] for i in order[n_entries:n_entries + n_unrelated]]

        entries = [
            KnowledgeEntry(id=f"kb{k:05d}", title=self.title(slot), answer=self.answer(slot))
            for k, slot in enumerate(kb_slots)
        ]
        kb = KnowledgeBase(entries)
        by_pair: Dict[Tuple[str, str], List[int]] = {}
        by_object: Dict[str, List[int]] = {}
        for k, (action, obj, _) in enumerate(kb_slots):
            by_pair.setdefault((action, obj), []).append(k)
            by_object.setdefault(obj, []).append(k)

        triples: List[LabeledTriple] = []
        for i in range(n_queries - n_unrelated):
            k = int(self.rng.integers(n_entries))
            triples.append(LabeledTriple(self.paraphrase(kb_slots[k]), entries[k].id, 1))
        for slot in held_out:
            action, obj, _ = slot
            siblings = by_pair.get((action, obj)) or by_object.get(obj) or list(range(n_entries))
            k = siblings[int(self.rng.integers(len(siblings)))]
            triples.append(LabeledTriple(self.paraphrase(slot), entries[k].id, 0))
        shuffled = [triples[int(i)] for i in self.rng.permutation(len(triples))]
        return SyntheticCorpus(kb=kb, triples=shuffled)


def generate_synthetic(seed: int, n_entries: int, n_queries: int, out_dir: str) -> Tuple[str, str]:
    """
    Generate a synthetic corpus and write it to disk.

    Args:
        seed: Generator seed
        n_entries: Number of KB entries, >= 10
        n_queries: Number of labeled queries, >= 10
        out_dir: Output directory

    Returns:
        Tuple (KB file path, dataset file path)
    """
    corpus = SyntheticFaqGenerator(seed).generate(n_entries, n_queries)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kb_path = str(out / KB_FILE)
    dataset_path = str(out / DATASET_FILE)
    corpus.kb.save(kb_path)
    save_dataset(corpus.triples, dataset_path)
    logging.info(f"Wrote {len(corpus.kb)} entries to {kb_path} and {len(corpus.triples)} triples to {dataset_path}")
    return kb_path, dataset_path
