#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Knowledge base module for the TCNN matching engine.

This module stores knowledge entries ⟨title T, answer A⟩ keyed by a stable
id, backed by a JSON-lines file with keys id, title and answer.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List

from ..common.errors import DataError, ParseError
from ..common.hash_utils import HashUtils
from ..text.tokenizer import tokenize


@dataclass(frozen=True)
class KnowledgeEntry:
    """One knowledge entry: a title and its curated answer."""

    id: str
    title: str
    answer: str


class KnowledgeBase:
    """In-memory knowledge base with JSON-lines persistence."""

    def __init__(self, entries: Iterable[KnowledgeEntry] = ()):
        """
        Initialize the knowledge base.

        Args:
            entries: Knowledge entries; ids must be unique

        Raises:
            DataError: On a duplicate id or an empty title
        """
        self._entries: Dict[str, KnowledgeEntry] = {}
        for entry in entries:
            self.add(entry)

    def add(self, entry: KnowledgeEntry) -> None:
        """
        Add an entry.

        Raises:
            DataError: If the id already exists or the title is empty
        """
        if entry.id in self._entries:
            raise DataError(f"duplicate knowledge id: {entry.id}")
        if not entry.title.strip():
            raise DataError(f"knowledge entry {entry.id} has an empty title")
        self._entries[entry.id] = entry

    @classmethod
    def load(cls, path: str) -> "KnowledgeBase":
        """
        Load a knowledge base from a JSON-lines file.

        Args:
            path: Path to the KB file

        Returns:
            The loaded knowledge base

        Raises:
            ParseError: On malformed lines (with line number)
            DataError: On duplicate ids
        """
        kb = cls()
        with open(Path(path), 'r', encoding='utf-8') as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    entry = KnowledgeEntry(
                        id=str(record["id"]),
                        title=str(record["title"]),
                        answer=str(record["answer"]),
                    )
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise ParseError(f"malformed knowledge entry: {e}", line=number)
                kb.add(entry)
        logging.info(f"Loaded {len(kb)} knowledge entries from {path}")
        return kb

    def save(self, path: str) -> None:
        """
        Save as JSON lines in insertion order.

        Args:
            path: Output path
        """
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            for entry in self._entries.values():
                record = {"id": entry.id, "title": entry.title, "answer": entry.answer}
                f.write(json.dumps(record, ensure_ascii=False) + "\n")

    def get(self, entry_id: str) -> KnowledgeEntry:
        """
        Resolve an id.

        Raises:
            DataError: If the id is unknown
        """
        try:
            return self._entries[entry_id]
        except KeyError:
            raise DataError(f"unknown knowledge id: {entry_id}")

    def has(self, entry_id: str) -> bool:
        return entry_id in self._entries

    def ids(self) -> List[str]:
        return list(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[KnowledgeEntry]:
        return iter(self._entries.values())


def kb_vocabulary_hash(entries: Iterable[KnowledgeEntry], mode: str) -> str:
    """
    Fingerprint of the tokens of all titles and answers under a tokenizer mode.

    Args:
        entries: Knowledge entries
        mode: Tokenizer mode

    Returns:
        Hexadecimal SHA-256 digest
    """
    tokens = set()
    for entry in entries:
        tokens.update(tokenize(entry.title, mode))
        tokens.update(tokenize(entry.answer, mode))
    return HashUtils.token_set_hash(mode, tokens)
