#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Vocabulary for the TCNN matching engine.

This module maps tokens to dense ids (PAD=0, UNK=1) and turns token
sequences into fixed-length id sequences.
"""

from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from ..common.errors import ArgumentError, ParseError

PAD = "<pad>"
UNK = "<unk>"
PAD_ID = 0
UNK_ID = 1


class Vocabulary:
    """Token to id mapping with reserved PAD and UNK entries."""

    def __init__(self, tokens: Sequence[str] = (), min_count: int = 1):
        """
        Initialize the vocabulary.

        Args:
            tokens: Ordinary tokens in id order (ids start at 2)
            min_count: Minimum count that was used to build it
        """
        self.min_count = min_count
        self._tokens: List[str] = [PAD, UNK]
        self._ids: Dict[str, int] = {PAD: PAD_ID, UNK: UNK_ID}
        for token in tokens:
            if token in self._ids:
                raise ArgumentError(f"duplicate vocabulary token: {token}")
            self._ids[token] = len(self._tokens)
            self._tokens.append(token)

    @classmethod
    def build(cls, sequences: Iterable[Sequence[str]], min_count: int = 1) -> "Vocabulary":
        """
        Build a vocabulary from token sequences.

        Tokens are ordered by descending count, then alphabetically, so the
        result does not depend on input order.

        Args:
            sequences: Token sequences to count
            min_count: Tokens seen fewer times map to UNK

        Returns:
            The new vocabulary
        """
        if min_count < 1:
            raise ArgumentError(f"min_count must be >= 1, got {min_count}")
        counts = Counter()
        for sequence in sequences:
            counts.update(sequence)
        kept = [t for t, c in counts.items() if c >= min_count and t not in (PAD, UNK)]
        kept.sort(key=lambda t: (-counts[t], t))
        return cls(kept, min_count=min_count)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    @property
    def tokens(self) -> List[str]:
        """All tokens in id order, PAD and UNK included."""
        return list(self._tokens)

    def lookup(self, token: str) -> int:
        """Id of a token, UNK for unseen tokens."""
        return self._ids.get(token, UNK_ID)

    def save(self, path: str) -> None:
        """
        Save as UTF-8 "token<TAB>id" lines.

        Args:
            path: Output path
        """
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            for token_id, token in enumerate(self._tokens):
                f.write(f"{token}\t{token_id}\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        """
        Load a vocabulary saved with save().

        Args:
            path: Path to the "token<TAB>id" file

        Returns:
            The loaded vocabulary
        """
        tokens: List[str] = []
        with open(Path(path), 'r', encoding='utf-8') as f:
            for number, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[1].isdigit():
                    raise ParseError(f"expected token<TAB>id, got {line!r}", line=number)
                if int(parts[1]) != len(tokens):
                    raise ParseError(f"ids must be dense, got {parts[1]}", line=number)
                tokens.append(parts[0])
        if tokens[:2] != [PAD, UNK]:
            raise ParseError("vocabulary must start with PAD and UNK")
        return cls(tokens[2:])


def encode(tokens: Sequence[str], vocab: Vocabulary, length: int) -> List[int]:
    """
    Map tokens to a fixed-length id sequence.

    Args:
        tokens: Token sequence
        vocab: Vocabulary (unseen tokens become UNK)
        length: Output length s; longer inputs are cut, shorter ones right-padded

    Returns:
        List of exactly `length` ids
    """
    if length < 1:
        raise ArgumentError(f"sequence length must be >= 1, got {length}")
    ids = [vocab.lookup(t) for t in tokens[:length]]
    return ids + [PAD_ID] * (length - len(ids))
