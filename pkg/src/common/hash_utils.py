#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Fingerprinting utilities for the TCNN matching engine.

This module provides SHA-256 fingerprints used to check that a model
checkpoint and a retrieval index were built from the same knowledge-base
vocabulary.
"""

from typing import Iterable

from cryptography.hazmat.primitives import hashes


class HashUtils:
    """Utility class for content fingerprints."""

    @staticmethod
    def token_set_hash(mode: str, tokens: Iterable[str]) -> str:
        """
        Fingerprint a tokenizer mode together with a set of tokens.

        Args:
            mode: Tokenizer mode name
            tokens: Tokens; duplicates and order are irrelevant

        Returns:
            Hexadecimal SHA-256 digest of the mode and the sorted unique tokens
        """
        digest = hashes.Hash(hashes.SHA256())
        digest.update(mode.encode('utf-8'))
        for token in sorted(set(tokens)):
            digest.update(b"\n")
            digest.update(token.encode('utf-8'))
        return digest.finalize().hex()
