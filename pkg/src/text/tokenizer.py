#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tokenization for queries, knowledge titles and knowledge answers.
"""

import re
from typing import List

from ..common.errors import ArgumentError

WHITESPACE = "whitespace"
CJK_CHAR = "cjk-char"
MODES = (WHITESPACE, CJK_CHAR)

_CJK = re.compile(
    "([぀-ヿ㐀-䶿一-鿿豈-﫿가-힯"
    "\U00020000-\U0002ebef])"
)


def tokenize(text: str, mode: str = WHITESPACE) -> List[str]:
    """
    Split text into lower-cased tokens.

    Args:
        text: Input text
        mode: "whitespace" splits on Unicode whitespace; "cjk-char" also makes
            every CJK codepoint its own token

    Returns:
        List of tokens (empty for empty text)
    """
    if mode not in MODES:
        raise ArgumentError(f"unknown tokenizer mode: {mode}")
    tokens = text.lower().split()
    if mode == WHITESPACE:
        return tokens
    pieces: List[str] = []
    for token in tokens:
        pieces.extend(part for part in _CJK.split(token) if part)
    return pieces
