#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Checkpoint persistence for trained matching models.

A checkpoint is one little-endian binary file:
- magic "TCNN" and a u32 format version
- u32 length + UTF-8 blob of canonical key=value lines (model config,
  training metadata, vocabulary)
- u32 tensor count, then per tensor: u16 name length, UTF-8 name,
  u64 rows, u64 cols and rows·cols float64 values in row-major order

Vectors are stored as single-column matrices.
"""

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from ..common.config import parse_lines
from ..common.errors import (
    ArgumentError,
    CheckpointCorruptError,
    CheckpointVersionError,
    NotACheckpointError,
    ParseError,
)
from ..model.config import ModelConfig, ModelParams, expected_shapes
from ..model.network import Matcher
from ..text.vocabulary import PAD, UNK, Vocabulary

MAGIC = b"TCNN"
FORMAT_VERSION = 1

MODEL_PREFIX = "model."
META_PREFIX = "meta."
VOCAB_KEY = "vocab"

# Metadata keys written by the trainer.
META_EPOCH = "epoch"
META_BEST_F1 = "best_valid_f1"
META_THRESHOLD = "threshold"
META_KB_HASH = "kb_hash"


@dataclass
class Checkpoint:
    """A trained model with everything needed to score new text."""

    model_config: ModelConfig
    vocab: Vocabulary
    params: ModelParams
    metadata: Dict[str, str] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    @property
    def kb_hash(self) -> str:
        return self.metadata.get(META_KB_HASH, "")

    @property
    def threshold(self) -> float:
        """Best validation threshold, 0.5 if training did not record one."""
        return float(self.metadata.get(META_THRESHOLD, "0.5"))

    def matcher(self) -> Matcher:
        return Matcher(self.params, self.model_config, self.vocab)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int) -> bytes:
        end = self.offset + count
        if end > len(self.data):
            raise CheckpointCorruptError(
                f"checkpoint truncated at byte {self.offset} (needed {count} more bytes)"
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


class CheckpointUtils:
    """Encoding and decoding of the checkpoint binary format."""

    @staticmethod
    def blob_lines(ckpt: Checkpoint) -> List[str]:
        """Canonical key=value lines of the config blob."""
        lines = [MODEL_PREFIX + line for line in ckpt.model_config.to_lines()]
        lines += [f"{META_PREFIX}{key}={ckpt.metadata[key]}" for key in sorted(ckpt.metadata)]
        lines.append(f"{VOCAB_KEY}=" + "\t".join(ckpt.vocab.tokens))
        return lines

    @staticmethod
    def encode(ckpt: Checkpoint) -> bytes:
        """
        Serialize a checkpoint.

        Args:
            ckpt: Checkpoint to serialize

        Returns:
            The file contents
        """
        ckpt.params.check_shapes(ckpt.model_config)
        if ckpt.params.vocab_size != len(ckpt.vocab):
            raise ArgumentError(
                f"embedding table has {ckpt.params.vocab_size} columns, vocabulary has {len(ckpt.vocab)} tokens"
            )
        blob = "\n".join(CheckpointUtils.blob_lines(ckpt)).encode('utf-8')
        parts = [MAGIC, struct.pack("<I", ckpt.version), struct.pack("<I", len(blob)), blob]
        tensors = list(ckpt.params.items())
        parts.append(struct.pack("<I", len(tensors)))
        for name, tensor in tensors:
            raw_name = name.encode('utf-8')
            matrix = tensor.reshape(tensor.shape[0], -1) if tensor.ndim == 1 else tensor
            rows, cols = matrix.shape
            parts.append(struct.pack("<H", len(raw_name)))
            parts.append(raw_name)
            parts.append(struct.pack("<QQ", rows, cols))
            parts.append(np.ascontiguousarray(matrix, dtype='<f8').tobytes())
        return b"".join(parts)

    @staticmethod
    def decode(data: bytes) -> Checkpoint:
        """
        Parse and validate checkpoint bytes.

        Args:
            data: File contents

        Returns:
            The checkpoint

        Raises:
            NotACheckpointError: If the magic bytes are missing
            CheckpointVersionError: If the format version differs
            CheckpointCorruptError: On truncation, a bad blob or tensors that
                disagree with the embedded config
        """
        if data[:len(MAGIC)] != MAGIC:
            raise NotACheckpointError("file does not start with the TCNN checkpoint magic")
        reader = _Reader(data)
        reader.take(len(MAGIC))
        (version,) = reader.unpack("<I")
        if version != FORMAT_VERSION:
            raise CheckpointVersionError(version, FORMAT_VERSION)

        (blob_len,) = reader.unpack("<I")
        try:
            values = parse_lines(reader.take(blob_len).decode('utf-8').split("\n"))
        except (UnicodeDecodeError, ParseError) as e:
            raise CheckpointCorruptError(f"unreadable config blob: {e}")
        model_values = {k[len(MODEL_PREFIX):]: v for k, v in values.items() if k.startswith(MODEL_PREFIX)}
        metadata = {k[len(META_PREFIX):]: v for k, v in values.items() if k.startswith(META_PREFIX)}
        if VOCAB_KEY not in values:
            raise CheckpointCorruptError("config blob has no vocabulary")
        try:
            cfg = ModelConfig.from_mapping(model_values)
            tokens = values[VOCAB_KEY].split("\t")
            if tokens[:2] != [PAD, UNK]:
                raise CheckpointCorruptError("vocabulary must start with PAD and UNK")
            vocab = Vocabulary(tokens[2:])
        except ArgumentError as e:
            raise CheckpointCorruptError(f"invalid config blob: {e}")

        shapes = expected_shapes(cfg, len(vocab))
        (count,) = reader.unpack("<I")
        if count != len(shapes):
            raise CheckpointCorruptError(f"checkpoint holds {count} tensors, config expects {len(shapes)}")
        tensors: Dict[str, np.ndarray] = {}
        for expected_name, shape in shapes.items():
            (name_len,) = reader.unpack("<H")
            name = reader.take(name_len).decode('utf-8', errors='replace')
            rows, cols = reader.unpack("<QQ")
            stored = (shape[0], 1) if len(shape) == 1 else shape
            if name != expected_name or (rows, cols) != stored:
                raise CheckpointCorruptError(
                    f"tensor {name} is {rows}x{cols}, config expects {expected_name} {stored[0]}x{stored[1]}"
                )
            values_raw = reader.take(8 * rows * cols)
            tensors[name] = np.frombuffer(values_raw, dtype='<f8').astype(np.float64).reshape(shape)
        if reader.offset != len(data):
            raise CheckpointCorruptError(f"{len(data) - reader.offset} trailing bytes after the last tensor")
        return Checkpoint(cfg, vocab, ModelParams(tensors), metadata, version)


def save_checkpoint(ckpt: Checkpoint, path: str) -> None:
    """
    Write a checkpoint file.

    Args:
        ckpt: Checkpoint to save
        path: Output path
    """
    data = CheckpointUtils.encode(ckpt)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'wb') as f:
        f.write(data)
    logging.info(f"Checkpoint saved to {out} ({len(data)} bytes)")


def load_checkpoint(path: str) -> Checkpoint:
    """
    Read and validate a checkpoint file.

    Args:
        path: Checkpoint path

    Returns:
        The checkpoint; nothing is returned for a damaged file
    """
    with open(Path(path), 'rb') as f:
        data = f.read()
    ckpt = CheckpointUtils.decode(data)
    logging.info(f"Checkpoint loaded from {path}")
    return ckpt
