#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Model configuration and trainable parameters for the TCNN matching engine.
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..common.config import build_dataclass, dataclass_lines
from ..common.errors import ArgumentError, ShapeError
from ..text.embeddings import init_embeddings
from ..text.tokenizer import MODES as TOKENIZER_MODES
from ..text.vocabulary import PAD_ID

TCNN = "tcnn"
ATCNN1 = "atcnn1"
ATCNN2 = "atcnn2"
VARIANTS = (TCNN, ATCNN1, ATCNN2)
POOL_MODES = ("avg", "max")

EMBEDDINGS = "embeddings"
OUTPUT_WEIGHTS = "output.weights"
OUTPUT_BIAS = "output.bias"


@dataclass
class ModelConfig:
    """Architecture hyperparameters of one matching model."""

    variant: str = TCNN
    seq_len: int = 40
    embed_dim: int = 50
    window: int = 3
    filters: int = 50
    blocks: int = 2
    use_answer: bool = True
    pool_mode: str = "avg"
    tokenizer: str = "whitespace"
    seed: int = 42

    def validate(self) -> "ModelConfig":
        """
        Check the configuration invariants.

        Returns:
            self, for chaining

        Raises:
            ArgumentError: If any field is out of range
        """
        if self.variant not in VARIANTS:
            raise ArgumentError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.pool_mode not in POOL_MODES:
            raise ArgumentError(f"unknown pool mode {self.pool_mode!r}")
        if self.tokenizer not in TOKENIZER_MODES:
            raise ArgumentError(f"unknown tokenizer {self.tokenizer!r}")
        if self.window < 1 or self.seq_len < self.window:
            raise ArgumentError(
                f"need seq_len >= window >= 1, got seq_len={self.seq_len} window={self.window}"
            )
        if self.blocks < 1 or self.filters < 1 or self.embed_dim < 1:
            raise ArgumentError("blocks, filters and embed_dim must all be >= 1")
        return self

    @property
    def channels(self) -> int:
        """Input channel count of every block for this variant."""
        return {TCNN: 1, ATCNN1: 2, ATCNN2: 3}[self.variant]

    @property
    def attention(self) -> bool:
        return self.variant != TCNN

    @property
    def feature_count(self) -> int:
        """Size of the output-layer feature vector."""
        per_level = 2 if self.use_answer else 1
        return per_level * (self.blocks + 1)

    def block_input_dim(self, block: int) -> int:
        """Height d_in of one channel map entering block `block` (1-based)."""
        return self.embed_dim if block == 1 else self.filters

    def attention_names(self) -> List[str]:
        """Attention weight matrices present in every block."""
        if not self.attention:
            return []
        if self.use_answer:
            return ["W_qt0", "W_qt1", "W_qa0", "W_qa1"]
        return ["W_qt0", "W_qt1"]

    def to_lines(self) -> List[str]:
        return dataclass_lines(self)

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "ModelConfig":
        """Build and validate from (possibly string) values; unknown keys are rejected."""
        return build_dataclass(cls, values).validate()


def block_key(block: int, name: str) -> str:
    return f"block{block}.{name}"


def expected_shapes(cfg: ModelConfig, vocab_size: int) -> Dict[str, Tuple[int, ...]]:
    """
    Shapes of every named tensor, in canonical order.

    Args:
        cfg: Model configuration
        vocab_size: Vocabulary size V

    Returns:
        Ordered mapping of tensor name to shape
    """
    shapes: Dict[str, Tuple[int, ...]] = {EMBEDDINGS: (cfg.embed_dim, vocab_size)}
    for b in range(1, cfg.blocks + 1):
        d_in = cfg.block_input_dim(b)
        shapes[block_key(b, "filter")] = (cfg.filters, cfg.channels * d_in * cfg.window)
        shapes[block_key(b, "bias")] = (cfg.filters,)
        for name in cfg.attention_names():
            shapes[block_key(b, name)] = (d_in, cfg.seq_len)
    shapes[OUTPUT_WEIGHTS] = (cfg.feature_count,)
    shapes[OUTPUT_BIAS] = (1,)
    return shapes


def _glorot(rng: np.random.Generator, shape: Tuple[int, int]) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


class ModelParams:
    """All trainable tensors of a model, keyed by name."""

    def __init__(self, tensors: Dict[str, np.ndarray]):
        """
        Initialize from named tensors.

        Args:
            tensors: Ordered mapping of tensor name to float64 array
        """
        self.tensors = tensors

    @classmethod
    def initialize(
        cls,
        cfg: ModelConfig,
        vocab_size: int,
        embeddings: Optional[np.ndarray] = None
    ) -> "ModelParams":
        """
        Create freshly initialized parameters.

        Filters and attention matrices are uniform ±sqrt(6/(fan_in+fan_out)),
        biases and the output layer start at zero (untrained score 0.5).

        Args:
            cfg: Model configuration
            vocab_size: Vocabulary size V
            embeddings: Optional pretrained l×V table

        Returns:
            The new parameters
        """
        cfg.validate()
        rng = np.random.default_rng(cfg.seed)
        tensors: Dict[str, np.ndarray] = {}
        for name, shape in expected_shapes(cfg, vocab_size).items():
            if name == EMBEDDINGS:
                if embeddings is not None:
                    if embeddings.shape != shape:
                        raise ShapeError(f"pretrained table {embeddings.shape}, expected {shape}")
                    table = np.array(embeddings, dtype=np.float64)
                    table[:, PAD_ID] = 0.0
                else:
                    table = init_embeddings(vocab_size, cfg.embed_dim, rng)
                tensors[name] = table
            elif len(shape) == 2:
                tensors[name] = _glorot(rng, shape)
            else:
                tensors[name] = np.zeros(shape, dtype=np.float64)
        return cls(tensors)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def items(self):
        return self.tensors.items()

    @property
    def vocab_size(self) -> int:
        return self.tensors[EMBEDDINGS].shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams({name: t.copy() for name, t in self.tensors.items()})

    def check_shapes(self, cfg: ModelConfig) -> None:
        """
        Verify that the tensors match the configuration.

        Raises:
            ShapeError: On a missing, extra or mis-shaped tensor
        """
        shapes = expected_shapes(cfg, self.vocab_size)
        if list(shapes) != list(self.tensors):
            raise ShapeError(
                f"tensor names {list(self.tensors)} do not match config {list(shapes)}"
            )
        for name, shape in shapes.items():
            if self.tensors[name].shape != shape:
                raise ShapeError(f"tensor {name} has shape {self.tensors[name].shape}, expected {shape}")
