#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Exception types for the TCNN matching engine.

Every error raised on purpose by the engine derives from TCNNError so the
command-line front end can map it onto a stable exit code.
"""

from typing import Optional, Tuple


class TCNNError(Exception):
    """Base class for all engine errors."""


class ShapeError(TCNNError, ValueError):
    """Raised when matrix or vector dimensions do not line up."""


class NumericError(TCNNError, ArithmeticError):
    """Raised when a computation produces a non-finite value."""

    def __init__(
        self,
        message: str,
        epoch: Optional[int] = None,
        batch: Optional[int] = None
    ):
        context = []
        if epoch is not None:
            context.append(f"epoch {epoch}")
        if batch is not None:
            context.append(f"batch {batch}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class GradientCheckError(NumericError):
    """Raised when analytic and numeric gradients disagree."""


class DataError(TCNNError):
    """Raised on unresolvable or duplicate ids and other bad records."""


class ParseError(DataError):
    """Raised when an input line cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ArgumentError(TCNNError, ValueError):
    """Raised when a caller passes an argument outside its valid range."""


class CheckpointError(TCNNError):
    """Base class for checkpoint format problems."""


class NotACheckpointError(CheckpointError):
    """Raised when a file does not start with the checkpoint magic."""


class CheckpointVersionError(CheckpointError):
    """Raised when a checkpoint was written by another format version."""

    def __init__(self, found: int, expected: int):
        super().__init__(
            f"checkpoint format version {found} is not supported (expected {expected})"
        )
        self.versions: Tuple[int, int] = (found, expected)


class CheckpointCorruptError(CheckpointError):
    """Raised on truncated checkpoints or tensors that disagree with the config."""
