#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
AdaGrad parameter updates.
"""

from typing import Tuple

import numpy as np

from ..common.errors import ArgumentError, ShapeError

EPSILON = 1e-8


def adagrad_step(
    param: np.ndarray,
    grad: np.ndarray,
    accumulator: np.ndarray,
    lr: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    One AdaGrad update, applied in place.

    Args:
        param: Parameter tensor
        grad: Gradient of the same shape
        accumulator: Running sum of squared gradients, same shape
        lr: Learning rate, > 0

    Returns:
        Tuple (param, accumulator), the updated input arrays

    Raises:
        ShapeError: If the shapes differ
        ArgumentError: If lr <= 0
    """
    if param.shape != grad.shape or param.shape != accumulator.shape:
        raise ShapeError(
            f"adagrad shapes differ: param {param.shape}, grad {grad.shape}, "
            f"accumulator {accumulator.shape}"
        )
    if lr <= 0:
        raise ArgumentError(f"learning rate must be > 0, got {lr}")
    accumulator += grad * grad
    param -= lr * grad / np.sqrt(accumulator + EPSILON)
    return param, accumulator
