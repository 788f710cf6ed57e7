#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Binary cross-entropy for the logistic-regression output layer.
"""

import numpy as np

from ..common.errors import ArgumentError


def bce_loss(p: float, y: int, pos_weight: float = 1.0) -> float:
    """
    Weighted binary cross-entropy of one prediction.

    Args:
        p: Predicted probability, strictly inside (0, 1)
        y: Label, 0 or 1
        pos_weight: Weight of the positive-class term

    Returns:
        -[pos_weight·y·ln p + (1-y)·ln(1-p)]

    Raises:
        ArgumentError: If p is outside (0, 1)
    """
    if not 0.0 < p < 1.0:
        raise ArgumentError(f"probability must lie in (0, 1), got {p}")
    return float(-(pos_weight * y * np.log(p) + (1 - y) * np.log1p(-p)))


def bce_with_logits(z: float, y: int, pos_weight: float = 1.0) -> float:
    """Same loss as bce_loss(sigmoid(z), y, pos_weight), stable for large |z|."""
    # -ln σ(z) = softplus(-z), -ln(1-σ(z)) = softplus(z)
    return float(pos_weight * y * np.logaddexp(0.0, -z) + (1 - y) * np.logaddexp(0.0, z))


def bce_logit_gradient(p: float, y: int, pos_weight: float = 1.0) -> float:
    """Derivative of the weighted loss with respect to the logit z, given p = σ(z)."""
    return p * (pos_weight * y + 1 - y) - pos_weight * y
