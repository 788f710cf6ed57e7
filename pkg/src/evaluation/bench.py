#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Prediction-time benchmark of the matching models.
"""

import time
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..common.errors import ArgumentError
from ..model.network import Matcher

WARMUP_CALLS = 10

Probe = Tuple[Sequence[int], Sequence[int], Sequence[int]]


@dataclass
class LatencyStats:
    """Per-triple scoring time in seconds."""

    mean: float
    median: float
    p95: float
    minimum: float
    samples: int

    def describe(self) -> str:
        return (
            f"mean {self.mean * 1e3:.3f} ms, median {self.median * 1e3:.3f} ms, "
            f"p95 {self.p95 * 1e3:.3f} ms, min {self.minimum * 1e3:.3f} ms "
            f"over {self.samples} calls"
        )


def latency_bench(matcher: Matcher, probes: Sequence[Probe], repetitions: int) -> LatencyStats:
    """
    Time single-threaded score calls.

    Args:
        matcher: Model to time
        probes: Encoded (query, title, answer) id triples
        repetitions: Passes over the probes, >= 1

    Returns:
        Mean, median, 95th percentile and minimum time per triple

    Raises:
        ArgumentError: If probes is empty or repetitions < 1
    """
    if repetitions < 1:
        raise ArgumentError(f"repetitions must be >= 1, got {repetitions}")
    if not probes:
        raise ArgumentError("latency bench needs at least one probe triple")
    for k in range(WARMUP_CALLS):
        matcher.score_ids(*probes[k % len(probes)])
    timings: List[float] = []
    for _ in range(repetitions):
        for probe in probes:
            start = time.perf_counter()
            matcher.score_ids(*probe)
            timings.append(time.perf_counter() - start)
    values = np.array(timings)
    return LatencyStats(
        mean=float(values.mean()),
        median=float(np.median(values)),
        p95=float(np.percentile(values, 95)),
        minimum=float(values.min()),
        samples=len(timings),
    )
