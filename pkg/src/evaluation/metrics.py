#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Threshold-based top-1 metrics.

A query is answered when its top-1 score reaches the threshold τ; it is
answered correctly when that top-1 candidate is related.
- P@1  = correct / answered
- R@1  = correct / queries having at least one related candidate
- F1@1 = harmonic mean of the two
"""

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from ..common.errors import ArgumentError
from .ranking import RankedQuery

TABLE_COLUMNS = ("Methods", "Threshold", "Precision@1", "Recall@1", "F1@1")


def f1(precision: float, recall: float) -> float:
    """Harmonic mean, 0 when precision + recall is 0."""
    if precision + recall <= 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class ThresholdMetrics:
    threshold: float
    precision: float
    recall: float
    f1: float
    answered: int
    correct: int
    with_relevant: int


def metrics_at_threshold(ranked: Sequence[RankedQuery], threshold: float) -> ThresholdMetrics:
    """
    P@1, R@1 and F1@1 at one threshold.

    Args:
        ranked: Ranked queries
        threshold: Decision threshold τ

    Returns:
        The metrics and the counts they were computed from
    """
    answered = correct = with_relevant = 0
    for rq in ranked:
        if rq.has_related:
            with_relevant += 1
        top = rq.top
        if top is not None and top.score >= threshold:
            answered += 1
            if top.label == 1:
                correct += 1
    precision = correct / answered if answered else 0.0
    recall = correct / with_relevant if with_relevant else 0.0
    return ThresholdMetrics(
        threshold=threshold,
        precision=precision,
        recall=recall,
        f1=f1(precision, recall),
        answered=answered,
        correct=correct,
        with_relevant=with_relevant,
    )


def threshold_grid(step: float) -> List[float]:
    """
    The grid {0, step, 2·step, ..., 1}.

    Raises:
        ArgumentError: Unless 0 < step <= 1
    """
    if not 0.0 < step <= 1.0:
        raise ArgumentError(f"grid step must lie in (0, 1], got {step}")
    count = int(math.floor(1.0 / step + 1e-9))
    grid = [round(k * step, 10) for k in range(count + 1)]
    if grid[-1] < 1.0:
        grid.append(1.0)
    return grid


@dataclass
class EvalReport:
    """Per-threshold metrics and the selected (best-F1) threshold."""

    method: str
    rows: List[ThresholdMetrics] = field(default_factory=list)
    selected: Optional[ThresholdMetrics] = None

    @property
    def selected_threshold(self) -> float:
        return self.selected.threshold if self.selected else 0.0

    def to_dict(self) -> Dict:
        return {
            "method": self.method,
            "selected_threshold": self.selected_threshold,
            "selected": asdict(self.selected) if self.selected else None,
            "rows": [asdict(row) for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def threshold_sweep(
    ranked: Sequence[RankedQuery],
    step: float = 0.01,
    grid: Optional[Sequence[float]] = None,
    method: str = ""
) -> EvalReport:
    """
    Evaluate every threshold of a grid and select the best F1@1.

    Args:
        ranked: Ranked queries
        step: Grid step, used when no explicit grid is given
        grid: Explicit thresholds
        method: Method name shown in reports

    Returns:
        The report; ties in F1 go to the smallest threshold
    """
    thresholds = sorted(grid) if grid is not None else threshold_grid(step)
    report = EvalReport(method=method)
    for tau in thresholds:
        row = metrics_at_threshold(ranked, tau)
        report.rows.append(row)
        if report.selected is None or row.f1 > report.selected.f1:
            report.selected = row
    return report


def fixed_threshold_report(ranked: Sequence[RankedQuery], threshold: float, method: str = "") -> EvalReport:
    """Report for a single user-chosen threshold."""
    row = metrics_at_threshold(ranked, threshold)
    return EvalReport(method=method, rows=[row], selected=row)


def format_table(reports: Sequence[EvalReport]) -> str:
    """
    Render the selected row of each report as an aligned plain-text table.

    Args:
        reports: One report per method

    Returns:
        Table text with columns Methods, Threshold, Precision@1, Recall@1, F1@1
    """
    rows = [list(TABLE_COLUMNS)]
    for report in reports:
        sel = report.selected
        if sel is None:
            continue
        rows.append([
            report.method,
            f"{sel.threshold:.2f}",
            f"{sel.precision:.3f}",
            f"{sel.recall:.3f}",
            f"{sel.f1:.3f}",
        ])
    widths = [max(len(r[c]) for r in rows) for c in range(len(TABLE_COLUMNS))]
    lines = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [r[c].rjust(widths[c]) for c in range(1, len(r))]
        lines.append("  ".join(cells))
    return "\n".join(lines)
