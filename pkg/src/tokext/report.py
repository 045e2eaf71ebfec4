"""Checkpoint-series reporting: long-format metric series over training steps.

Takes per-checkpoint aggregate tables and flattens them into one row per
(checkpoint, task, metric) so a whole metric-over-training-steps panel grid
can be plotted straight from the CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence, TextIO

from .errors import DuplicateSeries
from .metrics import TaskAggregate

SERIES_HEADER = ["checkpoint_label", "training_step", "difficulty", "unit", "metric", "value"]

SERIES_METRICS = [
    "accuracy",
    "mean_norm_conf",
    "mean_norm_conf_correct",
    "mean_norm_conf_incorrect",
    "mean_cross_entropy",
]


@dataclass(frozen=True)
class SeriesPoint:
    checkpoint_label: str
    training_step: int
    difficulty: str
    unit: str
    metric: str
    value: float


def build_series(
    checkpoints: Sequence[tuple[str, int, Sequence[TaskAggregate]]],
) -> list[SeriesPoint]:
    """Flatten labeled aggregate tables into sorted series points.

    checkpoints: (label, training_step, aggregates) per checkpoint file.
    Absent metric values produce no point. Raises DuplicateSeries when two
    points share (label, task, metric).
    """
    points: list[SeriesPoint] = []
    seen: set[tuple[str, str, str, str]] = set()
    for label, step, aggregates in checkpoints:
        if step < 0:
            raise ValueError(f"training step must be non-negative, got {step}")
        for agg in aggregates:
            for metric in SERIES_METRICS:
                value = getattr(agg, metric)
                if value is None:
                    continue
                key = (label, agg.difficulty, agg.unit, metric)
                if key in seen:
                    raise DuplicateSeries(
                        f"duplicate series point for label {label!r}, task "
                        f"({agg.difficulty}, {agg.unit}), metric {metric!r}"
                    )
                seen.add(key)
                points.append(
                    SeriesPoint(label, step, agg.difficulty, agg.unit, metric, float(value))
                )
    points.sort(key=lambda p: (p.difficulty, p.unit, p.metric, p.training_step, p.checkpoint_label))
    return points


def write_series_csv(points: Sequence[SeriesPoint], fh: TextIO) -> None:
    writer = csv.writer(fh)
    writer.writerow(SERIES_HEADER)
    for p in points:
        writer.writerow(
            [p.checkpoint_label, p.training_step, p.difficulty, p.unit, p.metric, repr(p.value)]
        )
