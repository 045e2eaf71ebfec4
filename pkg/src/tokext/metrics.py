"""Teacher-forced next-token-prediction metrics and per-task aggregation.

For each task item the scored sequence is the tokenized input followed by
the gold target ids. Every position from the second token onward is scored
against all preceding gold tokens, yielding a step record with the model's
confidence (max softmax probability), its confidence normalized by the mean
confidence of all previously scored positions, the gold token's
log-probability, and correctness under greedy argmax (lowest id on ties).
An item counts as accurate only if every target step is correct.

Aggregates pool target steps per (difficulty, unit): mean item accuracy,
mean normalized confidence overall and split by step correctness, and mean
cross-entropy in natural-log units. Means over empty sets are reported as
absent, never fabricated.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import EmptyInput, JoinError, ParseError
from .models import OfflineStepScore, ScoreVector
from .tasks import TaskItem, target_ids
from .tokenizer import TokenizerModel

AGGREGATE_HEADER = [
    "difficulty",
    "unit",
    "n_items",
    "accuracy",
    "mean_norm_conf",
    "mean_norm_conf_correct",
    "mean_norm_conf_incorrect",
    "mean_cross_entropy",
]


@dataclass(frozen=True)
class StepRecord:
    """One scored position of one item."""

    item_id: str
    position: int  # 1-based within the input+target sequence; records start at 2
    gold_id: int
    argmax_id: int
    confidence: float
    normalized_confidence: float | None  # absent at the first scored position
    gold_logprob: float
    correct: bool
    is_target_step: bool


@dataclass(frozen=True)
class ItemResult:
    """Target-step records plus the all-or-nothing accuracy flag."""

    item_id: str
    steps: tuple[StepRecord, ...]
    accurate: bool


@dataclass(frozen=True)
class TaskAggregate:
    difficulty: str
    unit: str
    n_items: int
    accuracy: float
    mean_norm_conf: float | None
    mean_norm_conf_correct: float | None
    mean_norm_conf_incorrect: float | None
    mean_cross_entropy: float | None


def confidence(scores: ScoreVector) -> float:
    """Maximum softmax probability of one prediction step."""
    return math.exp(scores.max_logprob)


def normalized_confidence(history: Sequence[float], current: float) -> float:
    """Current confidence divided by the mean of previously scored confidences."""
    if not history:
        raise ValueError("normalized confidence is undefined without history")
    return current / (sum(history) / len(history))


def cross_entropy(gold_logprob: float) -> float:
    """Negative gold log-probability, in natural-log units."""
    return -gold_logprob


def score_item(model, tokenizer: TokenizerModel, item: TaskItem) -> list[StepRecord]:
    """Score every position of an item under teacher forcing.

    May raise BoundaryMerge (target not cleanly separable) or EmptyInput
    (input encodes to zero tokens, leaving the first target step without
    context); callers exclude such items with a reason.
    """
    input_ids = tokenizer.encode(item.input_text)
    gold_target = target_ids(tokenizer, item.input_text, item.target)
    if not input_ids:
        raise EmptyInput(f"item {item.id!r}: input_text encodes to no tokens")
    seq = input_ids + gold_target

    records: list[StepRecord] = []
    history: list[float] = []
    for position in range(2, len(seq) + 1):
        scores = model.score(seq[: position - 1])
        gold = seq[position - 1]
        conf = confidence(scores)
        norm = normalized_confidence(history, conf) if history else None
        argmax = scores.argmax_id
        records.append(
            StepRecord(
                item_id=item.id,
                position=position,
                gold_id=gold,
                argmax_id=argmax,
                confidence=conf,
                normalized_confidence=norm,
                gold_logprob=float(scores.logprobs[gold]),
                correct=argmax == gold,
                is_target_step=position > len(input_ids),
            )
        )
        history.append(conf)
    return records


def score_item_offline(
    tokenizer: TokenizerModel,
    item: TaskItem,
    scores: Mapping[tuple[str, int], OfflineStepScore],
) -> tuple[list[StepRecord], list[str]]:
    """Build step records from externally computed scores.

    Offline records join on (item_id, step_index) where step_index 0 is the
    first scored position. Returns (records, missing-step keys); gaps are the
    caller's error to raise so it can report every missing step at once.
    """
    input_ids = tokenizer.encode(item.input_text)
    gold_target = target_ids(tokenizer, item.input_text, item.target)
    if not input_ids:
        raise EmptyInput(f"item {item.id!r}: input_text encodes to no tokens")
    seq = input_ids + gold_target

    records: list[StepRecord] = []
    missing: list[str] = []
    history: list[float] = []
    for position in range(2, len(seq) + 1):
        step_index = position - 2
        record = scores.get((item.id, step_index))
        if record is None:
            missing.append(f"{item.id}:{step_index}")
            continue
        conf = math.exp(record.max_logprob)
        norm = normalized_confidence(history, conf) if history else None
        gold = seq[position - 1]
        records.append(
            StepRecord(
                item_id=item.id,
                position=position,
                gold_id=gold,
                argmax_id=record.argmax_id,
                confidence=conf,
                normalized_confidence=norm,
                gold_logprob=record.gold_logprob,
                correct=record.argmax_id == gold,
                is_target_step=position > len(input_ids),
            )
        )
        history.append(conf)
    return records, missing


def item_result(item_id: str, records: Sequence[StepRecord]) -> ItemResult:
    """Restrict step records to target steps and fold their correctness."""
    steps = tuple(r for r in records if r.is_target_step)
    return ItemResult(item_id, steps, accurate=all(r.correct for r in steps))


def evaluate_item(model, tokenizer: TokenizerModel, item: TaskItem) -> ItemResult:
    """Teacher-forced evaluation of one item: target-step records + accuracy."""
    return item_result(item.id, score_item(model, tokenizer, item))


def _mean(values: Sequence[float]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate(
    results: Sequence[ItemResult], items: Sequence[TaskItem]
) -> list[TaskAggregate]:
    """One aggregate per (difficulty, unit) present among the results."""
    by_id = {item.id: item for item in items}
    buckets: dict[tuple[str, str], list[ItemResult]] = {}
    for result in results:
        item = by_id[result.item_id]
        buckets.setdefault((item.difficulty, item.unit), []).append(result)

    aggregates = []
    for (difficulty, unit), bucket in sorted(buckets.items()):
        bucket = sorted(bucket, key=lambda r: r.item_id)
        steps = [s for r in bucket for s in r.steps]
        norms = [s.normalized_confidence for s in steps if s.normalized_confidence is not None]
        norms_correct = [
            s.normalized_confidence
            for s in steps
            if s.normalized_confidence is not None and s.correct
        ]
        norms_incorrect = [
            s.normalized_confidence
            for s in steps
            if s.normalized_confidence is not None and not s.correct
        ]
        aggregates.append(
            TaskAggregate(
                difficulty=difficulty,
                unit=unit,
                n_items=len(bucket),
                accuracy=sum(1.0 for r in bucket if r.accurate) / len(bucket),
                mean_norm_conf=_mean(norms),
                mean_norm_conf_correct=_mean(norms_correct),
                mean_norm_conf_incorrect=_mean(norms_incorrect),
                mean_cross_entropy=_mean([cross_entropy(s.gold_logprob) for s in steps]),
            )
        )
    return aggregates


# -- line-delimited I/O -----------------------------------------------------------


def write_step_records(records: Iterable[StepRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {
                "item_id": r.item_id,
                "position": r.position,
                "gold_id": r.gold_id,
                "argmax_id": r.argmax_id,
                "confidence": r.confidence,
            }
            if r.normalized_confidence is not None:
                obj["normalized_confidence"] = r.normalized_confidence
            obj["gold_logprob"] = r.gold_logprob
            obj["correct"] = r.correct
            obj["is_target_step"] = r.is_target_step
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def write_aggregates_csv(aggregates: Sequence[TaskAggregate], fh: TextIO) -> None:
    writer = csv.writer(fh)
    writer.writerow(AGGREGATE_HEADER)
    for agg in aggregates:
        writer.writerow(
            [
                agg.difficulty,
                agg.unit,
                agg.n_items,
                repr(agg.accuracy),
                "" if agg.mean_norm_conf is None else repr(agg.mean_norm_conf),
                "" if agg.mean_norm_conf_correct is None else repr(agg.mean_norm_conf_correct),
                ""
                if agg.mean_norm_conf_incorrect is None
                else repr(agg.mean_norm_conf_incorrect),
                "" if agg.mean_cross_entropy is None else repr(agg.mean_cross_entropy),
            ]
        )


def read_aggregates_csv(path: str | Path) -> list[TaskAggregate]:
    aggregates = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != AGGREGATE_HEADER:
            raise ParseError(f"unexpected aggregate header {header!r}", 1)
        for number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                aggregates.append(
                    TaskAggregate(
                        difficulty=row[0],
                        unit=row[1],
                        n_items=int(row[2]),
                        accuracy=float(row[3]),
                        mean_norm_conf=float(row[4]) if row[4] else None,
                        mean_norm_conf_correct=float(row[5]) if row[5] else None,
                        mean_norm_conf_incorrect=float(row[6]) if row[6] else None,
                        mean_cross_entropy=float(row[7]) if row[7] else None,
                    )
                )
            except (IndexError, ValueError) as exc:
                raise ParseError(str(exc), number) from exc
    return aggregates
