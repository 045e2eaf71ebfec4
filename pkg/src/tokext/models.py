"""Reference scorers: anything mapping a context to log-probabilities over a vocabulary.

Every scorer exposes `vocab_size` and `score(context) -> ScoreVector`; the
bundled implementations are desk-scale stand-ins for a neural LM (uniform,
add-k n-gram, longest-suffix lookup) plus a loader for offline step scores
produced by an external model. All scorers are immutable after construction
and safe to call concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyCorpus, InvalidScore, ParseError

NORMALIZATION_TOL = 1e-9
_BEGIN_PAD = -1


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """A proper log-probability distribution over the vocabulary."""

    logprobs: np.ndarray

    def __post_init__(self):
        total = _logsumexp(self.logprobs)
        if abs(total) > NORMALIZATION_TOL:
            raise ValueError(f"logprobs do not normalize: logsumexp = {total}")

    @classmethod
    def from_logits(cls, logits: Sequence[float] | np.ndarray) -> "ScoreVector":
        arr = np.asarray(logits, dtype=np.float64)
        return cls(arr - _logsumexp(arr))

    @classmethod
    def from_probs(cls, probs: Sequence[float] | np.ndarray) -> "ScoreVector":
        arr = np.asarray(probs, dtype=np.float64)
        return cls.from_logits(np.log(arr))

    @property
    def argmax_id(self) -> int:
        # np.argmax returns the first maximum: lowest id on ties
        return int(np.argmax(self.logprobs))

    @property
    def max_logprob(self) -> float:
        return float(self.logprobs[self.argmax_id])


def _logsumexp(arr: np.ndarray) -> float:
    m = float(np.max(arr))
    return m + float(np.log(np.sum(np.exp(arr - m))))


class UniformModel:
    """Assigns every token probability 1/|V| regardless of context."""

    def __init__(self, vocab_size: int):
        if vocab_size <= 0:
            raise ValueError("vocab_size must be positive")
        self.vocab_size = vocab_size
        self._scores = ScoreVector(np.full(vocab_size, -np.log(vocab_size)))

    def score(self, context: Sequence[int]) -> ScoreVector:
        return self._scores


class NGramModel:
    """Add-k smoothed n-gram scorer over token ids.

    Contexts shorter than order-1 are left-padded with a begin sentinel, the
    same padding used while counting, so every context is scoreable.
    """

    def __init__(
        self,
        order: int,
        k: float,
        context_counts: dict[tuple[int, ...], dict[int, int]],
        vocab_size: int,
    ):
        self.order = order
        self.k = k
        self.context_counts = context_counts
        self.vocab_size = vocab_size

    def score(self, context: Sequence[int]) -> ScoreVector:
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        if self.order > 1 and len(ctx) < self.order - 1:
            ctx = (_BEGIN_PAD,) * (self.order - 1 - len(ctx)) + ctx
        row = self.context_counts.get(ctx, {})
        counts = np.zeros(self.vocab_size, dtype=np.float64)
        for token_id, count in row.items():
            counts[token_id] = count
        probs = (counts + self.k) / (counts.sum() + self.k * self.vocab_size)
        return ScoreVector(np.log(probs))


def ngram_train(
    sequences: Sequence[Sequence[int]],
    order: int,
    k: float,
    vocab_size: int | None = None,
) -> NGramModel:
    """Count id n-grams (with begin-padding) and wrap them in an NGramModel."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if k <= 0:
        raise ValueError("k must be positive")
    if not sequences:
        raise EmptyCorpus("no sequences to train on")

    context_counts: dict[tuple[int, ...], dict[int, int]] = {}
    max_id = -1
    for seq in sequences:
        padded = [_BEGIN_PAD] * (order - 1) + list(seq)
        for token_id in seq:
            max_id = max(max_id, token_id)
        for i in range(order - 1, len(padded)):
            ctx = tuple(padded[i - order + 1 : i])
            row = context_counts.setdefault(ctx, {})
            row[padded[i]] = row.get(padded[i], 0) + 1
    if vocab_size is None:
        vocab_size = max_id + 1
    if vocab_size <= 0:
        raise ValueError("vocab_size must be positive")
    return NGramModel(order, k, context_counts, vocab_size)


class SuffixModel:
    """Longest-suffix lookup scorer.

    Finds the longest suffix of the context that occurs (with at least one
    continuation token after it) in the reference sequences or in the context
    itself, then distributes probability over the observed continuations with
    add-0.01 smoothing. The context's own tail has no continuation, so it
    never matches itself. Falls back to uniform when no suffix matches.
    """

    SMOOTHING = 0.01

    def __init__(self, reference: Sequence[Sequence[int]], vocab_size: int):
        if not reference:
            raise EmptyCorpus("reference corpus is empty")
        if vocab_size <= 0:
            raise ValueError("vocab_size must be positive")
        self.reference = [list(seq) for seq in reference]
        self.vocab_size = vocab_size

    def _continuations(self, suffix: list[int], haystacks: list[list[int]]) -> dict[int, int]:
        counts: dict[int, int] = {}
        n = len(suffix)
        for seq in haystacks:
            for start in range(len(seq) - n):  # occurrence must have a continuation
                if seq[start : start + n] == suffix:
                    nxt = seq[start + n]
                    counts[nxt] = counts.get(nxt, 0) + 1
        return counts

    def score(self, context: Sequence[int]) -> ScoreVector:
        ctx = list(context)
        haystacks = self.reference + [ctx]
        longest = max((len(seq) - 1 for seq in haystacks), default=0)
        for length in range(min(len(ctx), longest), 0, -1):
            counts = self._continuations(ctx[-length:], haystacks)
            if counts:
                arr = np.zeros(self.vocab_size, dtype=np.float64)
                for token_id, count in counts.items():
                    arr[token_id] = count
                probs = (arr + self.SMOOTHING) / (
                    arr.sum() + self.SMOOTHING * self.vocab_size
                )
                return ScoreVector(np.log(probs))
        return UniformModel(self.vocab_size).score(ctx)


@dataclass(frozen=True)
class OfflineStepScore:
    """One teacher-forced step scored by an external model.

    step_index is 0-based over the scored positions of an item (index 0 is
    the prediction made after the item's first input token).
    """

    item_id: str
    step_index: int
    gold_logprob: float
    max_logprob: float
    argmax_id: int

    def __post_init__(self):
        if self.gold_logprob > 0 or self.max_logprob > 0:
            raise InvalidScore(
                f"{self.item_id}[{self.step_index}]: log-probabilities must be <= 0"
            )
        if self.max_logprob < self.gold_logprob:
            raise InvalidScore(
                f"{self.item_id}[{self.step_index}]: max_logprob "
                f"{self.max_logprob} < gold_logprob {self.gold_logprob}"
            )
        if self.step_index < 0:
            raise InvalidScore(f"{self.item_id}: negative step_index")


def load_offline_scores(path: str | Path) -> list[OfflineStepScore]:
    """Parse a JSONL file of offline step scores, validating each record."""
    records: list[OfflineStepScore] = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                record = OfflineStepScore(
                    item_id=str(obj["item_id"]),
                    step_index=int(obj["step_index"]),
                    gold_logprob=float(obj["gold_logprob"]),
                    max_logprob=float(obj["max_logprob"]),
                    argmax_id=int(obj["argmax_id"]),
                )
            except InvalidScore:
                raise
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(str(exc), number) from exc
            records.append(record)
    return records
