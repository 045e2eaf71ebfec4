"""Vocabulary/merge extension of a base tokenizer, plus coverage statistics.

extend() appends an addon model's new forms after the base vocabulary
(base ids never move) and its new merge rules after all base merges
(strictly lower priority), which preserves base behavior on base-language
text and makes per-sentence token counts monotonically non-increasing.

The statistics mirror a coverage comparison table: the fraction of emitted
tokens that are byte (unknown) tokens, and the mean token count per
sentence, both over non-special tokens.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence, TextIO

from .errors import EmptyInput, IncompatibleModels, KindConflict
from .tokenizer import MergeRule, TokenEntry, TokenizerModel

COMPARISON_HEADER = ["label", "extended", "unknown_token_rate", "avg_tokens_per_sentence"]


@dataclass(frozen=True)
class ComparisonRow:
    """One tokenizer's coverage statistics over a sentence set."""

    tokenizer_label: str
    extended: bool
    unknown_token_rate: float
    avg_tokens_per_sentence: float


def extend(base: TokenizerModel, addon: TokenizerModel) -> TokenizerModel:
    """Append addon vocabulary and merges to base.

    Base entries keep their ids; addon forms not present in base are appended
    with consecutive new ids in addon-id order. Addon merges not textually
    identical to a base merge follow all base merges. Marker, byte-token
    layout, specials and flags come from base.
    """
    if base.marker != addon.marker:
        raise IncompatibleModels(
            f"marker mismatch: base {base.marker!r} vs addon {addon.marker!r}"
        )
    base_bytes = {e.form: e.id for e in base.vocabulary if e.kind == "byte"}
    addon_bytes = {e.form: e.id for e in addon.vocabulary if e.kind == "byte"}
    if addon_bytes and base_bytes != addon_bytes:
        raise IncompatibleModels("byte-token layouts differ between base and addon")

    base_kinds = {e.form: e.kind for e in base.vocabulary}
    vocab = list(base.vocabulary)
    next_id = len(vocab)
    for entry in sorted(addon.vocabulary, key=lambda e: e.id):
        kind = base_kinds.get(entry.form)
        if kind is None:
            vocab.append(TokenEntry(entry.form, next_id, entry.kind))
            next_id += 1
        elif kind != entry.kind:
            raise KindConflict(
                f"form {entry.form!r} is {kind} in base but {entry.kind} in addon"
            )

    base_merge_keys = {(m.left, m.right) for m in base.merges}
    merges = list(base.merges)
    rank = len(merges)
    for m in sorted(addon.merges, key=lambda m: m.rank):
        if (m.left, m.right) not in base_merge_keys:
            merges.append(MergeRule(m.left, m.right, rank))
            rank += 1

    return TokenizerModel(
        vocab,
        merges,
        marker=base.marker,
        byte_fallback=base.byte_fallback,
        specials=list(base.specials),
    )


def _token_kinds(model: TokenizerModel, sentences: Sequence[str]) -> list[list[str]]:
    return [[model.kind_of(t) for t in model.encode(s)] for s in sentences]


def unknown_token_rate(model: TokenizerModel, sentences: Sequence[str]) -> float:
    """Fraction of emitted non-special tokens that are byte tokens."""
    if not sentences:
        raise EmptyInput("no sentences to tokenize")
    byte_count = 0
    total = 0
    for kinds in _token_kinds(model, sentences):
        for kind in kinds:
            if kind == "special":
                continue
            total += 1
            if kind == "byte":
                byte_count += 1
    return byte_count / total if total else 0.0


def average_tokens(model: TokenizerModel, sentences: Sequence[str]) -> float:
    """Mean non-special token count per sentence."""
    if not sentences:
        raise EmptyInput("no sentences to tokenize")
    counts = [
        sum(1 for kind in kinds if kind != "special")
        for kinds in _token_kinds(model, sentences)
    ]
    return sum(counts) / len(counts)


def compare(
    models: Sequence[tuple[str, TokenizerModel]],
    sentences: Sequence[str],
    extended: Sequence[bool] | None = None,
) -> list[ComparisonRow]:
    """One ComparisonRow per model, in input order."""
    if not models:
        raise EmptyInput("no models to compare")
    if extended is None:
        extended = [False] * len(models)
    if len(extended) != len(models):
        raise ValueError("extended flags must align with models")
    return [
        ComparisonRow(
            tokenizer_label=label,
            extended=flag,
            unknown_token_rate=unknown_token_rate(model, sentences),
            avg_tokens_per_sentence=average_tokens(model, sentences),
        )
        for (label, model), flag in zip(models, extended)
    ]


def write_comparison_csv(rows: Sequence[ComparisonRow], fh: TextIO) -> None:
    """Emit comparison rows as CSV (rate to 4 decimals, average to 2)."""
    writer = csv.writer(fh)
    writer.writerow(COMPARISON_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.tokenizer_label,
                "true" if row.extended else "false",
                f"{row.unknown_token_rate:.4f}",
                f"{row.avg_tokens_per_sentence:.2f}",
            ]
        )
