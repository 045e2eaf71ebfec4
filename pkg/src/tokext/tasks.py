"""Compile curated three-segment test sentences into next-token-prediction tasks.

Each sentence (prefix | target | suffix) yields two task items: an easy one
whose input is the full sentence, a separator, and the prefix again (the
answer is exposed in the input), and a hard one whose input is the prefix
only. The target unit is classified by how many tokens the target occupies
in context under a base and an extended tokenizer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BoundaryMerge, ParseError
from .tokenizer import TokenizerModel

DEFAULT_SEPARATOR = "\n"

DIFFICULTIES = ("easy", "hard")
UNITS = ("token", "character", "word")


@dataclass(frozen=True)
class TestSentence:
    """A curated sentence split around its single-answer target."""

    __test__ = False  # not a pytest class, despite the name

    id: str
    prefix: str
    target: str
    suffix: str

    def __post_init__(self):
        if not self.target:
            raise ValueError(f"sentence {self.id!r} has an empty target")

    @property
    def text(self) -> str:
        return self.prefix + self.target + self.suffix


@dataclass(frozen=True)
class TaskItem:
    """One compiled prediction task (a sentence at one difficulty)."""

    id: str
    difficulty: str
    unit: str
    input_text: str
    target: str


@dataclass(frozen=True)
class UnitClassification:
    base_token_count: int
    ext_token_count: int
    unit: str


@dataclass(frozen=True)
class Exclusion:
    id: str
    reason: str


def target_ids(model: TokenizerModel, prefix: str, target: str) -> list[int]:
    """Token ids the target occupies when encoded in context after prefix.

    encode(prefix) must be a literal leading subsequence of
    encode(prefix + target); a merge across the boundary raises BoundaryMerge.
    """
    prefix_ids = model.encode(prefix)
    full_ids = model.encode(prefix + target)
    if full_ids[: len(prefix_ids)] != prefix_ids:
        raise BoundaryMerge(
            f"tokenization of {prefix!r} is not a prefix of the tokenization "
            f"of prefix+target ({target!r} merged across the boundary)"
        )
    return full_ids[len(prefix_ids):]


def classify_unit(
    sentence: TestSentence, base: TokenizerModel, ext: TokenizerModel
) -> UnitClassification:
    """token: both 1; character: base >1, ext 1; word: both >1; else unclassified."""
    base_count = len(target_ids(base, sentence.prefix, sentence.target))
    ext_count = len(target_ids(ext, sentence.prefix, sentence.target))
    if base_count == 1 and ext_count == 1:
        unit = "token"
    elif base_count > 1 and ext_count == 1:
        unit = "character"
    elif base_count > 1 and ext_count > 1:
        unit = "word"
    else:
        unit = "unclassified"
    return UnitClassification(base_count, ext_count, unit)


def build_tasks(
    sentences: Sequence[TestSentence],
    base: TokenizerModel,
    ext: TokenizerModel,
    separator: str = DEFAULT_SEPARATOR,
) -> tuple[list[TaskItem], list[Exclusion]]:
    """Compile sentences into easy/hard task items plus an exclusions report.

    Item ids are "<sentence_id>:<difficulty>" so offline scores can join on
    them unambiguously. Sentences whose target merges across the boundary,
    encodes to zero tokens, or classifies as unclassified are excluded.
    """
    items: list[TaskItem] = []
    exclusions: list[Exclusion] = []
    for sentence in sentences:
        try:
            classification = classify_unit(sentence, base, ext)
        except BoundaryMerge as exc:
            exclusions.append(Exclusion(sentence.id, f"boundary merge: {exc}"))
            continue
        if classification.base_token_count == 0 or classification.ext_token_count == 0:
            exclusions.append(Exclusion(sentence.id, "target encodes to zero tokens"))
            continue
        if classification.unit == "unclassified":
            exclusions.append(
                Exclusion(
                    sentence.id,
                    "unclassified target unit (base "
                    f"{classification.base_token_count} token(s), ext "
                    f"{classification.ext_token_count})",
                )
            )
            continue
        easy_input = sentence.text + separator + sentence.prefix
        items.append(
            TaskItem(
                id=f"{sentence.id}:easy",
                difficulty="easy",
                unit=classification.unit,
                input_text=easy_input,
                target=sentence.target,
            )
        )
        items.append(
            TaskItem(
                id=f"{sentence.id}:hard",
                difficulty="hard",
                unit=classification.unit,
                input_text=sentence.prefix,
                target=sentence.target,
            )
        )
    return items, exclusions


# -- line-delimited I/O ---------------------------------------------------------


def read_sentences(path: str | Path) -> list[TestSentence]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                sentences.append(
                    TestSentence(
                        id=str(obj["id"]),
                        prefix=str(obj["prefix"]),
                        target=str(obj["target"]),
                        suffix=str(obj["suffix"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(str(exc), number) from exc
    return sentences


def write_sentences(sentences: Iterable[TestSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(
                json.dumps(
                    {"id": s.id, "prefix": s.prefix, "target": s.target, "suffix": s.suffix},
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_tasks(path: str | Path) -> list[TaskItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                items.append(
                    TaskItem(
                        id=str(obj["id"]),
                        difficulty=str(obj["difficulty"]),
                        unit=str(obj["unit"]),
                        input_text=str(obj["input_text"]),
                        target=str(obj["target"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(str(exc), number) from exc
    return items


def write_tasks(items: Iterable[TaskItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(
                json.dumps(
                    {
                        "id": item.id,
                        "difficulty": item.difficulty,
                        "unit": item.unit,
                        "input_text": item.input_text,
                        "target": item.target,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def write_exclusions(exclusions: Iterable[Exclusion], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for exc in exclusions:
            fh.write(json.dumps({"id": exc.id, "reason": exc.reason}, ensure_ascii=False) + "\n")
