"""Learn a byte-fallback BPE tokenizer (vocabulary + ordered merges) from a corpus.

The trainer seeds the vocabulary with specials, the 256 byte tokens, and
every distinct character of the marker-pretokenized corpus, then greedily
merges the most frequent adjacent symbol pair until the target vocabulary
size is reached or no pair is frequent enough. Ties break on
(count desc, left form asc by code point, right form asc), which makes the
merge sequence fully deterministic and lets a naive reference reproduce it
exactly.

Pair counts are maintained incrementally (a lazy max-heap plus per-word
recounts of touched words); `verify_counts=True` cross-checks them against
a brute-force recount after every merge and is meant for small corpora only.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field

from .errors import ConfigError, EmptyCorpus
from .tokenizer import MARKER, MergeRule, TokenizerModel, pretokenize

DEFAULT_SPECIALS = ["<unk>", "<s>", "</s>"]

Pair = tuple[str, str]


@dataclass
class TrainerConfig:
    """Hyperparameters for BPE training.

    target_vocab_size must cover specials + 256 byte tokens + every distinct
    corpus character; anything above that budget becomes learned merges.
    """

    target_vocab_size: int
    min_pair_frequency: int = 2
    marker: str = MARKER
    specials: list[str] = field(default_factory=lambda: list(DEFAULT_SPECIALS))

    def __post_init__(self):
        if self.target_vocab_size <= 0:
            raise ConfigError("target_vocab_size must be positive")
        if self.min_pair_frequency <= 0:
            raise ConfigError("min_pair_frequency must be positive")


def count_pairs(segmented_corpus: list[tuple[list[str], int]]) -> dict[Pair, int]:
    """Count adjacent symbol pairs, weighted by segment frequency."""
    counts: Counter[Pair] = Counter()
    for symbols, freq in segmented_corpus:
        if freq <= 0:
            raise ValueError("frequencies must be positive")
        for left, right in zip(symbols, symbols[1:]):
            counts[(left, right)] += freq
    return dict(counts)


def _merge_word(symbols: list[str], pair: Pair, merged: str) -> list[str]:
    """Replace every occurrence of pair left-to-right (non-overlapping)."""
    out: list[str] = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def train(
    corpus: list[str],
    config: TrainerConfig,
    *,
    verify_counts: bool = False,
) -> TokenizerModel:
    """Train a TokenizerModel on text lines.

    Raises EmptyCorpus when the corpus yields no pretokens and ConfigError
    when target_vocab_size is below the initial vocabulary size.
    """
    pretoken_freqs: Counter[str] = Counter()
    for line in corpus:
        pretoken_freqs.update(pretokenize(line, config.marker))
    if not pretoken_freqs:
        raise EmptyCorpus("corpus contains no text")

    chars = sorted({ch for pretoken in pretoken_freqs for ch in pretoken})
    initial_size = len(config.specials) + 256 + len(chars)
    if config.target_vocab_size < initial_size:
        raise ConfigError(
            f"target_vocab_size {config.target_vocab_size} is below the initial "
            f"vocabulary size {initial_size} "
            f"({len(config.specials)} specials + 256 bytes + {len(chars)} characters)"
        )

    words = [(list(pretoken), freq) for pretoken, freq in sorted(pretoken_freqs.items())]
    forms: set[str] = set(chars) | set(config.specials)
    normal_forms: list[str] = list(chars)
    merge_pairs: list[Pair] = []

    pair_counts: dict[Pair, int] = {}
    pair_to_words: dict[Pair, set[int]] = {}
    heap: list[tuple[int, str, str]] = []

    def add_word_pairs(index: int, symbols: list[str], freq: int, sign: int) -> None:
        # every positive count change pushes an entry so the heap always
        # holds each pair's current count somewhere
        for pair in zip(symbols, symbols[1:]):
            new = pair_counts.get(pair, 0) + sign * freq
            if new > 0:
                pair_counts[pair] = new
                heapq.heappush(heap, (-new, pair[0], pair[1]))
                if sign > 0:
                    pair_to_words.setdefault(pair, set()).add(index)
            else:
                pair_counts.pop(pair, None)
                pair_to_words.pop(pair, None)

    for index, (symbols, freq) in enumerate(words):
        add_word_pairs(index, symbols, freq, +1)

    vocab_size = initial_size
    while vocab_size < config.target_vocab_size:
        best: Pair | None = None
        while heap:
            neg_count, left, right = heapq.heappop(heap)
            if pair_counts.get((left, right)) != -neg_count:
                continue  # stale entry
            if -neg_count < config.min_pair_frequency:
                heapq.heappush(heap, (neg_count, left, right))
                break
            best = (left, right)
            break
        if best is None:
            break

        merged = best[0] + best[1]
        for index in sorted(pair_to_words.get(best, ())):
            symbols, freq = words[index]
            add_word_pairs(index, symbols, freq, -1)
            for pair in set(zip(symbols, symbols[1:])):
                if index in pair_to_words.get(pair, ()):
                    pair_to_words[pair].discard(index)
            new_symbols = _merge_word(symbols, best, merged)
            words[index] = (new_symbols, freq)
            add_word_pairs(index, new_symbols, freq, +1)
        pair_counts.pop(best, None)
        pair_to_words.pop(best, None)

        merge_pairs.append(best)
        if merged not in forms:
            forms.add(merged)
            normal_forms.append(merged)
            vocab_size += 1

        if verify_counts:
            recount = count_pairs(words)
            assert pair_counts == recount, (
                f"incremental pair counts diverged after merge {best}"
            )

    return TokenizerModel.build(
        specials=list(config.specials),
        normal_forms=normal_forms,
        merge_pairs=merge_pairs,
        marker=config.marker,
        byte_fallback=True,
    )
