"""Naive quadratic BPE training reference used as a test oracle.

Re-counts every adjacent pair from scratch each round over the full
segmented corpus and picks (count desc, left asc, right asc) — the same
tie-break the real trainer documents, with none of its incremental
machinery. Only suitable for tiny corpora.
"""

from collections import Counter


def naive_train_merges(corpus, target_vocab_size, min_pair_frequency=2,
                       marker="▁", n_specials=3):
    """Return (merge list, final segmentation dict pretoken->symbols)."""
    pretokens = Counter()
    for line in corpus:
        for word in line.split():
            pretokens[marker + word] += 1
    assert pretokens, "empty corpus"

    segments = {p: list(p) for p in pretokens}
    chars = sorted({ch for p in pretokens for ch in p})
    vocab = set(chars)
    vocab_size = n_specials + 256 + len(chars)
    assert target_vocab_size >= vocab_size, "target below initial vocabulary"

    merges = []
    while vocab_size < target_vocab_size:
        counts = Counter()
        for pretoken, freq in pretokens.items():
            symbols = segments[pretoken]
            for pair in zip(symbols, symbols[1:]):
                counts[pair] += freq
        if not counts:
            break
        best = min(counts.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
        (left, right), count = best
        if count < min_pair_frequency:
            break
        merged = left + right
        for pretoken in segments:
            symbols = segments[pretoken]
            out, i = [], 0
            while i < len(symbols):
                if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
                    out.append(merged)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            segments[pretoken] = out
        merges.append((left, right))
        if merged not in vocab:
            vocab.add(merged)
            vocab_size += 1
    return merges, segments
