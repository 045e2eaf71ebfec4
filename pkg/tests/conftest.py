import pytest

from tokext import MARKER, TokenizerModel


def make_model(chars, merges=(), specials=("<unk>", "<s>", "</s>"),
               byte_fallback=True, marker=MARKER):
    """Small handmade model: marker + chars + whatever forms the merges build."""
    normal = sorted(set(chars) | {marker})
    seen = set(normal)
    for left, right in merges:
        form = left + right
        if form not in seen:
            normal.append(form)
            seen.add(form)
    return TokenizerModel.build(
        list(specials), normal, list(merges), marker=marker, byte_fallback=byte_fallback
    )


@pytest.fixture
def ascii_model():
    """Characters a-z plus space handling, with an (a,b) merge."""
    return make_model("abcdefghijklmnopqrstuvwxyz", merges=[("a", "b")])


@pytest.fixture
def abc_model():
    """The 4-form char model (a,b,c,marker -> ids 0..3) used by the metric fixtures."""
    return TokenizerModel.build(
        [], ["a", "b", "c", MARKER], [], byte_fallback=False
    )
