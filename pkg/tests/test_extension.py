import io
import random

import pytest

from tokext import (
    EmptyInput,
    IncompatibleModels,
    KindConflict,
    MARKER,
    TrainerConfig,
    average_tokens,
    compare,
    extend,
    train,
    unknown_token_rate,
)
from tokext.extension import write_comparison_csv

from conftest import make_model


# -- extend ------------------------------------------------------------------------


def test_extend_appends_new_forms_with_consecutive_ids():
    base = make_model("abcde")
    addon = make_model("cdefg", merges=[("f", "g")])
    extended = extend(base, addon)
    base_forms = {e.form for e in base.vocabulary}
    new_entries = [e for e in extended.vocabulary if e.form not in base_forms]
    assert {e.form for e in new_entries} == {"f", "g", "fg"}
    assert sorted(e.id for e in new_entries) == list(
        range(base.vocab_size, base.vocab_size + 3)
    )
    assert extended.vocab_size == base.vocab_size + 3


def test_extend_is_idempotent():
    base = make_model("abc", merges=[("a", "b")])
    extended = extend(base, base)
    assert extended.to_payload() == base.to_payload()


def test_extend_preserves_base_ids_exhaustively():
    base = make_model("abcdefgh", merges=[("a", "b"), ("c", "d")])
    addon = make_model("abefghijkl", merges=[("i", "j"), ("a", "b")])
    extended = extend(base, addon)
    ext_ids = {e.form: e.id for e in extended.vocabulary}
    for entry in base.vocabulary:
        assert ext_ids[entry.form] == entry.id


def test_extend_keeps_base_merge_ranks_and_appends_addon():
    base = make_model("abcd", merges=[("a", "b"), ("c", "d")])
    addon = make_model("abxy", merges=[("a", "b"), ("x", "y")])
    extended = extend(base, addon)
    merges = [(m.left, m.right, m.rank) for m in extended.merges]
    assert merges == [("a", "b", 0), ("c", "d", 1), ("x", "y", 2)]


def test_extend_associative_over_disjoint_addons_up_to_ids():
    base = make_model("abc")
    addon1 = make_model("abcmn", merges=[("m", "n")])
    addon2 = make_model("abcpq", merges=[("p", "q")])
    one = extend(extend(base, addon1), addon2)
    two = extend(extend(base, addon2), addon1)
    assert {e.form for e in one.vocabulary} == {e.form for e in two.vocabulary}
    assert {(m.left, m.right) for m in one.merges} == {(m.left, m.right) for m in two.merges}
    # and base ids agree regardless of addon order
    for entry in base.vocabulary:
        assert {e.form: e.id for e in one.vocabulary}[entry.form] == entry.id
        assert {e.form: e.id for e in two.vocabulary}[entry.form] == entry.id


def test_extend_marker_mismatch():
    base = make_model("ab")
    addon = make_model("ab", marker="@")
    with pytest.raises(IncompatibleModels):
        extend(base, addon)


def test_extend_byte_layout_mismatch():
    base = make_model("ab", specials=("<unk>", "<s>", "</s>"))
    addon = make_model("ab", specials=("<unk>",))  # byte block shifts by 2
    with pytest.raises(IncompatibleModels):
        extend(base, addon)


def test_extend_kind_conflict():
    base = make_model("ab", specials=("<unk>", "<s>", "</s>"))
    # "a" is a special in the addon but a normal token in base; the special
    # count stays at 3 so the byte-token layouts agree
    addon_conflicting = make_model("b", specials=("<unk>", "<s>", "a"))
    with pytest.raises(KindConflict):
        extend(base, addon_conflicting)


def test_extension_tokenizes_korean_sentence_into_fewer_units():
    """A base-like model splits unknown syllables into bytes (19 tokens); the
    extended model covers them with subword merges (8 tokens)."""
    sentence = "안녕하세요 만나서반가워"
    base = make_model("안하요만나서반가")  # 녕, 세, 워 missing -> byte fallback
    addon = make_model(
        "안녕하세요만나서반가워",
        merges=[("안", "녕"), ("하", "세"), ("만", "나"), ("만나", "서"), ("반", "가")],
    )
    extended = extend(base, addon)

    base_ids = base.encode(sentence)
    ext_ids = extended.encode(sentence)
    assert len(base_ids) == 19
    assert len(ext_ids) == 8
    assert sum(1 for i in base_ids if base.kind_of(i) == "byte") == 9
    assert sum(1 for i in ext_ids if extended.kind_of(i) == "byte") == 0
    forms = [extended.id_to_form(i) for i in ext_ids]
    assert forms == [MARKER, "안녕", "하세", "요", MARKER, "만나서", "반가", "워"]
    assert extended.decode(ext_ids) == sentence
    assert base.decode(base_ids) == sentence


def test_extended_never_longer_than_base():
    rng = random.Random(3)
    corpus_base = ["".join(rng.choice("abcdef ") for _ in range(60)) for _ in range(40)]
    corpus_addon = ["".join(rng.choice("uvwxyz ") for _ in range(60)) for _ in range(40)]

    def cfg(corpus, extra):
        chars = {ch for line in corpus for w in line.split() for ch in MARKER + w}
        return TrainerConfig(3 + 256 + len(chars) + extra, min_pair_frequency=1)

    base = train(corpus_base, cfg(corpus_base, 20))
    addon = train(corpus_addon, cfg(corpus_addon, 20))
    extended = extend(base, addon)
    for text in corpus_base + corpus_addon + ["mixed abz uvq", "한국어 텍스트"]:
        assert len(extended.encode(text)) <= len(base.encode(text))


# -- statistics ---------------------------------------------------------------------


def test_unknown_token_rate_ratio():
    # 10 non-special tokens, 2 of them bytes -> 0.2
    model = make_model("abcdefgh")
    sentences = ["abcdefgh", "é"]  # é is two UTF-8 bytes
    ids = [i for s in sentences for i in model.encode(s)]
    non_special = [i for i in ids if model.kind_of(i) != "special"]
    bytes_ = [i for i in non_special if model.kind_of(i) == "byte"]
    assert (len(non_special), len(bytes_)) == (12, 2)
    assert unknown_token_rate(model, sentences) == pytest.approx(2 / 12)


def test_unknown_token_rate_zero_when_covered():
    model = make_model("abc")
    assert unknown_token_rate(model, ["ab c", "cab"]) == 0.0


def test_unknown_token_rate_single_unknown_char():
    # one 3-byte character: every emitted token except the marker is a byte token
    model = make_model("ab")
    ids = model.encode("한")
    non_special = [i for i in ids if model.kind_of(i) != "special"]
    byte_only = [i for i in non_special if model.kind_of(i) == "byte"]
    assert len(byte_only) == 3
    # the marker token precedes the bytes; measure rate over the bare character
    rate = unknown_token_rate(model, ["한"])
    assert rate == pytest.approx(3 / 4)


def test_unknown_token_rate_empty_input():
    model = make_model("ab")
    with pytest.raises(EmptyInput):
        unknown_token_rate(model, [])


def test_average_tokens_mean():
    model = make_model("abcd")
    # "ab" -> 3 tokens (marker, a, b); "a b c" -> 6
    assert average_tokens(model, ["ab", "a b c"]) == pytest.approx(4.5)


def test_average_tokens_empty_sentence_counts_zero():
    model = make_model("ab")
    assert average_tokens(model, [""]) == 0.0


def test_compare_rows_in_input_order():
    model_a = make_model("abc")
    model_b = make_model("abcdef")
    rows = compare(
        [("a", model_a), ("b", model_b)], ["abc def"], extended=[False, True]
    )
    assert [r.tokenizer_label for r in rows] == ["a", "b"]
    assert [r.extended for r in rows] == [False, True]
    identical = compare([("x", model_a), ("y", model_a)], ["abc"])
    assert identical[0].unknown_token_rate == identical[1].unknown_token_rate
    assert identical[0].avg_tokens_per_sentence == identical[1].avg_tokens_per_sentence


def test_compare_requires_models():
    with pytest.raises(EmptyInput):
        compare([], ["abc"])


def test_comparison_csv_format():
    model = make_model("ab")
    rows = compare([("base", model)], ["ab"], extended=[False])
    buf = io.StringIO()
    write_comparison_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "label,extended,unknown_token_rate,avg_tokens_per_sentence"
    assert lines[1] == "base,false,0.0000,3.00"
