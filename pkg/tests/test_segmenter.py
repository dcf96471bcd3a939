import pytest
from hypothesis import given, settings, strategies as st

import subalign as sa
from oracles import brute_force_segmentations, brute_force_subword_set

ABC_VOCAB = sa.SubwordVocab.from_tokens(["[UNK]", "a", "ab", "abc", "##b", "##c", "##bc"])


def test_default_whole_word():
    assert sa.tokenize_default("abc", ABC_VOCAB) == ("abc",)


def test_default_dead_end_falls_back_to_unk():
    assert sa.tokenize_default("abd", ABC_VOCAB) == ("[UNK]",)


def test_default_multi_piece():
    assert sa.tokenize_default("ab", ABC_VOCAB) == ("ab",)
    vocab = sa.SubwordVocab.from_tokens(["[UNK]", "un", "play", "##able", "##play"])
    assert sa.tokenize_default("unplayable", vocab) == ("un", "##play", "##able")


def test_enumerate_abc_exhaustive():
    segs = sa.enumerate_segmentations("abc", ABC_VOCAB, cap=16)
    assert segs == [("abc",), ("a", "##bc"), ("ab", "##c"), ("a", "##b", "##c")]


def test_enumerate_single():
    vocab = sa.SubwordVocab.from_tokens(["[UNK]", "x"])
    assert sa.enumerate_segmentations("x", vocab, cap=16) == [("x",)]


def test_enumerate_unk_when_no_segmentation():
    assert sa.enumerate_segmentations("abd", ABC_VOCAB, cap=16) == [("[UNK]",)]


def test_subword_set_union():
    assert sa.subword_set("abc", ABC_VOCAB, 16) == {"abc", "a", "##bc", "ab", "##c", "##b"}
    vocab = sa.SubwordVocab.from_tokens(["[UNK]", "x"])
    assert sa.subword_set("x", vocab, 16) == {"x"}


def test_cap_truncates_but_keeps_default():
    # greedy default (abc, ##d) sorts after (ab, ##cd); cap=1 must keep the default
    vocab = sa.SubwordVocab.from_tokens(["[UNK]", "ab", "abc", "##cd", "##d"])
    full = sa.enumerate_segmentations("abcd", vocab, cap=16)
    assert full == [("ab", "##cd"), ("abc", "##d")]
    assert sa.enumerate_segmentations("abcd", vocab, cap=1) == [("abc", "##d")]


def test_cap_must_be_positive():
    with pytest.raises(ValueError):
        sa.enumerate_segmentations("abc", ABC_VOCAB, cap=0)


def test_long_words_bypass_enumeration():
    word = "ab" * 21  # 42 chars
    vocab = sa.SubwordVocab.from_tokens(["[UNK]", "ab", "##ab", "a", "##b", "##a", "b"])
    segs = sa.enumerate_segmentations(word, vocab, cap=1000)
    assert segs == [sa.tokenize_default(word, vocab)]


def test_vocab_requires_unk():
    with pytest.raises(ValueError):
        sa.SubwordVocab.from_tokens(["a", "b"])


def test_vocab_rejects_bare_marker():
    with pytest.raises(ValueError):
        sa.SubwordVocab.from_tokens(["[UNK]", "##"])


def test_reconstruct():
    assert sa.reconstruct(("a", "##b", "##c"), ABC_VOCAB) == "abc"


def test_reference_wordpiece_conformance(fixture_vocab, reference_tokenizations):
    assert len(reference_tokenizations) == 50
    for record in reference_tokenizations:
        ours = list(sa.tokenize_default(record["word"], fixture_vocab))
        assert ours == record["pieces"], record["word"]


def test_enumeration_matches_brute_force_on_fixture_words(fixture_vocab, reference_tokenizations):
    for record in reference_tokenizations:
        word = record["word"]
        if len(word) > 12:
            continue
        expected = brute_force_segmentations(word, fixture_vocab.tokens)
        got = sa.enumerate_segmentations(word, fixture_vocab, cap=5000)
        if not expected:
            assert got == [("[UNK]",)]
        else:
            assert sorted(got) == sorted(expected)
            assert sa.subword_set(word, fixture_vocab, 5000) == brute_force_subword_set(
                word, fixture_vocab.tokens)


def test_enumeration_ordering(fixture_vocab):
    segs = sa.enumerate_segmentations("Madrid", fixture_vocab, cap=5000)
    assert segs == sorted(segs, key=lambda s: (len(s), s))


_vocab_pieces = st.lists(
    st.text(alphabet="ab", min_size=1, max_size=3), min_size=1, max_size=10
)
_words = st.text(alphabet="ab", min_size=1, max_size=7)


@settings(max_examples=200)
@given(_words, _vocab_pieces, _vocab_pieces)
def test_enumeration_agrees_with_split_oracle(word, initial, continuations):
    vocab = sa.SubwordVocab.from_tokens(
        ["[UNK]"] + initial + ["##" + p for p in continuations]
    )
    got = sa.enumerate_segmentations(word, vocab, cap=4096)
    expected = brute_force_segmentations(word, vocab.tokens)
    if not expected:
        assert got == [("[UNK]",)]
        return
    assert sorted(got) == sorted(expected)
    assert got == sorted(got, key=lambda s: (len(s), s))
    for seg in got:
        assert sa.reconstruct(seg, vocab) == word
    default = sa.tokenize_default(word, vocab)
    if default != ("[UNK]",):
        assert default in got
