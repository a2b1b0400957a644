import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belinkit.errors import ParameterError, RangeError
from belinkit.preprocess import (
    BOS_ID, EOS_ID, PAD_ID, RESERVED, SEP_ID, UNK_ID,
    NormalizationConfig, TokenSequence, Vocabulary, build_vocabulary,
    detokenize, normalize_text, tokenize, truncate,
)

TEXT_PIECES = st.sampled_from([
    "দেখুন", "এখানে", "খবর", "hello", "world", "https://x.example/p?q=1",
    "www.site.org", "😀", "👍🏽", "👨‍👩‍👧", "🇧🇩", "!!!", "।।", "...",
    "１２３", "ﬁ", "  ", "\t", "\n", "#", "*", "a", "-", "—",
])
fuzz_text = st.lists(TEXT_PIECES | st.text(max_size=6), max_size=20).map("".join)


def test_url_removed():
    assert normalize_text("দেখুন https://x.example/page এখানে") == "দেখুন এখানে"


def test_whitespace_and_punctuation_runs():
    assert normalize_text("a   b!!!") == "a b!"


def test_nfkc_fullwidth_digits():
    assert normalize_text("１２３") == "123"


def test_emoji_removed_but_ascii_digits_kept():
    assert normalize_text("খবর 😀👍🏽 #1 👨‍👩‍👧 শেষ") == "খবর #1 শেষ"


def test_www_url_case_insensitive():
    assert normalize_text("see WWW.Example.com now") == "see now"


def test_flags_can_be_disabled():
    cfg = NormalizationConfig(strip_urls=False, dedupe_punctuation=False)
    assert normalize_text("go http://a.b !!", cfg) == "go http://a.b !!"


def test_distinct_punctuation_not_merged():
    assert normalize_text("why?!") == "why?!"


@settings(max_examples=300)
@given(fuzz_text)
def test_normalize_idempotent(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


@settings(max_examples=300)
@given(fuzz_text)
def test_normalize_never_longer_than_nfkc(text):
    # NFKC itself may expand (e.g. a ligature into two letters); every later
    # step only deletes or merges characters.
    assert len(normalize_text(text)) <= len(unicodedata.normalize("NFKC", text))


def test_build_vocabulary_frequency_order():
    v = build_vocabulary(["a a b"], max_size=8)
    assert v.tokens == RESERVED + ("a", "b")
    assert len(v) == 7


def test_build_vocabulary_ties_lexicographic_and_cap():
    v = build_vocabulary(["c b a", "c"], max_size=7)
    assert v.tokens[5:] == ("c", "a")


def test_build_vocabulary_min_frequency():
    v = build_vocabulary(["x x y"], max_size=10, min_frequency=2)
    assert "x" in v and "y" not in v


def test_empty_vocabulary_is_reserved_only():
    v = build_vocabulary([], max_size=10)
    assert v.tokens == RESERVED
    assert (PAD_ID, UNK_ID, BOS_ID, EOS_ID, SEP_ID) == (0, 1, 2, 3, 4)


def test_build_vocabulary_deterministic():
    texts = ["z y x", "y x", "x"]
    assert build_vocabulary(texts, 20).token_to_id == build_vocabulary(texts, 20).token_to_id


@pytest.mark.parametrize("size", [0, 5])
def test_build_vocabulary_size_error(size):
    with pytest.raises(ParameterError):
        build_vocabulary(["a"], size)


def test_tokenize_and_unknown():
    v = build_vocabulary(["a b"], 10)
    assert tokenize("a b", v).ids == (v.id("a"), v.id("b"))
    assert tokenize("a z", v).ids == (v.id("a"), UNK_ID)


def test_reserved_strings_in_text_are_unknown():
    v = build_vocabulary(["a"], 10)
    ids = tokenize("a [SEP] </s> <pad>", v).ids
    assert ids == (v.id("a"), UNK_ID, UNK_ID, UNK_ID)


def test_round_trip_in_vocabulary():
    v = build_vocabulary(["আমি ভাত খাই"], 10)
    assert detokenize(tokenize("আমি ভাত খাই", v), v) == "আমি ভাত খাই"


def test_detokenize_out_of_range():
    v = build_vocabulary(["a"], 10)
    with pytest.raises(RangeError):
        detokenize([len(v)], v)


@given(st.lists(st.sampled_from(["a", "b", "c", "[SEP]", "<s>", "q"]), max_size=15).map(" ".join))
def test_tokenize_never_emits_structural_ids(text):
    v = build_vocabulary(["a b c"], 10)
    assert not {PAD_ID, BOS_ID, EOS_ID, SEP_ID} & set(tokenize(text, v).ids)


def test_vocabulary_save_load(tmp_path):
    v = build_vocabulary(["খবর আজ আজ", "x"], 10)
    v.save(tmp_path / "v.txt")
    assert Vocabulary.load(tmp_path / "v.txt") == v
    lines = (tmp_path / "v.txt").read_text(encoding="utf-8").splitlines()
    assert lines[v.id("আজ")] == "আজ"


def test_truncate_examples():
    long = TokenSequence(range(600))
    assert truncate(long, 512).ids == tuple(range(512))
    short = TokenSequence(range(10))
    assert truncate(short, 512) == short


@given(st.lists(st.integers(0, 50), max_size=80), st.integers(1, 100))
def test_truncate_properties(ids, k):
    s = TokenSequence(ids)
    t = truncate(s, k)
    assert len(t) == min(len(ids), k)
    assert truncate(t, k) == t
    assert t.ids == tuple(ids[:k])


def test_truncate_error():
    with pytest.raises(ParameterError):
        truncate(TokenSequence([1]), 0)
