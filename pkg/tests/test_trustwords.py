from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import xor_hex_digitwise
from trustproto.terms import PubKey, SecretKey
from trustproto.trustwords import (Dictionary, DictionaryError, InvalidHex,
                                   combine_fingerprints, fixture_dictionary,
                                   load_dictionary, map_to_words,
                                   normalize_fingerprint, term_pair_fingerprint,
                                   trustwords, trustwords_match)

FPR = "F482E9522F48618B01BC31DC5428D7FA"
ZERO = "0" * 32

# blocks F482 E952 2F48 618B 01BC 31DC 5428 D7FA, taken mod 64
EXPECTED_WORDS = ("kite", "house", "brother", "town",
                  "juice", "school", "dice", "broken")


def test_fixture_mapping(words_en):
    assert map_to_words(combine_fingerprints(FPR, ZERO), words_en) \
        == EXPECTED_WORDS


def test_fixture_block_indices(words_en):
    blocks = [FPR[i:i + 4] for i in range(0, 32, 4)]
    indices = [int(b, 16) % words_en.size for b in blocks]
    assert indices == [2, 18, 8, 11, 60, 28, 40, 58]
    assert tuple(words_en.words[i] for i in indices) == EXPECTED_WORDS


def test_normalize_strips_separators_and_case():
    assert normalize_fingerprint(" f4 82:e9 ") == "F482E9"
    assert normalize_fingerprint("ABCDEF") == "ABCDEF"


@pytest.mark.parametrize("bad", ["", "  : ", "F48G", "0x12", "12 34 zz"])
def test_normalize_rejects_non_hex(bad):
    with pytest.raises(InvalidHex):
        normalize_fingerprint(bad)


def test_combine_simple_example():
    assert combine_fingerprints("F482", "0001") == "F483"


def test_combine_pads_shorter_operand_left():
    # ABCD xor 0001
    assert combine_fingerprints("ABCD", "1") == "ABCC"
    assert combine_fingerprints("1", "ABCD") == "ABCC"


def test_combine_with_self_is_zero():
    assert combine_fingerprints(FPR, FPR) == ZERO


def test_combine_matches_digitwise_oracle():
    rng = random.Random(7919)
    for _ in range(1000):
        a = format(rng.getrandbits(rng.choice((32, 64, 128))), "X")
        b = format(rng.getrandbits(rng.choice((32, 64, 128))), "X")
        assert combine_fingerprints(a, b) == xor_hex_digitwise(
            normalize_fingerprint(a), normalize_fingerprint(b))


@given(st.integers(min_value=0, max_value=2 ** 128 - 1),
       st.integers(min_value=0, max_value=2 ** 128 - 1))
@settings(max_examples=200, deadline=None)
def test_combine_commutes(x, y):
    a, b = format(x, "X"), format(y, "X")
    assert combine_fingerprints(a, b) == combine_fingerprints(b, a)


def test_map_to_words_pads_to_block_multiple(words_en):
    # "123" becomes the single block 0123
    assert map_to_words("123", words_en) == (words_en.words[0x123 % 64],)


def test_map_to_words_zero_block(words_en):
    assert map_to_words("0000", words_en) == (words_en.words[0],)


def test_term_pair_fingerprint_symmetric_and_hex():
    a = PubKey(SecretKey("alice0"))
    b = PubKey(SecretKey("bob0"))
    fp = term_pair_fingerprint(a, b)
    assert fp == term_pair_fingerprint(b, a)
    assert len(fp) == 32
    int(fp, 16)


def test_trustwords_symmetry(words_en):
    a = PubKey(SecretKey("alice0"))
    b = PubKey(SecretKey("bob0"))
    assert trustwords(a, b, words_en) == trustwords(b, a, words_en)
    assert len(trustwords(a, b, words_en)) == 8


def test_trustwords_deterministic(words_en):
    a = PubKey(SecretKey("alice0"))
    b = PubKey(SecretKey("bob0"))
    assert trustwords(a, b, words_en) == trustwords(a, b, words_en)


def test_trustwords_separate_pairs_get_separate_words(words_en):
    """Brute-force spread check over a pool of keys the scenarios use."""
    keys = [PubKey(SecretKey(f"{owner}{i}"))
            for owner in ("alice", "bob", "carol", "dave", "eve")
            for i in range(6)]
    seen: dict[tuple[str, ...], tuple] = {}
    for a, b in itertools.combinations(keys, 2):
        ws = trustwords(a, b, words_en)
        assert ws not in seen, (a, b, seen[ws])
        seen[ws] = (a, b)


def test_trustwords_match_requires_exact_tuple():
    assert trustwords_match(("kite", "house"), ("kite", "house"))
    assert not trustwords_match(("kite", "house"), ("kite",))
    assert not trustwords_match(("kite", "house"), ("house", "kite"))
    assert not trustwords_match((), ("kite",))


def test_word_for_block_wraps_modulo_size():
    d = Dictionary(language="en", words=("a", "b", "c"))
    assert d.word_for_block(0) == "a"
    assert d.word_for_block(4) == "b"
    assert d.word_for_block(65535) == d.words[65535 % 3]


def test_fixture_dictionary_shape(words_en):
    assert words_en.language == "en"
    assert words_en.size == 64
    assert words_en.words[2] == "kite"
    assert words_en.words[18] == "house"


def test_load_dictionary_round_trip(tmp_path, words_en):
    p = tmp_path / "words.txt"
    p.write_text("#lang:en\n" + "\n".join(words_en.words) + "\n",
                 encoding="utf-8")
    loaded = load_dictionary(p)
    assert loaded == words_en


def test_load_dictionary_requires_language_header(tmp_path):
    p = tmp_path / "words.txt"
    p.write_text("apple\nriver\n", encoding="utf-8")
    with pytest.raises(DictionaryError):
        load_dictionary(p)


def test_load_dictionary_rejects_blank_lines(tmp_path):
    p = tmp_path / "words.txt"
    p.write_text("#lang:en\napple\n\nriver\n", encoding="utf-8")
    with pytest.raises(DictionaryError):
        load_dictionary(p)


def test_load_dictionary_rejects_words_that_break_rendering(tmp_path):
    p = tmp_path / "words.txt"
    p.write_text("#lang:en\napp|le\n", encoding="utf-8")
    with pytest.raises(DictionaryError):
        load_dictionary(p)


def test_load_dictionary_rejects_empty_word_list(tmp_path):
    p = tmp_path / "words.txt"
    p.write_text("#lang:en\n", encoding="utf-8")
    with pytest.raises(DictionaryError):
        load_dictionary(p)
