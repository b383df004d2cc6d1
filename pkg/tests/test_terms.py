from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import atom_pool, random_term
from trustproto.terms import (AEnc, DecryptError, FreshName, NotASignature,
                              Pair, ProjError, PubKey, SecretKey, SigError,
                              Sign, TermSyntaxError, WordListTerm, adec, aenc,
                              fst, get_mssg, is_subterm, pair, parse_term,
                              render_term, sign, snd, subterms, term_depth,
                              verif_sign)

SK = SecretKey("alice0")
PK = PubKey(SK)
MSG = FreshName("m0", "alice")


def test_decrypt_recovers_plaintext():
    assert adec(aenc(MSG, PK), SK) == MSG


def test_decrypt_wrong_key_fails():
    other = SecretKey("bob0")
    with pytest.raises(DecryptError):
        adec(aenc(MSG, PK), other)


def test_decrypt_requires_ciphertext():
    with pytest.raises(DecryptError):
        adec(MSG, SK)


def test_signature_verifies_and_recovers():
    sig = sign(MSG, SK)
    assert verif_sign(sig, PK) == MSG


def test_signature_wrong_key_rejected():
    sig = sign(MSG, SK)
    with pytest.raises(SigError):
        verif_sign(sig, PubKey(SecretKey("bob0")))


def test_message_recoverable_without_verification():
    # anyone holding a signature can read what was signed
    sig = sign(MSG, SK)
    assert get_mssg(sig) == MSG


def test_get_mssg_rejects_non_signature():
    with pytest.raises(NotASignature):
        get_mssg(MSG)


def test_pair_projections():
    p = pair(MSG, PK)
    assert fst(p) == MSG
    assert snd(p) == PK
    with pytest.raises(ProjError):
        fst(MSG)
    with pytest.raises(ProjError):
        snd(PK)


def test_structural_equality_and_hashing():
    a = AEnc(Pair(MSG, PK), PK)
    b = AEnc(Pair(FreshName("m0", "alice"), PubKey(SecretKey("alice0"))), PK)
    assert a == b
    assert len({a, b}) == 1
    assert a != AEnc(Pair(MSG, PK), PubKey(SecretKey("bob0")))


def test_terms_are_immutable():
    with pytest.raises(AttributeError):
        MSG.label = "other"  # type: ignore[misc]


def test_depth_counts_constructor_nesting():
    assert term_depth(MSG) == 1
    assert term_depth(PK) == 2
    assert term_depth(Pair(MSG, PK)) == 3
    assert term_depth(AEnc(Sign(Pair(MSG, PK), SK), PK)) == 5


def test_subterms_includes_self_and_leaves():
    t = AEnc(Sign(Pair(MSG, PK), SK), PK)
    got = set(subterms(t))
    for part in (t, MSG, PK, SK, Sign(Pair(MSG, PK), SK)):
        assert part in got
        assert is_subterm(part, t)
    assert not is_subterm(FreshName("x", "y"), t)


RENDER_CASES = [
    (MSG, "name:m0@alice"),
    (SK, "sk:alice0"),
    (PK, "pk(sk:alice0)"),
    (Pair(MSG, PK), "pair(name:m0@alice,pk(sk:alice0))"),
    (AEnc(MSG, PK), "aenc(name:m0@alice,pk(sk:alice0))"),
    (Sign(MSG, SK), "sign(name:m0@alice,sk:alice0)"),
    (WordListTerm(("kite", "house")), "words(kite,house)"),
]


@pytest.mark.parametrize("term,text", RENDER_CASES)
def test_render_fixed_forms(term, text):
    assert render_term(term) == text


@pytest.mark.parametrize("term,text", RENDER_CASES)
def test_parse_fixed_forms(term, text):
    assert parse_term(text) == term


@pytest.mark.parametrize("bad", [
    "", "pair(a)", "pk()", "name:m0", "sk:", "pair(name:a@b,",
    "mystery(name:a@b)", "name:a@b extra",
])
def test_parse_rejects_malformed_input(bad):
    with pytest.raises(TermSyntaxError):
        parse_term(bad)


def test_render_parse_round_trip_random():
    rng = random.Random(104729)
    atoms = atom_pool(rng, 6)
    for _ in range(300):
        t = random_term(rng, 5, atoms)
        assert parse_term(render_term(t)) == t


_labels = st.text(alphabet="abcdefgh0123", min_size=1, max_size=4)


def _term_strategy():
    leaves = st.one_of(
        st.builds(FreshName, _labels, _labels),
        st.builds(SecretKey, _labels),
    )
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(Pair, inner, inner),
            st.builds(AEnc, inner, inner),
            st.builds(Sign, inner, inner),
            st.builds(PubKey, inner),
        ),
        max_leaves=12,
    )


@given(_term_strategy())
@settings(max_examples=200, deadline=None)
def test_round_trip_is_identity(t):
    assert parse_term(render_term(t)) == t


@given(_term_strategy(), _term_strategy())
@settings(max_examples=150, deadline=None)
def test_render_is_injective_on_distinct_terms(a, b):
    if a != b:
        assert render_term(a) != render_term(b)
