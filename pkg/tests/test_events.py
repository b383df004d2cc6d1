from __future__ import annotations

import pytest

from trustproto import events as ev
from trustproto.events import (EVENT_SIGNATURES, Event, EventFormatError,
                               parse_event_line, render_event_line)
from trustproto.terms import FreshName, PubKey, SecretKey

PK = PubKey(SecretKey("alice0"))


def test_every_constructor_matches_its_signature():
    samples = {
        "userKey": ev.user_key("alice", PK),
        "userEmail": ev.user_email("alice", "alice"),
        "startHandshake": ev.start_handshake("alice", "bob"),
        "endHandshakeOk": ev.end_handshake_ok("alice", "bob", PK, PK,
                                              "alice", "bob"),
        "endHandshakeUnsucc": ev.end_handshake_unsucc("alice", "bob", PK, PK),
        "receiverTrustsS": ev.receiver_trusts("bob", "alice"),
        "sendGreen": ev.send_green("alice", "bob", PK),
        "receiveGreen": ev.receive_green("bob", "alice", PK),
        "decryptionFails": ev.decryption_fails("bob", "alice", PK),
        "signVerifFails": ev.sign_verif_fails("bob", "alice", PK),
        "attackerKnows": ev.attacker_knows(PK),
    }
    assert set(samples) == set(EVENT_SIGNATURES)
    for name, event in samples.items():
        assert event.name == name
        assert len(event.args) == len(EVENT_SIGNATURES[name])


def test_event_rejects_wrong_arity():
    with pytest.raises(EventFormatError):
        Event("userKey", ("alice",))


def test_event_rejects_wrong_argument_kind():
    with pytest.raises(EventFormatError):
        Event("userKey", ("alice", "not-a-term"))
    with pytest.raises(EventFormatError):
        Event("userEmail", ("alice", PK))


def test_event_rejects_unknown_name():
    with pytest.raises(EventFormatError):
        Event("somethingElse", ())


def test_line_round_trip():
    e = ev.send_green("alice", "bob", PK)
    line = render_event_line(7, 2, e)
    assert line == "7|2|sendGreen|alice|bob|pk(sk:alice0)"
    assert parse_event_line(line) == (7, 2, e)


def test_line_round_trip_all_constructors():
    body = FreshName("m0", "alice")
    cases = [
        ev.user_key("a", PK),
        ev.user_email("a", "a"),
        ev.start_handshake("a", "b"),
        ev.end_handshake_ok("a", "b", PK, PK, "a", "b"),
        ev.end_handshake_unsucc("a", "b", PK, PK),
        ev.receiver_trusts("b", "a"),
        ev.send_green("a", "b", body),
        ev.receive_green("b", "a", body),
        ev.decryption_fails("b", "a", body),
        ev.sign_verif_fails("b", "a", body),
        ev.attacker_knows(body),
    ]
    for i, e in enumerate(cases):
        assert parse_event_line(render_event_line(i, 1, e)) == (i, 1, e)


@pytest.mark.parametrize("line", [
    "", "1|2", "x|1|userKey|a|pk(sk:a0)", "1|1|noSuchEvent|a",
    "1|1|userKey|a", "1|1|userKey|a|pk(sk:a0)|extra",
])
def test_parse_rejects_malformed_lines(line):
    with pytest.raises(EventFormatError):
        parse_event_line(line)
