"""Trace events: the observable vocabulary that properties are stated over.

Every event has a fixed name and arity. Agent and email arguments are plain
strings; everything else is a term. The persisted line format is
``index|session|eventName|arg1|arg2|...`` with terms rendered canonically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import Term, parse_term, render_term

END_HANDSHAKE_OK = "endHandshakeOk"
START_HANDSHAKE = "startHandshake"
USER_KEY = "userKey"
USER_EMAIL = "userEmail"
RECEIVE_GREEN = "receiveGreen"
RECEIVER_TRUSTS = "receiverTrustsS"
SEND_GREEN = "sendGreen"
DECRYPTION_FAILS = "decryptionFails"
SIGN_VERIF_FAILS = "signVerifFails"
END_HANDSHAKE_UNSUCC = "endHandshakeUnsucc"
ATTACKER_KNOWS = "attackerKnows"

# name -> argument kinds, in order ("agent" is a plain string, "term" a Term)
EVENT_SIGNATURES: dict[str, tuple[str, ...]] = {
    END_HANDSHAKE_OK: ("agent", "agent", "term", "term", "agent", "agent"),
    START_HANDSHAKE: ("agent", "agent"),
    USER_KEY: ("agent", "term"),
    USER_EMAIL: ("agent", "agent"),
    RECEIVE_GREEN: ("agent", "agent", "term"),
    RECEIVER_TRUSTS: ("agent", "agent"),
    SEND_GREEN: ("agent", "agent", "term"),
    DECRYPTION_FAILS: ("agent", "agent", "term"),
    SIGN_VERIF_FAILS: ("agent", "agent", "term"),
    END_HANDSHAKE_UNSUCC: ("agent", "agent", "term", "term"),
    ATTACKER_KNOWS: ("term",),
}


class EventFormatError(ValueError):
    """Event construction or parsing violated a signature."""


@dataclass(frozen=True)
class Event:
    name: str
    args: tuple[str | Term, ...]

    def __post_init__(self):
        sig = EVENT_SIGNATURES.get(self.name)
        if sig is None:
            raise EventFormatError(f"unknown event {self.name!r}")
        if len(sig) != len(self.args):
            raise EventFormatError(
                f"{self.name} takes {len(sig)} args, got {len(self.args)}")
        for kind, arg in zip(sig, self.args):
            if kind == "agent" and not isinstance(arg, str):
                raise EventFormatError(f"{self.name}: expected agent, got {arg!r}")
            if kind == "term" and not isinstance(arg, Term):
                raise EventFormatError(f"{self.name}: expected term, got {arg!r}")


def user_key(agent: str, public_key: Term) -> Event:
    return Event(USER_KEY, (agent, public_key))


def user_email(agent: str, email: str) -> Event:
    return Event(USER_EMAIL, (agent, email))


def start_handshake(caller: str, peer: str) -> Event:
    return Event(START_HANDSHAKE, (caller, peer))


def end_handshake_ok(initiator: str, responder: str, key_for_initiator: Term,
                     key_for_responder: Term, initiator_email: str,
                     responder_email: str) -> Event:
    return Event(END_HANDSHAKE_OK, (initiator, responder, key_for_initiator,
                                    key_for_responder, initiator_email,
                                    responder_email))


def end_handshake_unsucc(initiator: str, responder: str,
                         key_for_initiator: Term,
                         key_for_responder: Term) -> Event:
    return Event(END_HANDSHAKE_UNSUCC,
                 (initiator, responder, key_for_initiator, key_for_responder))


def receiver_trusts(receiver: str, peer: str) -> Event:
    return Event(RECEIVER_TRUSTS, (receiver, peer))


def send_green(sender: str, recipient: str, payload: Term) -> Event:
    return Event(SEND_GREEN, (sender, recipient, payload))


def receive_green(receiver: str, sender: str, payload: Term) -> Event:
    return Event(RECEIVE_GREEN, (receiver, sender, payload))


def decryption_fails(receiver: str, sender: str, payload: Term) -> Event:
    return Event(DECRYPTION_FAILS, (receiver, sender, payload))


def sign_verif_fails(receiver: str, sender: str, payload: Term) -> Event:
    return Event(SIGN_VERIF_FAILS, (receiver, sender, payload))


def attacker_knows(message: Term) -> Event:
    return Event(ATTACKER_KNOWS, (message,))


def render_event_line(index: int, session: int, event: Event) -> str:
    parts = [str(index), str(session), event.name]
    for arg in event.args:
        parts.append(render_term(arg) if isinstance(arg, Term) else arg)
    return "|".join(parts)


def parse_event_line(line: str) -> tuple[int, int, Event]:
    parts = line.rstrip("\n").split("|")
    if len(parts) < 3:
        raise EventFormatError(f"bad event line: {line!r}")
    try:
        index, session = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise EventFormatError(f"bad indices in line: {line!r}") from exc
    name = parts[2]
    sig = EVENT_SIGNATURES.get(name)
    if sig is None:
        raise EventFormatError(f"unknown event {name!r} in line: {line!r}")
    raw_args = parts[3:]
    if len(raw_args) != len(sig):
        raise EventFormatError(f"wrong arity for {name} in line: {line!r}")
    args: list[str | Term] = []
    for kind, raw in zip(sig, raw_args):
        args.append(parse_term(raw) if kind == "term" else raw)
    return index, session, Event(name, tuple(args))
