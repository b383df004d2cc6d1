"""Per-device protocol engine: identity store, privacy ratings, messaging.

Each agent owns one email address, one keypair and one identity store. Keys
are picked up opportunistically from incoming mail (trust on first use) and
only the word-comparison ceremony upgrades a peer to GREEN. The engine never
checks where a stored key came from; that is the whole point of the attack
this model reproduces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import events as ev
from .events import Event
from .terms import (AEnc, DecryptError, FreshName, Pair, PubKey, SecretKey,
                    Sign, SigError, Term, adec, get_mssg, verif_sign)
from .trustwords import Dictionary, WordList, trustwords, trustwords_match


class Rating(Enum):
    """Privacy rating shown next to a message or peer."""

    RED = "red"
    GREY = "grey"
    YELLOW = "yellow"
    GREEN = "green"


# Marker used in signed payloads instead of a key once the own key has
# already been sent to that peer; keeps the payload shape uniform.
NO_KEY: Term = FreshName("nokey", "engine")


class NoPeerKey(Exception):
    """Handshake attempted with a peer whose key is not stored."""


class NameSupply:
    """Deterministic source of distinct atom labels."""

    def __init__(self) -> None:
        self._counts: dict[str, int] = {}

    def fresh(self, base: str) -> str:
        n = self._counts.get(base, 0)
        self._counts[base] = n + 1
        return f"{base}{n}"


@dataclass
class IdentityRecord:
    local_id: str
    email: str
    pubkey: Term | None = None
    rating: Rating = Rating.GREY


@dataclass(frozen=True)
class WireMessage:
    sender: str
    recipient: str
    payload: Term


@dataclass(frozen=True)
class DisplayedMessage:
    body: Term
    peer: str
    rating: Rating


class HandshakeOutcome(Enum):
    MATCHED = "matched"
    MISMATCHED = "mismatched"


@dataclass
class PeerState:
    """State of one agent's device. Mutated only by its owner's calls;
    the harness is the single scheduler."""

    self_id: str
    supply: NameSupply = field(default_factory=NameSupply)

    def __post_init__(self) -> None:
        self.secret_key: Term = SecretKey(self.supply.fresh(self.self_id))
        self.public_key: Term = PubKey(self.secret_key)
        self.peers: dict[str, IdentityRecord] = {}
        self.sent_key_to: set[str] = set()
        self.run_counter = 0
        self.pending_events: list[Event] = []
        self._emit(ev.user_key(self.self_id, self.public_key))
        self._emit(ev.user_email(self.self_id, self.self_id))

    # -- bookkeeping ------------------------------------------------------

    def _emit(self, event: Event) -> None:
        self.pending_events.append(event)

    def drain_events(self) -> list[Event]:
        out, self.pending_events = self.pending_events, []
        return out

    def _record(self, email: str) -> IdentityRecord:
        rec = self.peers.get(email)
        if rec is None:
            rec = IdentityRecord(local_id=f"{email}@{self.self_id}", email=email)
            self.peers[email] = rec
        return rec

    def rating_for(self, email: str) -> Rating | None:
        rec = self.peers.get(email)
        return rec.rating if rec else None

    def key_for(self, email: str) -> Term | None:
        rec = self.peers.get(email)
        return rec.pubkey if rec else None

    def _set_rating(self, rec: IdentityRecord, new: Rating) -> None:
        # RED is absorbing; GREEN survives everything but RED.
        if rec.rating is Rating.RED:
            return
        if rec.rating is Rating.GREEN and new is not Rating.RED:
            return
        rec.rating = new

    def _store_key(self, rec: IdentityRecord, key: Term) -> None:
        # Last write wins while the peer is below GREEN; GREEN and RED
        # freeze the stored key. No provenance check of any kind.
        if rec.rating in (Rating.GREEN, Rating.RED):
            return
        rec.pubkey = key
        self._set_rating(rec, Rating.YELLOW)

    # -- messaging --------------------------------------------------------

    def compose(self, to: str, body: Term) -> WireMessage:
        """Build the outgoing wire message for ``body``.

        Without a stored key for ``to`` the message leaves in the clear,
        with the own public key attached. With a key it is signed and
        encrypted; the own key rides along only on the first message in
        this direction.
        """
        rec = self._record(to)
        if rec.pubkey is None:
            payload: Term = Pair(body, self.public_key)
            self.sent_key_to.add(to)
        else:
            attached = self.public_key if to not in self.sent_key_to else NO_KEY
            self.sent_key_to.add(to)
            signed = Sign(Pair(body, attached), self.secret_key)
            payload = AEnc(signed, rec.pubkey)
            if rec.rating is Rating.GREEN:
                self._emit(ev.send_green(self.self_id, to, payload))
        return WireMessage(self.self_id, to, payload)

    def receive(self, wire: WireMessage) -> DisplayedMessage:
        """Process one delivered message and return what the user sees."""
        sender = wire.sender
        payload = wire.payload
        if isinstance(payload, AEnc):
            return self._receive_encrypted(sender, payload)
        rec = self._record(sender)
        if isinstance(payload, Pair):
            # Clear first-contact shape: body plus the sender's claimed key.
            self._store_key(rec, payload.right)
            body = payload.left
        else:
            body = payload
        shown = Rating.RED if rec.rating is Rating.RED else Rating.GREY
        return DisplayedMessage(body=body, peer=sender, rating=shown)

    def _receive_encrypted(self, sender: str, payload: AEnc) -> DisplayedMessage:
        rec = self._record(sender)

        def failed(body: Term) -> DisplayedMessage:
            shown = Rating.RED if rec.rating is Rating.RED else Rating.GREY
            return DisplayedMessage(body=body, peer=sender, rating=shown)

        try:
            signed = adec(payload, self.secret_key)
        except DecryptError:
            self._emit(ev.decryption_fails(self.self_id, sender, payload))
            return failed(payload)
        if not isinstance(signed, Sign):
            self._emit(ev.sign_verif_fails(self.self_id, sender, payload))
            return failed(signed)
        content = get_mssg(signed)
        if isinstance(content, Pair):
            body, attached = content.left, content.right
        else:
            body, attached = content, None
        # Verify against the stored key; on first contact the only key
        # available is the one the message itself carries.
        verify_key = rec.pubkey
        if verify_key is None and attached is not None and attached != NO_KEY:
            verify_key = attached
        if verify_key is None:
            self._emit(ev.sign_verif_fails(self.self_id, sender, payload))
            return failed(body)
        try:
            verif_sign(signed, verify_key)
        except SigError:
            self._emit(ev.sign_verif_fails(self.self_id, sender, payload))
            return failed(body)
        if rec.pubkey is None and attached is not None and attached != NO_KEY:
            self._store_key(rec, attached)
        if rec.rating is Rating.GREEN:
            self._emit(ev.receive_green(self.self_id, sender, payload))
        return DisplayedMessage(body=body, peer=sender, rating=rec.rating)

    # -- handshake --------------------------------------------------------

    def start_handshake(self, peer: str, dictionary: Dictionary) -> WordList:
        """Open the word-comparison ceremony with ``peer``.

        Returns the words this device displays. Raises NoPeerKey when no
        key is stored for the peer yet.
        """
        rec = self.peers.get(peer)
        if rec is None or rec.pubkey is None:
            raise NoPeerKey(f"{self.self_id} has no key for {peer}")
        self.run_counter += 1
        self._emit(ev.start_handshake(self.self_id, peer))
        return trustwords(self.public_key, rec.pubkey, dictionary)


def complete_handshake(initiator: PeerState, responder: PeerState,
                       dictionary: Dictionary) -> tuple[HandshakeOutcome, list[Event]]:
    """Atomic out-of-band word comparison between two devices.

    Each side reads the words for (own key, stored peer key). On a match
    both sides rate each other GREEN; on a mismatch both go RED. The
    emitted end event carries the keys as stored, i.e. what the ceremony
    actually compared, not what the owners hold themselves.
    """
    rec_i = initiator.peers.get(responder.self_id)
    rec_r = responder.peers.get(initiator.self_id)
    if rec_i is None or rec_i.pubkey is None:
        raise NoPeerKey(f"{initiator.self_id} has no key for {responder.self_id}")
    if rec_r is None or rec_r.pubkey is None:
        raise NoPeerKey(f"{responder.self_id} has no key for {initiator.self_id}")

    words_i = trustwords(initiator.public_key, rec_i.pubkey, dictionary)
    words_r = trustwords(responder.public_key, rec_r.pubkey, dictionary)
    key_for_initiator = rec_r.pubkey   # what the responder holds for them
    key_for_responder = rec_i.pubkey

    out: list[Event] = []
    if trustwords_match(words_i, words_r):
        responder._set_rating(rec_r, Rating.GREEN)
        initiator._set_rating(rec_i, Rating.GREEN)
        out.append(ev.receiver_trusts(responder.self_id, initiator.self_id))
        out.append(ev.receiver_trusts(initiator.self_id, responder.self_id))
        out.append(ev.end_handshake_ok(
            initiator.self_id, responder.self_id,
            key_for_initiator, key_for_responder,
            initiator.self_id, responder.self_id))
        return HandshakeOutcome.MATCHED, out
    responder._set_rating(rec_r, Rating.RED)
    initiator._set_rating(rec_i, Rating.RED)
    out.append(ev.end_handshake_unsucc(
        initiator.self_id, responder.self_id,
        key_for_initiator, key_for_responder))
    return HandshakeOutcome.MISMATCHED, out
