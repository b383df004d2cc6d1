"""Network attacker: what she knows, what she can build, what she does.

The attacker owns the transport. Every payload an agent sends is learned
before she decides whether to pass it on, drop it, or substitute something
she can construct. Knowledge grows by decomposition (projections, message
recovery from signatures, decryption with keys she holds) and terms are
built back up with the public constructors. The word-comparison function is
public code, so she can compute word lists for any keys she can derive.

She never guesses atoms: a fresh name or secret key she has not extracted
from traffic stays out of reach. That single fact is what all the
confidentiality checks ultimately rest on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .engine import NO_KEY, NameSupply, WireMessage
from .terms import (AEnc, DecryptError, Pair, PubKey, SecretKey, Sign, Term,
                    WordListTerm, adec, get_mssg, render_term)
from .trustwords import Dictionary, trustwords

ATTACKER_ID = "eve"


@dataclass(frozen=True)
class Derivation:
    """Proof tree showing how a term follows from observed material."""

    term: Term
    rule: str
    children: tuple["Derivation", ...] = ()

    def verify(self, base: frozenset[Term], dictionary: Dictionary | None) -> bool:
        """Replay the tree bottom-up with the real term operations."""
        if not all(c.verify(base, dictionary) for c in self.children):
            return False
        kids = [c.term for c in self.children]
        try:
            if self.rule == "observed":
                return not kids and self.term in base
            if self.rule == "fst":
                return isinstance(kids[0], Pair) and self.term == kids[0].left
            if self.rule == "snd":
                return isinstance(kids[0], Pair) and self.term == kids[0].right
            if self.rule == "getMssg":
                return self.term == get_mssg(kids[0])
            if self.rule == "adec":
                return self.term == adec(kids[0], kids[1])
            if self.rule == "pair":
                return self.term == Pair(kids[0], kids[1])
            if self.rule == "aenc":
                return self.term == AEnc(kids[0], kids[1])
            if self.rule == "sign":
                return self.term == Sign(kids[0], kids[1])
            if self.rule == "pubkey":
                return self.term == PubKey(kids[0])
            if self.rule == "trustwords":
                if dictionary is None:
                    return False
                return self.term == WordListTerm(
                    trustwords(kids[0], kids[1], dictionary))
        except DecryptError:
            return False
        return False

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        line = f"{pad}{render_term(self.term)}   [{self.rule}]"
        return "\n".join([line] + [c.pretty(indent + 1) for c in self.children])


class Knowledge:
    """Monotone set of observed terms plus everything deducible from it."""

    def __init__(self, dictionary: Dictionary | None = None):
        self.dictionary = dictionary
        self._base: list[Term] = []
        self._base_set: set[Term] = set()
        self._closure: dict[Term, tuple[str, tuple[Term, ...]]] | None = None

    @property
    def base(self) -> tuple[Term, ...]:
        return tuple(self._base)

    def learn(self, term: Term) -> None:
        if term not in self._base_set:
            self._base.append(term)
            self._base_set.add(term)
            self._closure = None

    def closure(self) -> frozenset[Term]:
        return frozenset(self._analysis())

    def _analysis(self) -> dict[Term, tuple[str, tuple[Term, ...]]]:
        """Decomposition fixpoint with provenance for witness building."""
        if self._closure is not None:
            return self._closure
        prov: dict[Term, tuple[str, tuple[Term, ...]]] = {
            t: ("observed", ()) for t in self._base}
        changed = True
        while changed:
            changed = False
            for t in list(prov):
                if isinstance(t, Pair):
                    for part, rule in ((t.left, "fst"), (t.right, "snd")):
                        if part not in prov:
                            prov[part] = (rule, (t,))
                            changed = True
                elif isinstance(t, Sign):
                    if t.message not in prov:
                        prov[t.message] = ("getMssg", (t,))
                        changed = True
                elif isinstance(t, AEnc) and isinstance(t.key, PubKey):
                    secret = t.key.of
                    if secret in prov and t.plaintext not in prov:
                        prov[t.plaintext] = ("adec", (t, secret))
                        changed = True
        self._closure = prov
        return prov

    def derive(self, goal: Term) -> Derivation | None:
        """Derivation tree for ``goal`` or None when it is out of reach."""
        prov = self._analysis()

        def from_closure(t: Term) -> Derivation:
            rule, premises = prov[t]
            return Derivation(t, rule, tuple(from_closure(p) for p in premises))

        def build(t: Term) -> Derivation | None:
            if t in prov:
                return from_closure(t)
            if isinstance(t, Pair):
                l, r = build(t.left), build(t.right)
                return Derivation(t, "pair", (l, r)) if l and r else None
            if isinstance(t, AEnc):
                m, k = build(t.plaintext), build(t.key)
                return Derivation(t, "aenc", (m, k)) if m and k else None
            if isinstance(t, Sign):
                m, k = build(t.message), build(t.key)
                return Derivation(t, "sign", (m, k)) if m and k else None
            if isinstance(t, PubKey):
                inner = build(t.of)
                return Derivation(t, "pubkey", (inner,)) if inner else None
            if isinstance(t, WordListTerm) and self.dictionary is not None:
                known = sorted(prov, key=render_term)
                for i, x in enumerate(known):
                    for y in known[i:]:
                        if WordListTerm(trustwords(x, y, self.dictionary)) == t:
                            return Derivation(
                                t, "trustwords", (from_closure(x), from_closure(y)))
            return None

        return build(goal)

    def derivable(self, goal: Term) -> bool:
        return self.derive(goal) is not None

    def iter_synthesized(self, depth: int) -> Iterator[Term]:
        """All buildable terms, cheapest first, in a deterministic order.

        Level 0 is the decomposition closure sorted by rendering; level
        d+1 applies each constructor to everything accumulated so far.
        The stream can be very long for depth >= 2; callers are expected
        to slice it.
        """
        pool = sorted(self._analysis(), key=render_term)
        seen = set(pool)
        yield from pool
        for _ in range(depth):
            snapshot = list(pool)
            fresh: list[Term] = []

            def offer(t: Term) -> Iterator[Term]:
                if t not in seen:
                    seen.add(t)
                    fresh.append(t)
                    yield t

            for x in snapshot:
                for y in snapshot:
                    yield from offer(Pair(x, y))
            for x in snapshot:
                for y in snapshot:
                    yield from offer(AEnc(x, y))
            for x in snapshot:
                for y in snapshot:
                    yield from offer(Sign(x, y))
            for x in snapshot:
                yield from offer(PubKey(x))
            if self.dictionary is not None:
                for i, x in enumerate(snapshot):
                    for y in snapshot[i:]:
                        yield from offer(
                            WordListTerm(trustwords(x, y, self.dictionary)))
            pool.extend(fresh)

    def synthesize(self, depth: int) -> list[Term]:
        return list(self.iter_synthesized(depth))


# -- strategies and interventions -----------------------------------------


@dataclass(frozen=True)
class Passive:
    """Observe everything, deliver everything."""


@dataclass(frozen=True)
class ScriptedMitm:
    """Key-substitution attack on the first contact of one agent pair."""

    initiator: str
    responder: str


@dataclass(frozen=True)
class Explore:
    """Branch over interventions, bounded by budget and term depth."""

    max_interventions: int
    max_term_depth: int


Strategy = Union[Passive, ScriptedMitm, Explore]


@dataclass(frozen=True)
class Deliver:
    pass


@dataclass(frozen=True)
class Drop:
    pass


@dataclass(frozen=True)
class Replace:
    payload: Term


@dataclass(frozen=True)
class Inject:
    """Supplant the in-flight message entirely, addressing included."""

    sender: str
    recipient: str
    payload: Term


Intervention = Union[Deliver, Drop, Replace, Inject]


def enumerate_interventions(knowledge: Knowledge, wire: WireMessage,
                            max_term_depth: int) -> Iterator[Intervention]:
    """Deterministic candidate stream for exploration at one wire message.

    Order: Deliver, Drop, then Replace with synthesized payloads in
    synthesis order (skipping the payload already on the wire).
    """
    yield Deliver()
    yield Drop()
    for p in knowledge.iter_synthesized(max_term_depth):
        if p != wire.payload:
            yield Replace(p)


class Adversary:
    """Attacker instance bound to one scenario run."""

    def __init__(self, strategy: Strategy, dictionary: Dictionary | None,
                 supply: NameSupply):
        self.identity = ATTACKER_ID
        self.strategy = strategy
        self.secret_key: Term = SecretKey(supply.fresh(ATTACKER_ID))
        self.public_key: Term = PubKey(self.secret_key)
        self.knowledge = Knowledge(dictionary=dictionary)
        self.knowledge.learn(self.secret_key)
        self.knowledge.learn(self.public_key)
        self._stage = 0
        self._initiator_key: Term | None = None
        self._responder_key: Term | None = None

    def observe(self, wire: WireMessage) -> None:
        self.knowledge.learn(wire.payload)

    def intervene(self, wire: WireMessage, step: int) -> Intervention:
        """Decision for one observed wire message.

        Exploration branches are enumerated by the harness, so under
        Explore this returns Deliver.
        """
        if isinstance(self.strategy, ScriptedMitm):
            return self._scripted(self.strategy, wire)
        return Deliver()

    # The substitution plays out in three stages: swap the key in the
    # first clear message, re-encrypt the reply that was meant for the
    # initiator, then keep relaying so neither side notices anything at
    # the message level.
    def _scripted(self, plan: ScriptedMitm, wire: WireMessage) -> Intervention:
        payload = wire.payload
        a_to_b = (wire.sender, wire.recipient) == (plan.initiator, plan.responder)
        b_to_a = (wire.sender, wire.recipient) == (plan.responder, plan.initiator)
        if not (a_to_b or b_to_a):
            return Deliver()
        if self._stage == 0 and a_to_b and isinstance(payload, Pair):
            self._initiator_key = payload.right
            self._stage = 1
            return Replace(Pair(payload.left, self.public_key))
        if self._stage == 1 and b_to_a and isinstance(payload, AEnc):
            swapped = self._reencrypt(payload, self._initiator_key)
            if swapped is not None:
                self._stage = 2
                return swapped
            return Deliver()
        if self._stage >= 2 and isinstance(payload, AEnc):
            target = self._responder_key if a_to_b else self._initiator_key
            swapped = self._reencrypt(payload, target)
            if swapped is not None:
                return swapped
        return Deliver()

    def _reencrypt(self, payload: AEnc, target_key: Term | None) -> Replace | None:
        if target_key is None:
            return None
        try:
            signed = adec(payload, self.secret_key)
        except DecryptError:
            return None
        if not isinstance(signed, Sign):
            return None
        content = get_mssg(signed)
        if isinstance(content, Pair) and content.right != NO_KEY:
            # A real key was attached; remember it and attach ours instead.
            if self._responder_key is None:
                self._responder_key = content.right
            content = Pair(content.left, self.public_key)
        forged = AEnc(Sign(content, self.secret_key), target_key)
        return Replace(forged)
