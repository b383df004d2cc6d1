"""Symbolic message terms and the constructor/destructor rules over them.

Terms are immutable finite trees with structural equality: two ciphertexts
are interchangeable exactly when they were built from equal parts. There is
no bit-level cryptography here. Destructors either return a subterm of their
input or raise; they never rewrite or normalize anything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator


class DestructorError(Exception):
    """A destructor was applied to a term it cannot reduce."""


class DecryptError(DestructorError):
    """The ciphertext is not an encryption under the matching public key."""


class SigError(DestructorError):
    """The signature does not verify under the supplied public key."""


class NotASignature(DestructorError):
    """Message recovery applied to a term that is not a signature."""


class ProjError(DestructorError):
    """Projection applied to a term that is not a pair."""


class TermSyntaxError(ValueError):
    """A rendered term could not be parsed back."""


class Term:
    """Base class for all symbolic terms."""

    __slots__ = ()


@dataclass(frozen=True)
class FreshName(Term):
    """Atomic value created by an agent, such as a message body or nonce.

    ``origin`` records which agent minted it; two names are equal only when
    both label and origin are equal.
    """

    label: str
    origin: str


@dataclass(frozen=True)
class SecretKey(Term):
    """Atomic signing/decryption key."""

    label: str


@dataclass(frozen=True)
class PubKey(Term):
    """Public half derived from a key term. Never reveals its argument."""

    of: Term


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class AEnc(Term):
    """Asymmetric encryption of ``plaintext`` under ``key``."""

    plaintext: Term
    key: Term


@dataclass(frozen=True)
class Sign(Term):
    """Signature over ``message`` with the secret key ``key``.

    The signed message is recoverable from the signature alone, which is
    what makes signatures transparent to any observer.
    """

    message: Term
    key: Term


@dataclass(frozen=True)
class WordListTerm(Term):
    """An ordered word sequence lifted into the term algebra."""

    words: tuple[str, ...]


def pair(left: Term, right: Term) -> Pair:
    return Pair(left, right)


def fst(t: Term) -> Term:
    if not isinstance(t, Pair):
        raise ProjError(f"fst of non-pair: {render_term(t)}")
    return t.left


def snd(t: Term) -> Term:
    if not isinstance(t, Pair):
        raise ProjError(f"snd of non-pair: {render_term(t)}")
    return t.right


def aenc(plaintext: Term, key: Term) -> AEnc:
    return AEnc(plaintext, key)


def adec(ciphertext: Term, secret: Term) -> Term:
    """Decrypt ``ciphertext`` when it was encrypted under PubKey(secret)."""
    if isinstance(ciphertext, AEnc) and ciphertext.key == PubKey(secret):
        return ciphertext.plaintext
    raise DecryptError(f"cannot decrypt {render_term(ciphertext)}")


def sign(message: Term, secret: Term) -> Sign:
    return Sign(message, secret)


def verif_sign(signature: Term, public: Term) -> Term:
    """Return the signed message when ``public`` matches the signing key."""
    if isinstance(signature, Sign) and PubKey(signature.key) == public:
        return signature.message
    raise SigError(f"signature does not verify: {render_term(signature)}")


def get_mssg(signature: Term) -> Term:
    """Recover the signed message without verifying the signature."""
    if isinstance(signature, Sign):
        return signature.message
    raise NotASignature(f"not a signature: {render_term(signature)}")


def is_public_key(t: Term) -> bool:
    """Shape test only; no statement about who owns the key."""
    return isinstance(t, PubKey)


def subterms(t: Term) -> Iterator[Term]:
    """Yield ``t`` and every nested term, preorder."""
    yield t
    if isinstance(t, PubKey):
        yield from subterms(t.of)
    elif isinstance(t, Pair):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, AEnc):
        yield from subterms(t.plaintext)
        yield from subterms(t.key)
    elif isinstance(t, Sign):
        yield from subterms(t.message)
        yield from subterms(t.key)


def is_subterm(needle: Term, haystack: Term) -> bool:
    return any(s == needle for s in subterms(haystack))


def term_depth(t: Term) -> int:
    """Leaves have depth 1."""
    if isinstance(t, PubKey):
        return 1 + term_depth(t.of)
    if isinstance(t, Pair):
        return 1 + max(term_depth(t.left), term_depth(t.right))
    if isinstance(t, AEnc):
        return 1 + max(term_depth(t.plaintext), term_depth(t.key))
    if isinstance(t, Sign):
        return 1 + max(term_depth(t.message), term_depth(t.key))
    return 1


# Rendering and parsing. The rendered form is the canonical one used in
# persisted traces, so it must stay stable: prefix notation, no spaces.
# Atom labels therefore must not contain ',', '(', ')' or '|'.

_LABEL_FORBIDDEN = set(",()|")


def _check_label(text: str) -> str:
    if not text or any(c in _LABEL_FORBIDDEN or c.isspace() for c in text):
        raise TermSyntaxError(f"bad atom label: {text!r}")
    return text


def render_term(t: Term) -> str:
    if isinstance(t, FreshName):
        return f"name:{t.label}@{t.origin}"
    if isinstance(t, SecretKey):
        return f"sk:{t.label}"
    if isinstance(t, PubKey):
        return f"pk({render_term(t.of)})"
    if isinstance(t, Pair):
        return f"pair({render_term(t.left)},{render_term(t.right)})"
    if isinstance(t, AEnc):
        return f"aenc({render_term(t.plaintext)},{render_term(t.key)})"
    if isinstance(t, Sign):
        return f"sign({render_term(t.message)},{render_term(t.key)})"
    if isinstance(t, WordListTerm):
        return "words(" + ",".join(t.words) + ")"
    raise TypeError(f"not a term: {t!r}")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, why: str):
        raise TermSyntaxError(f"{why} at {self.pos} in {self.text!r}")

    def eat(self, token: str):
        if not self.text.startswith(token, self.pos):
            self.fail(f"expected {token!r}")
        self.pos += len(token)

    def until(self, stops: str) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in stops:
            self.pos += 1
        return self.text[start:self.pos]

    def term(self) -> Term:
        for head in ("pk(", "pair(", "aenc(", "sign(", "words("):
            if self.text.startswith(head, self.pos):
                self.pos += len(head)
                return self.finish(head[:-1])
        if self.text.startswith("name:", self.pos):
            self.pos += 5
            label = self.until("@,()|")
            self.eat("@")
            origin = self.until(",()|")
            return FreshName(_check_label(label), _check_label(origin))
        if self.text.startswith("sk:", self.pos):
            self.pos += 3
            return SecretKey(_check_label(self.until(",()|")))
        self.fail("expected a term")

    def finish(self, head: str) -> Term:
        if head == "pk":
            inner = self.term()
            self.eat(")")
            return PubKey(inner)
        if head == "words":
            words = [self.until(",)")]
            while self.text.startswith(",", self.pos):
                self.pos += 1
                words.append(self.until(",)"))
            self.eat(")")
            if any(not w or any(c.isspace() for c in w) for w in words):
                self.fail("bad word")
            return WordListTerm(tuple(words))
        left = self.term()
        self.eat(",")
        right = self.term()
        self.eat(")")
        ctor = {"pair": Pair, "aenc": AEnc, "sign": Sign}[head]
        return ctor(left, right)


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.pos != len(text):
        p.fail("trailing input")
    return t
