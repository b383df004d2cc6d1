"""Word encodings of key fingerprints for human comparison.

Two peers each read the same short word list out loud; the lists agree only
if both devices hold the same pair of keys. Two entry points exist:

* concrete: XOR two hex fingerprints and map 16-bit blocks to words;
* symbolic: derive a stable fingerprint for a pair of key terms, for use
  inside the protocol model where keys have no bytes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .terms import Term, render_term

WordList = tuple[str, ...]


class InvalidHex(ValueError):
    """Fingerprint text is empty or contains non-hex characters."""


class DictionaryError(ValueError):
    """Word dictionary file violates its format."""


# Length of the derived fingerprint used for symbolic key pairs: 32 hex
# characters, i.e. eight 16-bit blocks, matching common key fingerprints.
_SYMBOLIC_HEX_LEN = 32

_FULL_FIDELITY_SIZE = 65536


@dataclass(frozen=True)
class Dictionary:
    """Ordered word list; line N of the source file is the word for block
    value N. Smaller-than-full dictionaries index with block mod size."""

    words: WordList
    language: str = "en"

    @property
    def size(self) -> int:
        return len(self.words)

    def word_for_block(self, block: int) -> str:
        return self.words[block % self.size]


def normalize_fingerprint(text: str) -> str:
    """Uppercase hex with spaces and colon separators removed."""
    cleaned = text.replace(" ", "").replace(":", "").replace("\t", "").upper()
    if not cleaned:
        raise InvalidHex("empty fingerprint")
    if any(c not in "0123456789ABCDEF" for c in cleaned):
        raise InvalidHex(f"not a hex fingerprint: {text!r}")
    return cleaned


def combine_fingerprints(fpr1: str, fpr2: str) -> str:
    """XOR the two fingerprints nibble-wise.

    The shorter one is left-padded with zeros, so combining with an
    all-zero fingerprint is the identity and the operation commutes.
    """
    a = normalize_fingerprint(fpr1)
    b = normalize_fingerprint(fpr2)
    width = max(len(a), len(b))
    combined = int(a, 16) ^ int(b, 16)
    return format(combined, f"0{width}X")


def map_to_words(fpr: str, dictionary: Dictionary) -> WordList:
    """Split the fingerprint into 4-hex-char blocks, one word per block.

    The fingerprint is left-padded with zeros to a multiple of 4 first.
    """
    hexstr = normalize_fingerprint(fpr)
    if len(hexstr) % 4:
        hexstr = "0" * (4 - len(hexstr) % 4) + hexstr
    blocks = [hexstr[i:i + 4] for i in range(0, len(hexstr), 4)]
    return tuple(dictionary.word_for_block(int(b, 16)) for b in blocks)


def term_pair_fingerprint(key1: Term, key2: Term) -> str:
    """Stable hex fingerprint for an unordered pair of key terms.

    Both orders give the same fingerprint: the canonical renderings are
    sorted before hashing. The digest stands in for the XOR-combined
    fingerprint of two real keys, which the symbolic model cannot compute.
    """
    lo, hi = sorted((render_term(key1), render_term(key2)))
    digest = hashlib.sha256(f"{lo}|{hi}".encode()).hexdigest().upper()
    return digest[:_SYMBOLIC_HEX_LEN]


def trustwords(key1: Term, key2: Term, dictionary: Dictionary) -> WordList:
    """Word list both peers should see for this unordered pair of keys."""
    return map_to_words(term_pair_fingerprint(key1, key2), dictionary)


def trustwords_match(words1: Sequence[str], words2: Sequence[str]) -> bool:
    """Exact element-wise comparison; prefixes do not match."""
    return tuple(words1) == tuple(words2)


def _parse_dictionary(lines: Iterable[str]) -> Dictionary:
    language = None
    words: list[str] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if lineno == 1:
            if not line.startswith("#lang:") or not line[len("#lang:"):].strip():
                raise DictionaryError("first line must be '#lang:<language>'")
            language = line[len("#lang:"):].strip()
            continue
        if not line:
            raise DictionaryError(f"blank line {lineno} would shift block values")
        if any(c in "|,()" or c.isspace() for c in line):
            raise DictionaryError(f"line {lineno}: {line!r} is not a plain word")
        words.append(line.lower())
    if not words:
        raise DictionaryError("dictionary has no words")
    if len(words) == _FULL_FIDELITY_SIZE and len(set(words)) != _FULL_FIDELITY_SIZE:
        raise DictionaryError("full-size dictionary must have unique words")
    return Dictionary(words=tuple(words), language=language)


def load_dictionary(path: str | Path) -> Dictionary:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DictionaryError(f"cannot read dictionary {p}: {exc}") from exc
    return _parse_dictionary(text.splitlines())


def fixture_dictionary() -> Dictionary:
    """The packaged 64-word English fixture dictionary."""
    text = resources.files("trustproto.data").joinpath("fixture_en.txt").read_text("utf-8")
    return _parse_dictionary(text.splitlines())
