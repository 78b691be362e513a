"""Documents, dictionaries and the two anchor representations.

A document is a sequence of lower-cased word tokens. Perturbed documents may
contain the reserved ``UNK`` token, which is upper-case and therefore can never
collide with a token produced by :func:`tokenize`.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .errors import BothEmpty, EmptyDocument, InvalidRange

UNK = "UNK"

_WORD_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Dictionary:
    """Ordered list of distinct words; ``UNK`` is reserved and never listed."""

    words: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        words = tuple(self.words)
        object.__setattr__(self, "words", words)
        if UNK in words:
            raise ValueError("UNK cannot be a dictionary entry")
        index = {w: i for i, w in enumerate(words)}
        if len(index) != len(words):
            raise ValueError("dictionary words must be distinct")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self._index

    def index(self, word: str) -> int | None:
        return self._index.get(word)


@dataclass(frozen=True)
class Document:
    tokens: tuple[str, ...]
    source_text: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise EmptyDocument("a document needs at least one token")

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)


def tokenize(text: str) -> Document:
    """Split lower-cased ``text`` into maximal alphanumeric runs.

    >>> tokenize("This is GOOD.").tokens
    ('this', 'is', 'good')
    """
    tokens = tuple(_WORD_RE.findall(text.lower()))
    if not tokens:
        raise EmptyDocument(f"no token in {text!r}")
    return Document(tokens, text)


@dataclass(frozen=True)
class LocalStats:
    """Distinct words of a document in first-occurrence order, with counts."""

    words: tuple[str, ...]
    multiplicities: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.words)

    @property
    def b(self) -> int:
        return sum(self.multiplicities)

    def position_of(self, word: str) -> int:
        return self.words.index(word)


def local_stats(doc: Document) -> LocalStats:
    counts = Counter(doc.tokens)
    words = tuple(dict.fromkeys(doc.tokens))
    return LocalStats(words, tuple(counts[w] for w in words))


@dataclass(frozen=True, order=True)
class Anchor:
    """Positional anchor: a non-empty set of token positions of the example."""

    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        positions = tuple(sorted(set(self.positions)))
        if not positions:
            raise InvalidRange("an anchor must hold at least one position")
        if positions[0] < 0:
            raise InvalidRange("negative position")
        object.__setattr__(self, "positions", positions)

    @property
    def length(self) -> int:
        return len(self.positions)

    def sort_key(self) -> tuple[int, ...]:
        return self.positions

    def check(self, doc: Document) -> None:
        if self.positions[-1] >= len(doc):
            raise InvalidRange(f"position {self.positions[-1]} outside a document of length {len(doc)}")


@dataclass(frozen=True, order=True)
class MultiplicityAnchor:
    """Anchor as a count vector over the local dictionary of the example."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise InvalidRange("negative anchor count")
        if sum(counts) < 1:
            raise InvalidRange("an anchor must hold at least one word")
        object.__setattr__(self, "counts", counts)

    @property
    def length(self) -> int:
        return sum(self.counts)

    def sort_key(self) -> tuple[int, ...]:
        return self.counts

    def check(self, stats: LocalStats) -> None:
        if len(self.counts) != stats.d:
            raise InvalidRange(f"anchor has {len(self.counts)} entries, document has {stats.d} distinct words")
        for a, m in zip(self.counts, stats.multiplicities):
            if a > m:
                raise InvalidRange(f"anchor count {a} exceeds multiplicity {m}")

    def index(self, stats: LocalStats) -> int:
        """Position of this anchor in the lexicographic enumeration."""
        idx = 0
        for a, m in zip(self.counts, stats.multiplicities):
            idx = idx * (m + 1) + a
        return idx - 1

    def words(self, stats: LocalStats) -> frozenset[str]:
        return frozenset(w for w, a in zip(stats.words, self.counts) if a > 0)

    def requirement(self, stats: LocalStats) -> dict[str, int]:
        return {w: a for w, a in zip(stats.words, self.counts) if a > 0}


def full_anchor(stats: LocalStats) -> MultiplicityAnchor:
    return MultiplicityAnchor(stats.multiplicities)


def to_multiplicity(anchor: Anchor, doc: Document, stats: LocalStats | None = None) -> MultiplicityAnchor:
    anchor.check(doc)
    stats = stats or local_stats(doc)
    held = Counter(doc.tokens[k] for k in anchor.positions)
    return MultiplicityAnchor(tuple(held[w] for w in stats.words))


def to_positional(anchor: MultiplicityAnchor, doc: Document, stats: LocalStats | None = None) -> Anchor:
    """Canonical realization: the earliest occurrences of each anchored word."""
    stats = stats or local_stats(doc)
    anchor.check(stats)
    remaining = anchor.requirement(stats)
    positions = []
    for k, tok in enumerate(doc.tokens):
        if remaining.get(tok, 0) > 0:
            positions.append(k)
            remaining[tok] -= 1
    return Anchor(tuple(positions))


def jaccard(s: Iterable[str], t: Iterable[str]) -> Fraction:
    s, t = set(s), set(t)
    union = s | t
    if not union:
        raise BothEmpty("jaccard of two empty sets")
    return Fraction(len(s & t), len(union))


def read_corpus(path: str | Path) -> list[Document]:
    """One document per line; blank lines are rejected with their line number."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            try:
                docs.append(tokenize(line))
            except EmptyDocument as exc:
                raise EmptyDocument(f"{path}: line {lineno + 1} has no token") from exc
    return docs

