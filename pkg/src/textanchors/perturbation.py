"""Perturbation sampling around the explained example.

Every position outside the anchor is independently replaced by ``UNK`` with
probability 1/2. The coin flips come from a Philox counter-based generator:
sample ``i`` reads 64-bit word ``i * W + k // 64`` of the keyed stream and
position ``k`` is kept iff bit ``k % 64`` of that word is set. Any slice of the
sample sequence can therefore be regenerated on its own, which makes the
output independent of batching or of how work is split between processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import InvalidRange
from .text import UNK, Anchor, Document, LocalStats, local_stats


def derive_seed(*keys: int) -> int:
    """Deterministic 64-bit sub-seed from a tuple of nonnegative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def _philox_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)


def keyed_words(seed: int, start: int, stop: int) -> np.ndarray:
    """64-bit words ``start..stop-1`` of the stream keyed by ``seed``."""
    first_block, offset = divmod(start, 4)
    gen = np.random.Philox(key=_philox_key(seed))
    if first_block:
        gen.advance(first_block)
    raw = gen.random_raw(offset + stop - start)
    return np.asarray(raw[offset:], dtype=np.uint64)


def keyed_bits(seed: int, n: int, width: int, start: int = 0) -> np.ndarray:
    """Boolean ``(n, width)`` array of fair coin flips for samples ``start..start+n-1``."""
    per_sample = max(1, -(-width // 64))
    words = keyed_words(seed, start * per_sample, (start + n) * per_sample)
    as_bytes = words.reshape(n, per_sample).astype("<u8", copy=False).view(np.uint8)
    nbytes = -(-width // 8)
    bits = np.unpackbits(as_bytes[:, :nbytes], axis=1, bitorder="little")
    return bits[:, :width].view(bool)


@dataclass(frozen=True)
class PerturbationSampler:
    """Draws perturbed copies of ``example`` that keep every anchored position.

    ``scheme="bernoulli"`` is the default independent per-position scheme.
    ``scheme="copies"`` follows the copy-based description instead: for each
    free position a number of copies ``Bin(n, 1/2)`` is drawn and that many
    copies, chosen uniformly, get the position masked. It uses a sequential
    numpy stream, so it is reproducible but not sliceable.
    """

    example: Document
    anchor: Anchor | None
    seed: int = 0
    scheme: str = "bernoulli"

    def __post_init__(self) -> None:
        if self.anchor is not None:
            self.anchor.check(self.example)
        if self.scheme not in ("bernoulli", "copies"):
            raise ValueError(f"unknown sampling scheme {self.scheme!r}")

    @property
    def anchored(self) -> np.ndarray:
        mask = np.zeros(len(self.example), dtype=bool)
        if self.anchor is not None:
            mask[list(self.anchor.positions)] = True
        return mask

    def keep_masks(self, n: int, start: int = 0) -> np.ndarray:
        """``(n, b)`` array, True where the token of the example survives."""
        if n < 1:
            raise ValueError("n must be at least 1")
        b = len(self.example)
        if self.scheme == "bernoulli":
            keep = keyed_bits(self.seed, n, b, start)
        else:
            if start:
                raise ValueError("the copies scheme cannot start mid-stream")
            rng = np.random.default_rng(self.seed)
            keep = np.ones((n, b), dtype=bool)
            for k in range(b):
                changed = rng.choice(n, rng.binomial(n, 0.5), replace=False)
                keep[changed, k] = False
        keep |= self.anchored
        return keep

    def kept_counts(self, n: int, stats: LocalStats | None = None, start: int = 0) -> np.ndarray:
        """``(n, d)`` surviving count of each distinct word, in ``stats`` order.

        Same samples as :meth:`keep_masks`, counted with popcounts on the raw
        words instead of materializing the mask.
        """
        stats = stats or local_stats(self.example)
        if self.scheme != "bernoulli":
            keep = self.keep_masks(n, start)
            index = {w: i for i, w in enumerate(stats.words)}
            counts = np.zeros((n, stats.d), dtype=np.int64)
            for k, tok in enumerate(self.example.tokens):
                counts[:, index[tok]] += keep[:, k]
            return counts
        b = len(self.example)
        per_sample = max(1, -(-b // 64))
        words = keyed_words(self.seed, start * per_sample, (start + n) * per_sample).reshape(n, per_sample)
        anchored = self.anchored
        index = {w: i for i, w in enumerate(stats.words)}
        free_masks = np.zeros((stats.d, per_sample), dtype=np.uint64)
        fixed = np.zeros(stats.d, dtype=np.int64)
        for k, tok in enumerate(self.example.tokens):
            j = index[tok]
            if anchored[k]:
                fixed[j] += 1
            else:
                free_masks[j, k // 64] |= np.uint64(1 << (k % 64))
        counts = np.empty((stats.d, n), dtype=np.int64)
        for j in range(stats.d):
            row = counts[j]
            row.fill(fixed[j])
            for q in range(per_sample):
                if free_masks[j, q]:
                    row += np.bitwise_count(words[:, q] & free_masks[j, q])
        return counts.T

    def sample(self, n: int, start: int = 0) -> list[Document]:
        tokens = np.array(self.example.tokens, dtype=object)
        out = []
        for row in self.keep_masks(n, start):
            toks = tuple(np.where(row, tokens, UNK))
            out.append(Document(toks, " ".join(toks)))
        return out


def multiplicity_pmf(m: int, a: int) -> dict[int, Fraction]:
    """Law of the surviving count of a word with ``m`` occurrences, ``a`` anchored."""
    if not 0 <= a <= m:
        raise InvalidRange(f"need 0 <= a <= m, got a={a}, m={m}")
    free = m - a
    return {a + k: Fraction(comb(free, k), 2**free) for k in range(free + 1)}
