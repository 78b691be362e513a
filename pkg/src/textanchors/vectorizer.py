"""Non-normalized TF-IDF vectorization.

Component ``j`` of a document vector is ``count_j * idf_j`` with the smoothed
weight ``idf_j = ln((1 + N) / (1 + df_j)) + 1``. Words unseen at fit time,
including ``UNK``, get weight zero, so masking a token and deleting it
produce the same vector.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import EmptyCorpus
from .text import UNK, Dictionary, Document


@dataclass(frozen=True)
class TfIdfVectorizer:
    vocabulary: Dictionary
    idf: tuple[float, ...]
    corpus_size: int

    def __post_init__(self) -> None:
        idf = tuple(float(x) for x in self.idf)
        if len(idf) != len(self.vocabulary):
            raise ValueError("one idf weight per vocabulary word is required")
        if any(not x >= 0.0 for x in idf):
            raise ValueError("idf weights must be nonnegative")
        object.__setattr__(self, "idf", idf)

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def idf_of(self, word: str) -> float:
        j = self.vocabulary.index(word)
        return 0.0 if j is None else self.idf[j]

    def vectorize(self, doc: Document) -> sparse.csr_array:
        """Return a ``(1, D)`` sparse row."""
        cols, vals = [], []
        for word, count in Counter(doc.tokens).items():
            j = self.vocabulary.index(word)
            if j is not None:
                cols.append(j)
                vals.append(count * self.idf[j])
        order = np.argsort(cols, kind="stable")
        return sparse.csr_array(
            (np.asarray(vals, dtype=float)[order], np.asarray(cols, dtype=np.int64)[order], [0, len(cols)]),
            shape=(1, self.dim),
        )

    def transform(self, docs: Sequence[Document]) -> sparse.csr_array:
        rows = [self.vectorize(doc) for doc in docs]
        if not rows:
            return sparse.csr_array((0, self.dim))
        return sparse.vstack(rows, format="csr")

    def to_dict(self) -> dict:
        return {"words": list(self.vocabulary.words), "idf": list(self.idf), "corpus_size": self.corpus_size}

    @classmethod
    def from_dict(cls, data: dict) -> "TfIdfVectorizer":
        return cls(Dictionary(tuple(data["words"])), tuple(data["idf"]), int(data["corpus_size"]))

    def save(self, path: str | Path) -> None:
        # float repr is the shortest string that round-trips bit-exactly
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfIdfVectorizer":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_idf(corpus: Sequence[Document]) -> TfIdfVectorizer:
    if not corpus:
        raise EmptyCorpus("cannot fit a vectorizer on an empty corpus")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(doc.tokens))
    words = tuple(dict.fromkeys(tok for doc in corpus for tok in doc.tokens if tok != UNK))
    n = len(corpus)
    idf = tuple(math.log((1 + n) / (1 + df[w])) + 1.0 for w in words)
    return TfIdfVectorizer(Dictionary(words), idf, n)
