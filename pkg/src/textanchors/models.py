"""Classifiers under explanation.

Any object with ``predict(doc) -> int`` can be explained through sampling.
:class:`LinearModel` additionally exposes the quantities the closed-form
precision results need: per-word weights ``coef_j * idf_j`` and the intercept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import DegenerateLabels, EmptyCorpus
from .text import Document, LocalStats, local_stats, tokenize
from .vectorizer import TfIdfVectorizer


@runtime_checkable
class Classifier(Protocol):
    def predict(self, doc: Document) -> int: ...


def sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(t, dtype=float)))


def linear_scores(counts: np.ndarray, weights: np.ndarray, intercept: float, columns=None) -> np.ndarray:
    """Scores ``counts[:, columns] @ weights + intercept``, one row per document.

    Terms are accumulated left to right so that a row evaluates to the same
    double no matter which code path (single document, batch of samples,
    outcome enumeration) produced it.
    """
    counts = np.asarray(counts)
    if columns is None:
        columns = range(counts.shape[1])
    scores = np.zeros(counts.shape[0])
    for j, w in zip(columns, weights):
        scores += counts[:, j].astype(np.float64) * w
    scores += intercept
    return scores


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Decides ``1`` iff ``coef . tfidf(doc) + intercept > 0``."""

    coef: np.ndarray
    intercept: float
    vectorizer: TfIdfVectorizer

    def __post_init__(self) -> None:
        coef = np.asarray(self.coef, dtype=float).copy()
        coef.setflags(write=False)
        if coef.shape != (self.vectorizer.dim,):
            raise ValueError(f"expected {self.vectorizer.dim} coefficients, got shape {coef.shape}")
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "intercept", float(self.intercept))

    def terms(self, stats: LocalStats) -> tuple[np.ndarray, np.ndarray]:
        """Local indices of the in-vocabulary words of ``stats``, in vocabulary
        order, and their weights ``coef_j * idf_j``.

        Out-of-vocabulary words have weight zero and are left out.
        """
        vocab = self.vectorizer.vocabulary
        pairs = sorted((vocab.index(w), i) for i, w in enumerate(stats.words) if w in vocab)
        local = np.array([i for _, i in pairs], dtype=np.int64)
        weights = np.array([self.coef[j] * self.vectorizer.idf[j] for j, _ in pairs], dtype=float)
        return local, weights

    def weights(self, stats: LocalStats) -> np.ndarray:
        """``coef_j * idf_j`` for every distinct word of ``stats``, in stats order."""
        out = np.zeros(stats.d)
        local, w = self.terms(stats)
        out[local] = w
        return out

    def coefficients(self, stats: LocalStats) -> np.ndarray:
        vocab = self.vectorizer.vocabulary
        return np.array([0.0 if (j := vocab.index(w)) is None else self.coef[j] for w in stats.words])

    def score_counts(self, stats: LocalStats, counts: np.ndarray) -> np.ndarray:
        """Scores for rows of per-word counts given in ``stats`` order."""
        local, w = self.terms(stats)
        return linear_scores(np.atleast_2d(counts), w, self.intercept, local)

    def score(self, doc: Document) -> float:
        stats = local_stats(doc)
        return float(self.score_counts(stats, np.array(stats.multiplicities))[0])

    def predict(self, doc: Document) -> int:
        return int(self.score(doc) > 0.0)

    decide = predict

    def proba(self, doc: Document) -> float:
        return float(sigmoid(self.score(doc)))

    def predict_counts(self, stats: LocalStats, counts: np.ndarray) -> np.ndarray:
        """Labels of documents given only their word counts (``stats`` order).

        Word positions do not matter to a TF-IDF model, so this agrees with
        :meth:`predict` on any document with these counts.
        """
        return (self.score_counts(stats, counts) > 0.0).astype(np.int8)

    def gamma(self, stats: LocalStats) -> float:
        """Score of the unperturbed example."""
        return float(self.score_counts(stats, np.array(stats.multiplicities))[0])

    def to_dict(self) -> dict:
        return {"lambda": self.coef.tolist(), "lambda0": self.intercept}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, vectorizer: TfIdfVectorizer) -> "LinearModel":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(np.array(data["lambda"], dtype=float), float(data["lambda0"]), vectorizer)


def gamma(model: LinearModel, stats: LocalStats) -> float:
    return model.gamma(stats)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    iterations: int = 2000
    l2: float = 1e-4


def train_logistic(
    docs: Sequence[Document],
    labels: Sequence[int],
    vectorizer: TfIdfVectorizer,
    config: TrainConfig = TrainConfig(),
) -> LinearModel:
    """Full-batch gradient descent on the L2-penalized mean logistic loss,
    starting from zero. The intercept is not penalized."""
    if not docs:
        raise EmptyCorpus("no training documents")
    y = np.asarray(labels, dtype=float)
    if y.shape != (len(docs),):
        raise ValueError("one label per document is required")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise ValueError("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("both classes must be present to train")
    X = vectorizer.transform(docs)
    n = len(docs)
    w = np.zeros(vectorizer.dim)
    b = 0.0
    for _ in range(config.iterations):
        residual = sigmoid(X @ w + b) - y
        w = w - config.learning_rate * (X.T @ residual / n + config.l2 * w)
        b = b - config.learning_rate * residual.mean()
    return LinearModel(w, b, vectorizer)


def read_labeled_corpus(path: str | Path) -> tuple[list[Document], list[int]]:
    """Parse ``label<TAB>text`` lines."""
    docs, labels = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            label, sep, text = line.partition("\t")
            if not sep or label not in ("0", "1"):
                raise ValueError(f"{path}: line {lineno} is not 'label<TAB>text' with label 0 or 1")
            docs.append(tokenize(text))
            labels.append(int(label))
    return docs, labels
