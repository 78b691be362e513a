"""Evaluation functions for anchors, coverage, and the Gaussian error bound.

Three ways to score an anchor ``a`` of the example:

* :func:`exact_precision` enumerates the joint law of the surviving word
  counts ``M_j = a_j + Bin(m_j - a_j, 1/2)`` for a linear model.
* :func:`empirical_precision` is the Monte Carlo mean over perturbed samples
  and works for any classifier.
* :func:`approx_precision` is the Gaussian surrogate ``1 - Phi(L(a))``.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyCorpus, HypothesisViolated, HypothesisWarning, TooLarge
from .models import Classifier, LinearModel
from .perturbation import PerturbationSampler, derive_seed
from .text import Anchor, Document, LocalStats, MultiplicityAnchor, local_stats, to_positional

BERRY_ESSEEN_CONSTANT = 7.15
MAX_OUTCOMES = 10**7
_DYADIC_LIMIT = 62


@dataclass(frozen=True)
class PrecisionEstimate:
    value: float
    n: int = 0
    stderr: float = 0.0
    exact: Fraction | None = None


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def _binomial_row(f: int, dyadic: bool) -> np.ndarray:
    row = [comb(f, i) for i in range(f + 1)]
    return np.array(row, dtype=np.int64) if dyadic else np.array(row, dtype=float) / 2.0**f


def _enumerate_precision(
    w: np.ndarray, m: np.ndarray, a: np.ndarray, intercept: float
) -> PrecisionEstimate:
    free = m - a
    outcomes = math.prod(int(f) + 1 for f in free)
    if outcomes > MAX_OUTCOMES:
        raise TooLarge(f"{outcomes} outcomes exceed the enumeration cap of {MAX_OUTCOMES}")
    total_free = int(free.sum())
    dyadic = total_free <= _DYADIC_LIMIT

    # Outer sums reproduce linear_scores' left-to-right accumulation.
    scores = np.zeros(1)
    weights = np.ones(1, dtype=np.int64 if dyadic else float)
    for aj, fj, wj in zip(a, free, w):
        term = np.arange(aj, aj + fj + 1) * wj
        scores = (scores[:, None] + term[None, :]).ravel()
        weights = (weights[:, None] * _binomial_row(int(fj), dyadic)[None, :]).ravel()
    scores += intercept
    positive = scores > 0.0

    if dyadic:
        frac = Fraction(int(weights[positive].sum(dtype=np.int64)), 2**total_free)
        return PrecisionEstimate(float(frac), exact=frac)
    return PrecisionEstimate(min(1.0, float(weights[positive].sum())))


def exact_precision(model: LinearModel, stats: LocalStats, anchor: MultiplicityAnchor) -> PrecisionEstimate:
    """Probability that a perturbed sample is classified 1, by enumeration.

    Each outcome ``(M_1, ..., M_d)`` carries the integer weight
    ``prod_j C(m_j - a_j, M_j - a_j)`` out of ``2 ** sum_j (m_j - a_j)``. When
    that exponent is at most 62 the result is an exact dyadic rational;
    beyond it the weights are carried in floating point.
    """
    return exact_precisions(model, stats, [anchor])[0]


def exact_precisions(
    model: LinearModel, stats: LocalStats, anchors: Sequence[MultiplicityAnchor]
) -> list[PrecisionEstimate]:
    local, w = model.terms(stats)
    m = np.array(stats.multiplicities, dtype=np.int64)[local]
    out = []
    for anchor in anchors:
        anchor.check(stats)
        a = np.array(anchor.counts, dtype=np.int64)[local]
        out.append(_enumerate_precision(w, m, a, model.intercept))
    return out


def empirical_precision(classifier: Classifier, sampler: PerturbationSampler, n: int) -> PrecisionEstimate:
    """Fraction of ``n`` perturbed samples that the classifier labels 1."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if hasattr(classifier, "predict_counts"):
        stats = local_stats(sampler.example)
        labels = np.asarray(classifier.predict_counts(stats, sampler.kept_counts(n, stats)))
    else:
        labels = np.array([classifier.predict(doc) for doc in sampler.sample(n)])
    value = float(np.count_nonzero(labels == 1)) / n
    return PrecisionEstimate(value, n, math.sqrt(value * (1.0 - value) / n))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_sf(x: float) -> float:
    """``1 - Phi(x)`` without cancellation for large ``x``."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _check_weights(weights: np.ndarray) -> bool:
    if np.any(weights == 0.0):
        warnings.warn("some word has coef * idf == 0; the Gaussian bound does not apply", HypothesisWarning, stacklevel=3)
        return False
    return True


def approx_statistic(model: LinearModel, stats: LocalStats, anchor: MultiplicityAnchor) -> tuple[float, float]:
    """Numerator and denominator of ``L(a)``."""
    anchor.check(stats)
    num, den = _statistic(model.weights(stats), stats, np.array([anchor.counts], dtype=float), model.intercept)
    return float(num[0]), float(den[0])


def _statistic(w: np.ndarray, stats: LocalStats, a: np.ndarray, intercept: float) -> tuple[np.ndarray, np.ndarray]:
    m = np.array(stats.multiplicities, dtype=float)
    num = -intercept - 0.5 * ((m + a) @ w)
    den = np.sqrt(0.25 * ((m - a) @ (w * w)))
    return num, den


def _surrogate(num: float, den: float) -> float:
    if den == 0.0:
        return 1.0 if num < 0 else (0.0 if num > 0 else 0.5)
    return normal_sf(num / den)


def approx_precision(model: LinearModel, stats: LocalStats, anchor: MultiplicityAnchor) -> float:
    """``1 - Phi(L(a))``; a zero denominator resolves by the numerator's sign."""
    _check_weights(model.weights(stats))
    return _surrogate(*approx_statistic(model, stats, anchor))


def approx_precisions(model: LinearModel, stats: LocalStats, anchors: Sequence[MultiplicityAnchor]) -> list[float]:
    w = model.weights(stats)
    _check_weights(w)
    for anchor in anchors:
        anchor.check(stats)
    a = np.array([anchor.counts for anchor in anchors], dtype=float).reshape(len(anchors), stats.d)
    num, den = _statistic(w, stats, a, model.intercept)
    return [_surrogate(float(x), float(y)) for x, y in zip(num, den)]


def besseen_bound(model: LinearModel, stats: LocalStats) -> float:
    w2 = model.weights(stats) ** 2
    if np.any(w2 == 0.0):
        raise HypothesisViolated("the bound needs coef * idf != 0 for every word of the example")
    m = np.array(stats.multiplicities, dtype=float)
    return float(BERRY_ESSEEN_CONSTANT * (w2.max() / w2.min()) ** 1.5 * (m.max() / m.min()) ** 1.5 / math.sqrt(stats.d))


def coverage(requirement: Mapping[str, int], corpus: Sequence[Document]) -> float:
    """Share of corpus documents holding every word at least the required number of times."""
    if not corpus:
        raise EmptyCorpus("coverage needs a non-empty corpus")
    hits = 0
    for doc in corpus:
        counts = Counter(doc.tokens)
        if all(counts[w] >= k for w, k in requirement.items()):
            hits += 1
    return hits / len(corpus)


# Evaluation functions consumed by the selection engine. Each maps an anchor
# of the example to a value in [0, 1] and is a picklable callable.


@dataclass(frozen=True, eq=False)
class ExactPrecision:
    model: LinearModel
    stats: LocalStats

    def __call__(self, anchor: MultiplicityAnchor) -> float:
        return exact_precision(self.model, self.stats, anchor).value


@dataclass(frozen=True, eq=False)
class ApproxPrecision:
    model: LinearModel
    stats: LocalStats

    def __call__(self, anchor: MultiplicityAnchor) -> float:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HypothesisWarning)
            return approx_precision(self.model, self.stats, anchor)


@dataclass(frozen=True, eq=False)
class EmpiricalPrecision:
    """Monte Carlo precision with a sub-seed per anchor.

    The sub-seed is derived from ``seed`` and the anchor's index in the
    lexicographic enumeration, so the value of an anchor does not depend on
    which other anchors are evaluated or in what order.
    """

    classifier: Classifier
    example: Document
    stats: LocalStats
    n: int = 10000
    seed: int = 0

    def estimate(self, anchor: MultiplicityAnchor | Anchor) -> PrecisionEstimate:
        if isinstance(anchor, MultiplicityAnchor):
            index = anchor.index(self.stats)
            positional = to_positional(anchor, self.example, self.stats)
        else:
            index = sum(1 << k for k in anchor.positions) - 1
            positional = anchor
        sampler = PerturbationSampler(self.example, positional, derive_seed(self.seed, index))
        return empirical_precision(self.classifier, sampler, self.n)

    def __call__(self, anchor: MultiplicityAnchor | Anchor) -> float:
        return self.estimate(anchor).value
