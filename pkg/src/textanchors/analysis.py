"""Checks of the theoretical results on random linear instances, and the
Jaccard experiment comparing selected anchors with the top-weighted words."""

from __future__ import annotations

import functools
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .engine import DEFAULT_EPSILON, enumerate_anchors, select
from .errors import EmptyBucket, HypothesisViolated, HypothesisWarning, RankTies
from .models import LinearModel
from .perturbation import derive_seed
from .precision import (
    ApproxPrecision,
    BoundReport,
    EmpiricalPrecision,
    approx_precision,
    approx_precisions,
    besseen_bound,
    exact_precision,
    exact_precisions,
)
from .text import Dictionary, Document, LocalStats, MultiplicityAnchor, jaccard, local_stats
from .vectorizer import fit_idf, TfIdfVectorizer

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """Ordered map; identical results for any ``jobs``."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# -- random instances ---------------------------------------------------------


@dataclass(frozen=True)
class InstanceSpec:
    """Distribution of random linear instances.

    ``target`` selects the intercept rule: ``"prop2"`` draws the intercept
    uniformly in ``(-g/2, g/2)`` where ``g`` is the score without intercept,
    and keeps the draw only if the intercept exceeds ``-gamma/2``; other
    targets draw it uniformly in ``coef_range``. Every instance is classified 1.
    """

    d_range: tuple[int, int] = (2, 6)
    m_range: tuple[int, int] = (1, 4)
    coef_range: tuple[float, float] = (-2.0, 2.0)
    target: str = "prop1"
    idf: str = "unit"
    seed: int = 0


@dataclass(frozen=True, eq=False)
class Instance:
    index: int
    model: LinearModel
    example: Document
    stats: LocalStats


def _fitted_vectorizer(words: Sequence[str], rng: np.random.Generator) -> TfIdfVectorizer:
    docs = [Document(tuple(words))]
    for _ in range(9):
        picked = tuple(w for w in words if rng.random() < 0.5)
        if picked:
            docs.append(Document(picked))
    return fit_idf(docs)


def generate_instance(spec: InstanceSpec, index: int) -> Instance:
    rng = np.random.default_rng(derive_seed(spec.seed, index))
    lo, hi = spec.coef_range
    while True:
        d = int(rng.integers(spec.d_range[0], spec.d_range[1] + 1))
        mult = rng.integers(spec.m_range[0], spec.m_range[1] + 1, size=d)
        coef = rng.uniform(lo, hi, size=d)
        if np.any(coef == 0.0):
            continue
        words = [f"w{j + 1}" for j in range(d)]
        vectorizer = (
            TfIdfVectorizer(Dictionary(tuple(words)), (1.0,) * d, 1)
            if spec.idf == "unit"
            else _fitted_vectorizer(words, rng)
        )
        idf = np.array(vectorizer.idf)
        base = float(np.sum(coef * idf * mult))
        if spec.target == "prop2":
            weights = coef * idf
            if not np.any(coef > 0) or len(set(weights.tolist())) < d or base <= 0:
                continue
            intercept = rng.uniform(-base / 2, base / 2)
            if not intercept > -(base + intercept) / 2:
                continue
        else:
            intercept = rng.uniform(lo, hi)
        tokens = [w for w, m in zip(words, mult) for _ in range(int(m))]
        example = Document(tuple(tokens[k] for k in rng.permutation(len(tokens))))
        model = LinearModel(coef, intercept, vectorizer)
        if model.predict(example) != 1:
            continue
        return Instance(index, model, example, local_stats(example))


# -- precision oracle agreement ------------------------------------------------


@dataclass(frozen=True)
class OracleRow:
    instance: int
    anchor: tuple[int, ...]
    exact: float
    empirical: float
    stderr: float
    agree: bool


def _oracle_rows(index: int, spec: InstanceSpec, n: int, z: float) -> list[OracleRow]:
    inst = generate_instance(spec, index)
    emp = EmpiricalPrecision(inst.model, inst.example, inst.stats, n, derive_seed(spec.seed, index, 1))
    anchors = enumerate_anchors(inst.stats)
    rows = []
    for anchor, est in zip(anchors, exact_precisions(inst.model, inst.stats, anchors)):
        exact = est.value
        value = emp(anchor)
        # spread of the estimator under the exact law
        stderr = (exact * (1.0 - exact) / n) ** 0.5
        rows.append(OracleRow(index, anchor.counts, exact, value, stderr, abs(value - exact) <= z * stderr))
    return rows


def sweep_oracle(spec: InstanceSpec, trials: int, n: int = 100_000, z: float = 4.0, jobs: int = 1) -> list[OracleRow]:
    fn = functools.partial(_oracle_rows, spec=spec, n=n, z=z)
    return [row for rows in parallel_map(fn, range(trials), jobs) for row in rows]


# -- Gaussian approximation bound ------------------------------------------------


def verify_prop1(instance: Instance, anchor: MultiplicityAnchor) -> BoundReport:
    stats = instance.stats
    if 2 * anchor.length > stats.b:
        raise HypothesisViolated(f"anchor length {anchor.length} exceeds half the document length {stats.b}")
    rhs = besseen_bound(instance.model, stats)
    exact = exact_precision(instance.model, stats, anchor).value
    approx = approx_precision(instance.model, stats, anchor)
    return BoundReport(abs(exact - approx), rhs)


@dataclass(frozen=True)
class Prop1Row:
    instance: int
    anchor: tuple[int, ...]
    length: int
    lhs: float
    rhs: float
    holds: bool


def _prop1_rows(index: int, spec: InstanceSpec) -> list[Prop1Row]:
    inst = generate_instance(spec, index)
    stats, model = inst.stats, inst.model
    anchors = [a for a in enumerate_anchors(stats) if 2 * a.length <= stats.b]
    rhs = besseen_bound(model, stats)
    exact = exact_precisions(model, stats, anchors)
    approx = approx_precisions(model, stats, anchors)
    rows = []
    for anchor, e, p in zip(anchors, exact, approx):
        report = BoundReport(abs(e.value - p), rhs)
        rows.append(Prop1Row(index, anchor.counts, anchor.length, report.lhs, report.rhs, report.holds))
    return rows


def sweep_prop1(spec: InstanceSpec, trials: int, jobs: int = 1) -> list[Prop1Row]:
    fn = functools.partial(_prop1_rows, spec=spec)
    return [row for rows in parallel_map(fn, range(trials), jobs) for row in rows]


# -- prefix structure of the selected anchor --------------------------------------


@dataclass(frozen=True)
class Prop2Report:
    chosen: tuple[int, ...]
    ranking: tuple[int, ...]
    prefix_valid: bool
    in_A_plus: bool
    j0: int | None

    @property
    def passed(self) -> bool:
        return self.prefix_valid and self.in_A_plus


def check_prefix_structure(
    anchor: MultiplicityAnchor,
    stats: LocalStats,
    weights: Sequence[float],
    coef: Sequence[float] | None = None,
) -> Prop2Report:
    """Check whether ``anchor`` saturates words in decreasing ``weights`` order.

    ``weights`` are the per-word ``coef * idf`` values in ``stats`` order;
    ``coef`` supplies the signs for the positive-support test and defaults to
    ``weights``. ``j0`` is 1-based in ranked order.
    """
    weights = np.asarray(weights, dtype=float)
    if len(set(weights.tolist())) < len(weights):
        raise RankTies("word weights must be pairwise distinct")
    coef = weights if coef is None else np.asarray(coef, dtype=float)
    ranking = tuple(int(j) for j in np.argsort(-weights, kind="stable"))
    a = [anchor.counts[j] for j in ranking]
    m = [stats.multiplicities[j] for j in ranking]
    split = next((j for j in range(len(a)) if a[j] < m[j]), len(a) - 1)
    prefix_valid = all(x == 0 for x in a[split + 1 :])
    in_plus = all(c > 0 for c, x in zip(coef, anchor.counts) if x > 0)
    return Prop2Report(anchor.counts, ranking, prefix_valid, in_plus, split + 1 if prefix_valid else None)


def prop2_hypotheses(instance: Instance) -> None:
    model, stats = instance.model, instance.stats
    weights = model.weights(stats)
    if len(set(weights.tolist())) < len(weights):
        raise HypothesisViolated("word weights are not pairwise distinct")
    if not np.any(model.coefficients(stats) > 0):
        raise HypothesisViolated("no word has a positive coefficient")
    gam = model.gamma(stats)
    if model.predict(instance.example) != 1:
        raise HypothesisViolated("the example is not classified 1")
    if not model.intercept > -gam / 2:
        raise HypothesisViolated(f"intercept {model.intercept} is not above -gamma/2 = {-gam / 2}")


def verify_prop2(instance: Instance, epsilon: float = DEFAULT_EPSILON) -> Prop2Report:
    prop2_hypotheses(instance)
    model, stats = instance.model, instance.stats
    anchors = enumerate_anchors(stats)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        values = approx_precisions(model, stats, anchors)
    result = select(ApproxPrecision(model, stats), anchors, epsilon, values=values)
    return check_prefix_structure(result.chosen, stats, model.weights(stats), model.coefficients(stats))


@dataclass(frozen=True)
class Prop2Row:
    instance: int
    d: int
    multiplicities: tuple[int, ...]
    chosen: tuple[int, ...]
    prefix_valid: bool
    in_A_plus: bool
    j0: int | None


def _prop2_row(index: int, spec: InstanceSpec, epsilon: float) -> Prop2Row:
    inst = generate_instance(spec, index)
    rep = verify_prop2(inst, epsilon)
    return Prop2Row(index, inst.stats.d, inst.stats.multiplicities, rep.chosen, rep.prefix_valid, rep.in_A_plus, rep.j0)


def sweep_prop2(spec: InstanceSpec, trials: int, epsilon: float = DEFAULT_EPSILON, jobs: int = 1) -> list[Prop2Row]:
    fn = functools.partial(_prop2_row, spec=spec, epsilon=epsilon)
    return parallel_map(fn, range(trials), jobs)


# -- Jaccard experiment ------------------------------------------------------------


@dataclass(frozen=True)
class BucketSummary:
    label: str
    documents: int
    runs: int
    mean: float
    sd: float


def top_words(stats: LocalStats, weights: Sequence[float], k: int) -> frozenset[str]:
    order = sorted(range(stats.d), key=lambda j: (-weights[j], j))
    return frozenset(stats.words[j] for j in order[:k])


def _document_jaccards(
    item: tuple[int, Document],
    model: LinearModel,
    repetitions: int,
    evaluator: str,
    n: int,
    epsilon: float,
    seed: int,
    tie: str,
) -> list[float]:
    index, doc = item
    stats = local_stats(doc)
    weights = model.weights(stats)
    anchors = enumerate_anchors(stats)
    values = None
    if evaluator == "approx":
        values = approx_precisions(model, stats, anchors)
    elif evaluator == "exact":
        values = [e.value for e in exact_precisions(model, stats, anchors)]
    out = []
    for rep in range(repetitions):
        run_seed = derive_seed(seed, index, rep)
        if evaluator == "empirical":
            p = EmpiricalPrecision(model, doc, stats, n, run_seed)
            result = select(p, anchors, epsilon, tie=tie, seed=run_seed)
        else:
            result = select(None, anchors, epsilon, tie=tie, seed=run_seed, values=values)
        chosen = result.chosen.words(stats)
        out.append(float(jaccard(chosen, top_words(stats, weights, len(chosen)))))
    return out


def jaccard_experiment(
    docs: Sequence[Document],
    model: LinearModel,
    thresholds: Sequence[float] = (0.85, 0.75),
    repetitions: int = 10,
    evaluator: str = "approx",
    n: int = 1000,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
    tie: str = "random",
    jobs: int = 1,
) -> list[BucketSummary]:
    """Mean and standard deviation of the Jaccard index between the selected
    anchor's words and the same number of top-weighted words, over all
    positively classified documents and over those whose logistic score is
    below each threshold."""
    if evaluator not in ("approx", "exact", "empirical"):
        raise ValueError(f"unknown evaluator {evaluator!r}")
    positives = [(i, doc) for i, doc in enumerate(docs) if model.predict(doc) == 1]
    fn = functools.partial(
        _document_jaccards,
        model=model,
        repetitions=repetitions,
        evaluator=evaluator,
        n=n,
        epsilon=epsilon,
        seed=seed,
        tie=tie,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        per_doc = parallel_map(fn, positives, jobs)
    scores = [model.proba(doc) for _, doc in positives]

    buckets = [("full", None)] + [(f"pr<{t:g}", t) for t in thresholds]
    out = []
    for label, t in buckets:
        members = [vals for vals, s in zip(per_doc, scores) if t is None or s < t]
        if not members:
            raise EmptyBucket(f"no positively classified document in bucket {label}")
        flat = [v for vals in members for v in vals]
        sd = statistics.pstdev(flat) if len(flat) > 1 else 0.0
        out.append(BucketSummary(label, len(members), len(flat), statistics.fmean(flat), sd))
    return out


# -- synthetic review corpus ------------------------------------------------------

POSITIVE_WORDS = ("good", "great", "tasty", "friendly", "fresh", "lovely", "perfect", "fine")
NEGATIVE_WORDS = ("bad", "awful", "rude", "bland", "cold", "dirty", "slow", "stale")
NEUTRAL_WORDS = (
    "the", "food", "service", "place", "staff", "table",
    "menu", "price", "dinner", "lunch", "room", "view",
)


def synthetic_corpus(n_docs: int = 500, seed: int = 0, positive_rate: float = 0.5) -> tuple[list[Document], list[int]]:
    """Short labeled reviews: sentiment words lean toward the label, with noise."""
    rng = np.random.default_rng(seed)
    docs, labels = [], []
    for _ in range(n_docs):
        label = int(rng.random() < positive_rate)
        own, other = (POSITIVE_WORDS, NEGATIVE_WORDS) if label else (NEGATIVE_WORDS, POSITIVE_WORDS)
        tokens = []
        for _ in range(int(rng.integers(4, 9))):
            u = rng.random()
            pool = own if u < 0.35 else other if u < 0.5 else NEUTRAL_WORDS
            tokens.append(pool[int(rng.integers(len(pool)))])
        docs.append(Document(tuple(tokens), " ".join(tokens)))
        labels.append(label)
    return docs, labels
