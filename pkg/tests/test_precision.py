import itertools
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from textanchors import (
    Document,
    LinearModel,
    MultiplicityAnchor,
    PerturbationSampler,
    approx_precision,
    besseen_bound,
    coverage,
    empirical_precision,
    exact_precision,
    local_stats,
    normal_cdf,
    to_positional,
)
from textanchors.engine import enumerate_anchors
from textanchors.errors import EmptyCorpus, HypothesisViolated, HypothesisWarning, TooLarge
from textanchors.precision import EmpiricalPrecision, approx_precisions, approx_statistic, exact_precisions, normal_sf

from conftest import unit_vectorizer

# high-precision values of the standard normal cdf
PHI_REFERENCE = [
    (-8, 6.2209605742717841e-16),
    (-6, 9.8658764503769814e-10),
    (-5, 2.8665157187919391e-7),
    (-4, 3.1671241833119921e-5),
    (-3.5, 0.00023262907903552504),
    (-3, 0.0013498980316300945),
    (-2.5, 0.0062096653257761352),
    (-2, 0.022750131948179207),
    (-1.5, 0.066807201268858066),
    (-1, 0.15865525393145705),
    (-0.5, 0.3085375387259869),
    (-0.1, 0.46017216272297102),
    (0.1, 0.53982783727702898),
    (0.5, 0.6914624612740131),
    (1, 0.84134474606854295),
    (1.5, 0.93319279873114193),
    (1.96, 0.97500210485177956),
    (2.5, 0.99379033467422386),
    (3.7, 0.99989220026652261),
    (6, 0.99999999901341235),
]


def brute_force(model, doc, anchor):
    """Average of decide over every keep/drop pattern of the free positions."""
    fixed = set(to_positional(anchor, doc).positions)
    free = [k for k in range(len(doc)) if k not in fixed]
    hits = 0
    for pattern in itertools.product((False, True), repeat=len(free)):
        dropped = {k for k, drop in zip(free, pattern) if drop}
        toks = tuple("UNK" if k in dropped else t for k, t in enumerate(doc.tokens))
        hits += model.predict(Document(toks))
    return Fraction(hits, 2 ** len(free))


class TestExact:
    def test_w_example(self, w_example):
        model, _, stats = w_example
        expected = {(1, 0): Fraction(3, 4), (2, 0): 1, (0, 1): Fraction(1, 4), (1, 1): Fraction(1, 2), (2, 1): 1}
        for counts, value in expected.items():
            assert exact_precision(model, stats, MultiplicityAnchor(counts)).exact == value

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.integers(1, 3), min_size=1, max_size=3),
        st.lists(st.floats(-2, 2).filter(lambda x: x != 0), min_size=3, max_size=3),
        st.floats(-2, 2),
    )
    def test_matches_brute_force(self, mult, coef, intercept):
        words = [f"w{j}" for j in range(len(mult))]
        model = LinearModel(np.array(coef[: len(mult)]), intercept, unit_vectorizer(words))
        doc = Document(tuple(w for w, m in zip(words, mult) for _ in range(m))[::-1])
        stats = local_stats(doc)
        anchors = enumerate_anchors(stats)
        for anchor, est in zip(anchors, exact_precisions(model, stats, anchors)):
            assert est.exact == brute_force(model, doc, anchor)

    def test_full_anchor_is_one(self, w_example):
        model, _, stats = w_example
        assert exact_precision(model, stats, MultiplicityAnchor((2, 1))).value == 1.0

    def test_too_large(self):
        words = [f"w{j}" for j in range(8)]
        model = LinearModel(np.ones(8), 0.0, unit_vectorizer(words))
        stats = local_stats(Document(tuple(w for w in words for _ in range(9))))
        with pytest.raises(TooLarge):
            exact_precision(model, stats, MultiplicityAnchor((1,) + (0,) * 7))

    def test_non_dyadic_path(self):
        # 70 free occurrences exceed the exact dyadic range
        words = ["p", "q"]
        model = LinearModel(np.array([1.0, -1.0]), 0.5, unit_vectorizer(words))
        stats = local_stats(Document(("p",) * 35 + ("q",) * 36))
        est = exact_precision(model, stats, MultiplicityAnchor((0, 1)))
        assert est.exact is None
        # X, Y iid Bin(35, 1/2) and we need X + 0.5 > Y + 1, i.e. X > Y;
        # P(X > Y) = (1 - P(X = Y)) / 2
        tie = Fraction(math.comb(70, 35), 2**70)
        assert est.value == pytest.approx(float((1 - tie) / 2), abs=1e-12)


class TestEmpirical:
    def test_w_example_close_to_exact(self, w_example):
        model, doc, stats = w_example
        anchor = MultiplicityAnchor((1, 0))
        est = empirical_precision(model, PerturbationSampler(doc, to_positional(anchor, doc), 7), 100_000)
        assert abs(est.value - 0.75) <= 4 * est.stderr

    def test_generic_classifier_path_agrees(self, w_example):
        model, doc, _ = w_example

        class Wrapped:
            def predict(self, d):
                return model.predict(d)

        sampler = PerturbationSampler(doc, None, 3)
        assert empirical_precision(Wrapped(), sampler, 500).value == empirical_precision(model, sampler, 500).value

    def test_full_anchor_exactly_one(self, w_example):
        model, doc, stats = w_example
        emp = EmpiricalPrecision(model, doc, stats, 5000, 1)
        assert emp(MultiplicityAnchor((2, 1))) == 1.0

    def test_order_independent(self, w_example):
        model, doc, stats = w_example
        emp = EmpiricalPrecision(model, doc, stats, 2000, 9)
        anchors = enumerate_anchors(stats)
        forward = [emp(a) for a in anchors]
        backward = [emp(a) for a in reversed(anchors)][::-1]
        assert forward == backward


class TestNormal:
    @pytest.mark.parametrize("x,value", PHI_REFERENCE)
    def test_reference(self, x, value):
        assert abs(normal_cdf(x) - value) <= 1e-7

    def test_half_at_zero(self):
        assert normal_cdf(0.0) == 0.5

    def test_monotone_and_complement(self):
        xs = np.linspace(-9, 9, 2001)
        vals = [normal_cdf(x) for x in xs]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert all(abs(normal_sf(x) - (1 - normal_cdf(x))) < 1e-15 for x in xs)


class TestApprox:
    def test_w_example(self, w_example):
        model, _, stats = w_example
        assert approx_precision(model, stats, MultiplicityAnchor((2, 0))) == pytest.approx(0.99865010196836991, abs=1e-12)
        assert approx_precision(model, stats, MultiplicityAnchor((1, 0))) == pytest.approx(0.92135039647485743, abs=1e-12)
        assert approx_precision(model, stats, MultiplicityAnchor((0, 1))) == 0.5
        assert approx_precision(model, stats, MultiplicityAnchor((2, 1))) == 1.0

    def test_statistic(self, w_example):
        model, _, stats = w_example
        num, den = approx_statistic(model, stats, MultiplicityAnchor((1, 0)))
        assert num == -1.0 and den == pytest.approx(math.sqrt(0.5))

    def test_degenerate_denominator_rule(self):
        model = LinearModel(np.array([1.0]), -5.0, unit_vectorizer(["w"]))
        stats = local_stats(Document(("w", "w")))
        assert approx_precision(model, stats, MultiplicityAnchor((2,))) == 0.0
        model = LinearModel(np.array([1.0]), -2.0, unit_vectorizer(["w"]))
        assert approx_precision(model, stats, MultiplicityAnchor((2,))) == 0.5

    def test_batch_matches_single(self, w_example):
        model, _, stats = w_example
        anchors = enumerate_anchors(stats)
        assert approx_precisions(model, stats, anchors) == [approx_precision(model, stats, a) for a in anchors]

    def test_zero_weight_warns(self):
        model = LinearModel(np.array([1.0, 0.0]), 0.0, unit_vectorizer(["a", "b"]))
        stats = local_stats(Document(("a", "b")))
        with pytest.warns(HypothesisWarning):
            approx_precision(model, stats, MultiplicityAnchor((1, 0)))


class TestBound:
    def test_values(self, w_example):
        model, _, stats = w_example
        assert besseen_bound(model, stats) == pytest.approx(7.15 * 2**1.5 / math.sqrt(2))
        assert round(besseen_bound(model, stats), 2) == 14.30
        equal = LinearModel(np.array([1.0, -1.0, 2.0, 0.5]), 0.0, unit_vectorizer(["a", "b", "c", "d"]))
        # squared weight ratio 16, multiplicity ratio 1, d = 4
        assert besseen_bound(equal, local_stats(Document(("a", "b", "c", "d")))) == pytest.approx(7.15 * 64 / 2)
        unit = LinearModel(np.ones(4), 0.0, unit_vectorizer(["a", "b", "c", "d"]))
        assert besseen_bound(unit, local_stats(Document(("a", "b", "c", "d")))) == pytest.approx(3.575)

    def test_zero_weight_raises(self):
        model = LinearModel(np.array([1.0, 0.0]), 0.0, unit_vectorizer(["a", "b"]))
        with pytest.raises(HypothesisViolated):
            besseen_bound(model, local_stats(Document(("a", "b"))))


class TestCoverage:
    def test_multiplicity_requirement(self):
        corpus = [Document(t) for t in (("a", "a", "b"), ("a", "b"), ("b",), ("a", "a"))]
        assert coverage({"a": 2}, corpus) == 0.5
        assert coverage({"a": 1, "b": 1}, corpus) == 0.5
        assert coverage({}, corpus) == 1.0

    def test_empty(self):
        with pytest.raises(EmptyCorpus):
            coverage({"a": 1}, [])
