import numpy as np
import pytest

from textanchors import Document, LinearModel, TrainConfig, fit_idf, local_stats, train_logistic
from textanchors.errors import DegenerateLabels, EmptyCorpus
from textanchors.models import read_labeled_corpus, sigmoid

from conftest import unit_vectorizer


class TestDecide:
    def test_w_example(self, w_example):
        model, doc, stats = w_example
        assert model.score(doc) == 1.0
        assert model.decide(doc) == 1
        assert model.gamma(stats) == 1.0

    def test_zero_score_is_class_zero(self):
        model = LinearModel(np.array([1.0, -1.0]), 0.0, unit_vectorizer(["w1", "w2"]))
        doc = Document(("w1", "w2"))
        assert model.score(doc) == 0.0 and model.predict(doc) == 0

    def test_oov_words_ignored(self, w_example):
        model, doc, _ = w_example
        assert model.score(Document(doc.tokens + ("other", "UNK"))) == model.score(doc)

    def test_predict_counts_matches_predict(self, w_example):
        model, _, stats = w_example
        counts = np.array([[a, b] for a in range(3) for b in range(2)])
        labels = model.predict_counts(stats, counts)
        for row, lab in zip(counts, labels):
            doc = Document(("w1",) * row[0] + ("w2",) * row[1] + ("UNK",))
            assert model.predict(doc) == lab

    def test_coef_shape_checked(self):
        with pytest.raises(ValueError):
            LinearModel(np.zeros(3), 0.0, unit_vectorizer(["a", "b"]))


class TestSigmoid:
    def test_symmetry_and_half(self):
        assert sigmoid(0.0) == 0.5
        t = np.linspace(-30, 30, 61)
        np.testing.assert_allclose(sigmoid(t) + sigmoid(-t), 1.0, atol=1e-15)

    def test_threshold_equivalence_on_scores(self):
        t = np.array([-5.0, -0.3, -1e-3, 1e-3, 0.3, 5.0])
        assert np.array_equal(sigmoid(t) > 0.5, t > 0)


class TestTraining:
    @pytest.fixture
    def toy(self):
        docs = [Document(("good",))] * 50 + [Document(("bad",))] * 50
        return docs, [1] * 50 + [0] * 50

    def test_signs(self, toy):
        docs, labels = toy
        vec = fit_idf(docs)
        model = train_logistic(docs, labels, vec)
        stats_good = local_stats(Document(("good",)))
        assert model.coefficients(stats_good)[0] > 0
        assert model.coefficients(local_stats(Document(("bad",))))[0] < 0
        assert all(model.predict(d) == y for d, y in zip(docs, labels))

    def test_zero_iterations(self, toy):
        docs, labels = toy
        model = train_logistic(docs, labels, fit_idf(docs), TrainConfig(iterations=0))
        assert not model.coef.any() and model.intercept == 0.0

    def test_deterministic(self, toy):
        docs, labels = toy
        vec = fit_idf(docs)
        a = train_logistic(docs, labels, vec, TrainConfig(iterations=50))
        b = train_logistic(docs, labels, vec, TrainConfig(iterations=50))
        assert np.array_equal(a.coef, b.coef) and a.intercept == b.intercept

    def test_degenerate_and_empty(self, toy):
        docs, _ = toy
        with pytest.raises(DegenerateLabels):
            train_logistic(docs, [1] * 100, fit_idf(docs))
        with pytest.raises(EmptyCorpus):
            train_logistic([], [], fit_idf(docs))


class TestPersistence:
    def test_round_trip(self, w_example, tmp_path):
        model, doc, _ = w_example
        model.save(tmp_path / "m.json")
        back = LinearModel.load(tmp_path / "m.json", model.vectorizer)
        assert np.array_equal(back.coef, model.coef) and back.intercept == model.intercept

    def test_labeled_corpus(self, tmp_path):
        path = tmp_path / "l.tsv"
        path.write_text("1\tGood food\n0\tbad\n")
        docs, labels = read_labeled_corpus(path)
        assert labels == [1, 0] and docs[0].tokens == ("good", "food")
        path.write_text("2\tx\n")
        with pytest.raises(ValueError):
            read_labeled_corpus(path)
