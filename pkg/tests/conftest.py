import numpy as np
import pytest

from textanchors import Dictionary, Document, LinearModel, TfIdfVectorizer, local_stats


def unit_vectorizer(words):
    return TfIdfVectorizer(Dictionary(tuple(words)), (1.0,) * len(words), 1)


@pytest.fixture
def w_example():
    """lambda = (1, -1), lambda0 = 0, unit idf, xi = "w1 w1 w2"."""
    vec = unit_vectorizer(["w1", "w2"])
    model = LinearModel(np.array([1.0, -1.0]), 0.0, vec)
    doc = Document(("w1", "w1", "w2"), "w1 w1 w2")
    return model, doc, local_stats(doc)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
