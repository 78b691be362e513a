"""Exhaustive anchor explanations for text classifiers, with exact, Monte
Carlo and Gaussian-approximate precision for linear TF-IDF models."""

__version__ = "0.1.0"

from .engine import SelectionResult, enumerate_anchors, enumerate_positional, select
from .models import LinearModel, TrainConfig, train_logistic
from .perturbation import PerturbationSampler, multiplicity_pmf
from .precision import (
    ApproxPrecision,
    EmpiricalPrecision,
    ExactPrecision,
    PrecisionEstimate,
    approx_precision,
    besseen_bound,
    coverage,
    empirical_precision,
    exact_precision,
    normal_cdf,
)
from .text import (
    UNK,
    Anchor,
    Dictionary,
    Document,
    LocalStats,
    MultiplicityAnchor,
    jaccard,
    local_stats,
    to_multiplicity,
    to_positional,
    tokenize,
)
from .vectorizer import TfIdfVectorizer, fit_idf
