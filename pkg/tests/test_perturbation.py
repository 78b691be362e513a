from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats as sps

from textanchors import Anchor, Document, PerturbationSampler, local_stats, multiplicity_pmf
from textanchors.errors import InvalidRange
from textanchors.perturbation import derive_seed, keyed_bits

DOC = Document(("a", "b", "a", "c", "a", "b"))


class TestSampler:
    def test_full_anchor_keeps_everything(self):
        s = PerturbationSampler(DOC, Anchor(tuple(range(len(DOC)))), seed=3)
        assert all(d.tokens == DOC.tokens for d in s.sample(50))

    def test_two_free_positions_four_outcomes(self):
        doc = Document(("x", "y", "z"))
        s = PerturbationSampler(doc, Anchor((1,)), seed=1)
        seen = Counter(tuple(row) for row in s.keep_masks(4000))
        assert set(seen) == {(a, True, c) for a in (False, True) for c in (False, True)}
        assert all(abs(v / 4000 - 0.25) < 0.03 for v in seen.values())

    def test_mask_rate_and_independence(self):
        masks = PerturbationSampler(DOC, None, seed=11).keep_masks(100_000)
        assert np.all(np.abs(masks.mean(axis=0) - 0.5) < 0.01)
        corr = np.corrcoef(masks.T.astype(float))
        assert np.max(np.abs(corr - np.eye(len(DOC)))) < 0.02

    def test_unk_rendering(self):
        doc = PerturbationSampler(DOC, None, seed=2).sample(20)
        assert any("UNK" in d.tokens for d in doc)

    def test_deterministic(self):
        a = PerturbationSampler(DOC, Anchor((0,)), seed=5).keep_masks(500)
        b = PerturbationSampler(DOC, Anchor((0,)), seed=5).keep_masks(500)
        assert np.array_equal(a, b)
        c = PerturbationSampler(DOC, Anchor((0,)), seed=6).keep_masks(500)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("b", [3, 64, 70, 130])
    def test_sliceable(self, b):
        whole = keyed_bits(9, 40, b)
        assert np.array_equal(keyed_bits(9, 15, b, start=25), whole[25:])

    def test_kept_counts_match_masks(self):
        s = PerturbationSampler(DOC, Anchor((1, 4)), seed=4)
        stats = local_stats(DOC)
        masks = s.keep_masks(300, start=17)
        expected = np.stack([masks[:, [k for k, t in enumerate(DOC.tokens) if t == w]].sum(1) for w in stats.words], 1)
        assert np.array_equal(s.kept_counts(300, stats, start=17), expected)

    def test_copies_scheme(self):
        s = PerturbationSampler(DOC, Anchor((0,)), seed=1, scheme="copies")
        keep = s.keep_masks(1000)
        assert keep[:, 0].all()
        assert np.all(np.abs(keep[:, 1:].mean(0) - 0.5) < 0.06)
        with pytest.raises(ValueError):
            s.keep_masks(10, start=3)

    def test_derive_seed_distinct(self):
        assert derive_seed(0, 1) != derive_seed(1, 0)
        assert derive_seed(4, 2) == derive_seed(4, 2)


class TestPmf:
    def test_examples(self):
        assert multiplicity_pmf(2, 1) == {1: Fraction(1, 2), 2: Fraction(1, 2)}
        assert multiplicity_pmf(3, 0) == {0: Fraction(1, 8), 1: Fraction(3, 8), 2: Fraction(3, 8), 3: Fraction(1, 8)}
        assert multiplicity_pmf(4, 4) == {4: 1}

    def test_invalid(self):
        with pytest.raises(InvalidRange):
            multiplicity_pmf(2, 3)

    @pytest.mark.parametrize("m,a", [(5, 1), (4, 0), (3, 3)])
    def test_chi_square(self, m, a):
        doc = Document(("w",) * m + ("v",))
        s = PerturbationSampler(doc, Anchor(tuple(range(a))) if a else None, seed=derive_seed(m, a))
        counts = s.kept_counts(20_000)[:, 0]
        pmf = multiplicity_pmf(m, a)
        if len(pmf) == 1:
            assert np.all(counts == a)
            return
        obs = [np.count_nonzero(counts == k) for k in pmf]
        exp = [float(p) * len(counts) for p in pmf.values()]
        assert sps.chisquare(obs, exp).pvalue > 1e-4
