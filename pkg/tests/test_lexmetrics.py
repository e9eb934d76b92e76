import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimeval.lexmetrics import (
    MeteorConfig,
    bleu,
    lcs_length,
    meteor_lite,
    ngram_counts,
    rouge_l,
    rouge_n,
)

tokens_st = st.lists(st.sampled_from("abcdefg"), max_size=12)


def brute_force_lcs(a, b):
    """Independent recursive LCS oracle for short inputs."""
    if not a or not b:
        return 0
    if a[-1] == b[-1]:
        return 1 + brute_force_lcs(a[:-1], b[:-1])
    return max(brute_force_lcs(a[:-1], b), brute_force_lcs(a, b[:-1]))


class TestNgrams:
    def test_unigrams(self):
        assert ngram_counts(["a", "b", "a"], 1) == Counter(
            {("a",): 2, ("b",): 1})

    def test_bigrams(self):
        assert ngram_counts(["a", "b", "a"], 2) == Counter(
            {("a", "b"): 1, ("b", "a"): 1})

    def test_short_input(self):
        assert ngram_counts(["a"], 2) == Counter()

    def test_n_zero_rejected(self):
        with pytest.raises(ValueError):
            ngram_counts(["a"], 0)


class TestBleu:
    def test_identity(self):
        text = "the device comprising a sensor".split()
        assert bleu(text, text) == pytest.approx(1.0)

    def test_brevity_penalty_example(self):
        score = bleu("the cat sat".split(), "the cat sat down".split(), max_n=1)
        assert score == pytest.approx(math.exp(1 - 4 / 3), abs=1e-6)

    def test_disjoint_zero(self):
        assert bleu(["a", "b"], ["c", "d"], max_n=1, smoothing=False) == 0.0
        assert bleu(["a", "b"], ["c", "d"], max_n=1, smoothing=True) == 0.0

    def test_empty_candidate(self):
        assert bleu([], ["a"]) == 0.0

    def test_short_identity_with_high_order(self):
        # 2-token identical text: orders 3 and 4 have no candidate n-grams
        assert bleu(["a", "b"], ["a", "b"], max_n=4) == pytest.approx(1.0)

    def test_smoothing_only_on_zero_high_orders(self):
        cand = ["a", "x", "b"]
        ref = ["a", "b"]
        # bigram overlap is zero -> smoothed 1/(2+1); unigram 2/3; BP = 1
        expected = math.sqrt((2 / 3) * (1 / 3))
        assert bleu(cand, ref, max_n=2) == pytest.approx(expected)

    @given(cand=tokens_st.filter(lambda t: len(t) > 0))
    @settings(max_examples=50, deadline=None)
    def test_unigram_permutation_invariance(self, cand):
        ref = ["a", "b", "c"]
        score = bleu(cand, ref, max_n=1)
        assert bleu(list(reversed(cand)), ref, max_n=1) == pytest.approx(score)

    def test_max_n_out_of_range(self):
        with pytest.raises(ValueError):
            bleu(["a"], ["a"], max_n=5)


class TestRougeN:
    def test_identity(self):
        text = ["a", "b", "c"]
        prf = rouge_n(text, text, 1)
        assert prf.precision == prf.recall == prf.f1 == 1.0

    def test_half_overlap(self):
        prf = rouge_n(["a", "b"], ["a", "c"], 1)
        assert (prf.precision, prf.recall, prf.f1) == pytest.approx((0.5, 0.5, 0.5))

    def test_empty_candidate(self):
        prf = rouge_n([], ["a"], 1)
        assert prf.precision == prf.recall == prf.f1 == 0.0

    @given(a=tokens_st, b=tokens_st)
    @settings(max_examples=60, deadline=None)
    def test_precision_recall_swap(self, a, b):
        ab = rouge_n(a, b, 1)
        ba = rouge_n(b, a, 1)
        assert ab.precision == pytest.approx(ba.recall)
        assert ab.recall == pytest.approx(ba.precision)

    @given(a=st.lists(st.sampled_from("abc"), min_size=1, max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_removing_matched_unigram_never_raises_recall(self, a):
        ref = ["a", "b", "c"]
        base = rouge_n(a, ref, 1).recall
        for i, tok in enumerate(a):
            if tok in ref:
                reduced = rouge_n(a[:i] + a[i + 1:], ref, 1).recall
                assert reduced <= base + 1e-12


class TestRougeL:
    def test_transposition(self):
        prf = rouge_l(["a", "b", "c", "d"], ["a", "c", "b", "d"])
        assert (prf.precision, prf.recall, prf.f1) == pytest.approx((0.75, 0.75, 0.75))

    def test_identity(self):
        prf = rouge_l(["x", "y"], ["x", "y"])
        assert prf.f1 == 1.0

    def test_disjoint(self):
        prf = rouge_l(["a"], ["b"])
        assert prf.f1 == 0.0

    @given(a=st.lists(st.sampled_from("abc"), max_size=8),
           b=st.lists(st.sampled_from("abc"), max_size=8))
    @settings(max_examples=80, deadline=None)
    def test_matches_recursive_oracle(self, a, b):
        assert lcs_length(a, b) == brute_force_lcs(a, b)


class TestMeteor:
    def test_identical_two_tokens(self):
        score = meteor_lite(["a", "b"], ["a", "b"])
        # F = 1, chunks = 1, matches = 2, penalty = 0.5 * (1/2)^3
        assert score == pytest.approx(0.9375)

    def test_zero_matches(self):
        assert meteor_lite(["a"], ["b"]) == 0.0

    def test_identical_single_token(self):
        assert meteor_lite(["claim"], ["claim"]) == pytest.approx(0.5)

    def test_stem_match(self):
        # "connecting" matches "connect" through suffix stripping
        score = meteor_lite(["connecting"], ["connect"])
        assert score > 0.0

    def test_identity_lower_bound(self):
        cfg = MeteorConfig()
        for text in (["a"], ["a", "b"], ["a", "b", "c", "d"]):
            assert meteor_lite(text, text, cfg) >= 1.0 - cfg.gamma

    def test_config_validation(self):
        with pytest.raises(ValueError):
            meteor_lite(["a"], ["a"], MeteorConfig(alpha=2.0))
        with pytest.raises(ValueError):
            meteor_lite(["a"], ["a"], MeteorConfig(beta=0.0))
        with pytest.raises(ValueError):
            meteor_lite(["a"], ["a"], MeteorConfig(gamma=1.5))


@given(a=tokens_st, b=tokens_st)
@settings(max_examples=60, deadline=None)
def test_all_scores_in_unit_interval(a, b):
    assert 0.0 <= bleu(a, b) <= 1.0
    assert 0.0 <= rouge_n(a, b, 1).f1 <= 1.0
    assert 0.0 <= rouge_l(a, b).f1 <= 1.0
    assert 0.0 <= meteor_lite(a, b) <= 1.0
