import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimeval.stats import (
    accuracy,
    kendall_tau_b,
    macro_f1,
    midranks,
    spearman_rho,
    three_way_labels,
)

int_vectors = st.lists(st.integers(0, 4), min_size=2, max_size=10)


def oracle_tau_b(x, y):
    """Brute-force pair enumeration with tie correction."""
    n = len(x)
    c = d = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            if x[i] == x[j]:
                tx += 1
            if y[i] == y[j]:
                ty += 1
            if x[i] == x[j] or y[i] == y[j]:
                continue
            if (x[i] < x[j]) == (y[i] < y[j]):
                c += 1
            else:
                d += 1
    n0 = n * (n - 1) // 2
    if tx == n0 or ty == n0:
        return None
    return (c - d) / math.sqrt((n0 - tx) * (n0 - ty))


def oracle_spearman(x, y):
    """Mid-rank Pearson computed independently."""
    def ranks(v):
        out = []
        for val in v:
            smaller = sum(1 for u in v if u < val)
            equal = sum(1 for u in v if u == val)
            out.append(smaller + (equal + 1) / 2.0)
        return out

    rx, ry = ranks(x), ranks(y)
    n = len(x)
    mx, my = sum(rx) / n, sum(ry) / n
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    if sxx == 0 or syy == 0:
        return None
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    return sxy / math.sqrt(sxx * syy)


class TestKendall:
    def test_perfect_concordance(self):
        assert kendall_tau_b([1, 2, 3], [1, 2, 3]) == 1.0

    def test_perfect_discordance(self):
        assert kendall_tau_b([1, 2, 3], [3, 2, 1]) == -1.0

    def test_worked_tie_example(self):
        # C=4, D=0, n0=6, n1=n2=1 -> 4/sqrt(25) = 0.8
        assert kendall_tau_b([1, 1, 2, 3], [1, 2, 2, 3]) == pytest.approx(0.8)

    def test_all_tied_is_degenerate(self):
        assert kendall_tau_b([1, 1, 1], [1, 2, 3]) is None
        assert kendall_tau_b([1, 2, 3], [2, 2, 2]) is None

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            kendall_tau_b([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            kendall_tau_b([1], [1])

    @given(x=int_vectors)
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle_exactly(self, x):
        y = list(reversed(x))
        assert kendall_tau_b(x, y) == oracle_tau_b(x, y)

    @given(x=int_vectors)
    @settings(max_examples=60, deadline=None)
    def test_antisymmetric_under_negation(self, x):
        y = [(v * 7 + 3) % 5 for v in x]
        t = kendall_tau_b(x, y)
        if t is not None:
            assert kendall_tau_b(x, [-v for v in y]) == pytest.approx(-t)

    @given(x=int_vectors)
    @settings(max_examples=40, deadline=None)
    def test_monotone_transform_invariance(self, x):
        y = [(v * 3 + 1) % 7 for v in x]
        t = kendall_tau_b(x, y)
        x2 = [v * 10 + 100 for v in x]  # strictly increasing transform
        assert kendall_tau_b(x2, y) == t


class TestSpearman:
    def test_identical(self):
        assert spearman_rho([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_reversed(self):
        assert spearman_rho([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_midrank_example(self):
        # ranks of x are [1.5, 1.5, 3]: rho = 1.5/sqrt(1.5*2)
        expected = 1.5 / math.sqrt(3.0)
        assert spearman_rho([1, 1, 2], [1, 2, 3]) == pytest.approx(expected)

    def test_degenerate(self):
        assert spearman_rho([5, 5, 5], [1, 2, 3]) is None

    def test_midranks(self):
        assert midranks([10, 10, 20]) == [1.5, 1.5, 3.0]

    @given(x=int_vectors)
    @settings(max_examples=60, deadline=None)
    def test_matches_oracle(self, x):
        y = [(v * 7 + 3) % 5 for v in x]
        a = spearman_rho(x, y)
        b = oracle_spearman(x, y)
        if a is None or b is None:
            assert a is None and b is None
        else:
            assert a == pytest.approx(b, abs=1e-12)

    @given(x=int_vectors)
    @settings(max_examples=40, deadline=None)
    def test_antisymmetric_under_negation(self, x):
        y = [(v * 3 + 2) % 6 for v in x]
        r = spearman_rho(x, y)
        if r is not None:
            assert spearman_rho(x, [-v for v in y]) == pytest.approx(-r)


class TestThreeWayLabels:
    def test_clear_winner(self):
        assert three_way_labels([0.8], [0.5]) == [1]

    def test_within_threshold(self):
        assert three_way_labels([0.50000], [0.50005]) == [0]

    def test_clear_loser(self):
        assert three_way_labels([0.4], [0.6]) == [-1]

    def test_equal_scores_all_zero(self):
        s = [0.1, 0.5, 0.9]
        assert three_way_labels(s, s, epsilon=1e-9) == [0, 0, 0]

    def test_negative_epsilon(self):
        with pytest.raises(ValueError):
            three_way_labels([0.1], [0.2], epsilon=-1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            three_way_labels([0.1], [0.2, 0.3])


class TestClassification:
    def test_accuracy_exact(self):
        assert accuracy([1, 0, -1], [1, 0, -1]) == 1.0
        assert accuracy([1, 1], [-1, -1]) == 0.0
        assert accuracy([1, 0, 1, 0], [1, 1, 1, 1]) == 0.5

    def test_macro_f1_perfect(self):
        assert macro_f1([1, 0, -1], [1, 0, -1]) == 1.0

    def test_macro_f1_all_one_prediction(self):
        assert macro_f1([1, 1, 1], [1, 0, -1]) == pytest.approx(1 / 6)

    def test_macro_f1_no_agreement(self):
        assert macro_f1([1, 0, -1], [0, -1, 1]) == 0.0

    @given(st.lists(st.sampled_from([1, 0, -1]), min_size=1, max_size=20),
           st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_symmetry(self, gold, seed):
        import random

        rng = random.Random(seed)
        pred = [rng.choice([1, 0, -1]) for _ in gold]
        assert accuracy(pred, gold) == accuracy(gold, pred)
        assert macro_f1(pred, gold) == pytest.approx(macro_f1(gold, pred))
