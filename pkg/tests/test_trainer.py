import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimeval import scorer as sc
from claimeval import trainer as tr
from claimeval.corpus import Aspect
from claimeval.stats import accuracy, three_way_labels

from conftest import planted_corpus

LOSS = tr.LossConfig(margin=0.1, tolerance=0.02)

GRID = [round(0.05 * i, 2) for i in range(1, 20)]


def direct_loss(s_b, s_c, y, m, n):
    if y == 1:
        return max(0.0, m - (s_b - s_c))
    if y == 0:
        return max(0.0, abs(s_b - s_c) - n)
    return max(0.0, m - (s_c - s_b))


class TestLossConfig:
    def test_margin_must_exceed_tolerance(self):
        with pytest.raises(ValueError):
            tr.LossConfig(margin=0.02, tolerance=0.1).validate()
        with pytest.raises(ValueError):
            tr.LossConfig(margin=0.1, tolerance=0.0).validate()


class TestPairLoss:
    def test_margin_satisfied(self):
        assert tr.pair_loss(0.8, 0.5, 1, LOSS) == 0.0

    def test_wrong_order_penalized(self):
        assert tr.pair_loss(0.55, 0.50, -1, LOSS) == pytest.approx(0.15)

    def test_equal_outside_tolerance(self):
        assert tr.pair_loss(0.60, 0.50, 0, LOSS) == pytest.approx(0.08)

    def test_equal_scores_no_loss(self):
        assert tr.pair_loss(0.5, 0.5, 0, LOSS) == 0.0

    def test_invalid_label(self):
        with pytest.raises(ValueError):
            tr.pair_loss(0.5, 0.5, 2, LOSS)

    def test_grid_against_direct_formula(self):
        for s_b, s_c, y in itertools.product(GRID, GRID, (1, 0, -1)):
            assert tr.pair_loss(s_b, s_c, y, LOSS) == direct_loss(
                s_b, s_c, y, LOSS.margin, LOSS.tolerance)

    def test_swap_symmetry_exhaustive(self):
        for s_b, s_c in itertools.product(GRID, GRID):
            assert tr.pair_loss(s_b, s_c, 1, LOSS) == tr.pair_loss(
                s_c, s_b, -1, LOSS)
            assert tr.pair_loss(s_b, s_c, 0, LOSS) == tr.pair_loss(
                s_c, s_b, 0, LOSS)

    @given(s_b=st.floats(0.001, 0.999), s_c=st.floats(0.001, 0.999),
           y=st.sampled_from([1, 0, -1]))
    @settings(max_examples=100, deadline=None)
    def test_zero_exactly_when_clamped(self, s_b, s_c, y):
        loss = tr.pair_loss(s_b, s_c, y, LOSS)
        assert loss >= 0.0
        assert (loss == 0.0) == (direct_loss(s_b, s_c, y, LOSS.margin,
                                             LOSS.tolerance) <= 0.0)


class TestBatchLoss:
    def test_single_element(self):
        assert tr.batch_loss([(0.6, 0.5, 0)], LOSS) == tr.pair_loss(
            0.6, 0.5, 0, LOSS)

    def test_mean_of_two(self):
        batch = [(0.8, 0.5, 1), (0.6, 0.5, 0)]
        assert tr.batch_loss(batch, LOSS) == pytest.approx(0.04)

    def test_all_satisfied(self):
        assert tr.batch_loss([(0.9, 0.1, 1), (0.5, 0.5, 0)], LOSS) == 0.0

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            tr.batch_loss([], LOSS)

    def test_bitwise_stable(self):
        batch = [(0.61, 0.5, 0), (0.8, 0.75, 1), (0.3, 0.45, -1)]
        assert tr.batch_loss(batch, LOSS) == tr.batch_loss(batch, LOSS)


def _fixture(config, seed, n_pairs=2):
    rng = np.random.default_rng(seed)
    t, v = config.max_len, config.vocab_size
    def seq():
        length = rng.integers(6, t + 1)
        body = rng.integers(4, v, size=length - 3)
        ids = np.concatenate([[2], body[: length // 2], [3],
                              body[length // 2 :], [3]])
        return np.concatenate([ids, np.zeros(t - len(ids), dtype=int)])
    ids_b = np.array([seq() for _ in range(n_pairs)])
    ids_c = np.array([seq() for _ in range(n_pairs)])
    labels = [int(rng.choice([1, 0, -1])) for _ in range(n_pairs)]
    return ids_b, ids_c, labels


class TestGradCheck:
    def test_small_config_exhaustive(self):
        config = sc.ScorerConfig(vocab_size=14, hidden_dim=8, layers=2,
                                 heads=2, window_size=2, max_len=12,
                                 ffn_dim=12, dropout=0.0)
        for seed in (0, 1, 2):
            params = sc.init_params(config, seed)
            err = tr.grad_check(params, _fixture(config, seed), config, LOSS)
            assert err < 1e-4

    def test_epsilon_bounds(self):
        config = sc.ScorerConfig(vocab_size=14, hidden_dim=8, layers=1,
                                 heads=2, window_size=2, max_len=12,
                                 ffn_dim=12, dropout=0.0)
        params = sc.init_params(config, 0)
        with pytest.raises(ValueError):
            tr.grad_check(params, _fixture(config, 0), config, LOSS,
                          epsilon=1e-2)

    def test_flat_region_zero_gradient(self):
        # all hinge arms strictly inactive -> loss gradient exactly zero
        config = sc.ScorerConfig(vocab_size=14, hidden_dim=8, layers=1,
                                 heads=2, window_size=2, max_len=12,
                                 ffn_dim=12, dropout=0.0)
        params = sc.init_params(config, 1)
        ids_b, ids_c, _ = _fixture(config, 1)
        _, sb, scs = tr.model_batch_loss(ids_b, ids_c, [1, 1], params,
                                         config, LOSS)
        # choose labels so every arm is clamped off
        labels = [1 if sb[i] - scs[i] > LOSS.margin else
                  (-1 if scs[i] - sb[i] > LOSS.margin else 0)
                  for i in range(2)]
        wide = tr.LossConfig(margin=0.9, tolerance=0.89)
        labels = [0, 0]  # tolerance 0.89 clamps everything off
        loss, grads, _, _ = tr.model_batch_grads(ids_b, ids_c, labels,
                                                 params, config, wide)
        assert loss == 0.0
        for g in grads.values():
            assert np.all(g == 0.0)

    def test_kink_fixture_rejected(self):
        config = sc.ScorerConfig(vocab_size=14, hidden_dim=8, layers=1,
                                 heads=2, window_size=2, max_len=12,
                                 ffn_dim=12, dropout=0.0)
        params = sc.init_params(config, 0)
        ids_b, ids_c, _ = _fixture(config, 0, n_pairs=1)
        _, sb, scs = tr.model_batch_loss(ids_b, ids_c, [0], params, config,
                                         LOSS)
        # a tolerance equal to the observed gap sits exactly on the kink
        gap = abs(sb[0] - scs[0])
        kink = tr.LossConfig(margin=0.5, tolerance=float(gap))
        with pytest.raises(ValueError, match="kink"):
            tr.grad_check(params, (ids_b, ids_c, [0]), config, kink)


class TestAdamW:
    def test_decoupled_decay_on_flat_loss(self):
        # zero gradient: one step multiplies the weight by (1 - lr * wd)
        w = np.array([2.0])
        params = {"w": w}
        opt = tr.AdamW(params, learning_rate=0.1, weight_decay=0.5)
        opt.step(params, {"w": np.zeros(1)})
        assert params["w"][0] == 2.0 * (1.0 - 0.1 * 0.5)

    def test_zero_lr_is_identity(self):
        params = {"w": np.array([2.0])}
        opt = tr.AdamW(params, learning_rate=0.0, weight_decay=0.5)
        opt.step(params, {"w": np.array([3.0])})
        assert params["w"][0] == 2.0

    def test_step_moves_against_gradient(self):
        params = {"w": np.array([1.0])}
        opt = tr.AdamW(params, learning_rate=0.1)
        opt.step(params, {"w": np.array([1.0])})
        assert params["w"][0] < 1.0


class TestTraining:
    CONFIG = sc.ScorerConfig(vocab_size=5, hidden_dim=16, layers=1, heads=2,
                             window_size=4, max_len=48, ffn_dim=32,
                             dropout=0.0)

    def test_history_lengths_match_epochs(self):
        corpus = planted_corpus(n=8, seed=0, base_len=10)
        tc = tr.TrainConfig(batch_size=4, learning_rate=1e-3, epochs=1,
                            val_fraction=0.0, seed=0)
        _, _, hist = tr.train_aspect_model(corpus, Aspect.QUALITY,
                                           self.CONFIG, tc)
        assert len(hist.train_loss) == 1
        assert len(hist.val_loss) == 1
        assert len(hist.val_accuracy) == 1
        assert hist.best_epoch == 0

    def test_epochs_zero_disallowed(self):
        with pytest.raises(ValueError):
            tr.TrainConfig(epochs=0).validate()

    def test_same_seed_identical_history(self):
        corpus = planted_corpus(n=8, seed=1, base_len=10)
        tc = tr.TrainConfig(batch_size=4, learning_rate=1e-3, epochs=3,
                            val_fraction=0.25, seed=9)
        _, _, h1 = tr.train_aspect_model(corpus, Aspect.QUALITY, self.CONFIG, tc)
        _, _, h2 = tr.train_aspect_model(corpus, Aspect.QUALITY, self.CONFIG, tc)
        assert h1.train_loss == h2.train_loss
        assert h1.val_loss == h2.val_loss
        assert h1.val_accuracy == h2.val_accuracy
        assert h1.best_epoch == h2.best_epoch

    def test_empty_corpus_rejected(self):
        from conftest import make_corpus

        with pytest.raises(ValueError):
            tr.train_aspect_model(make_corpus([]), Aspect.QUALITY,
                                  self.CONFIG, tr.TrainConfig())

    def test_overfits_small_planted_corpus(self):
        corpus = planted_corpus(n=16, seed=3, base_len=12,
                                corruption_levels=(1, 7))
        tc = tr.TrainConfig(batch_size=8, learning_rate=2e-3,
                            weight_decay=0.01, epochs=40, val_fraction=0.0,
                            seed=4)
        params, vocab, hist = tr.train_aspect_model(
            corpus, Aspect.QUALITY, self.CONFIG, tc)
        config = dataclasses.replace(self.CONFIG, vocab_size=len(vocab))
        ids_b, ids_c = tr.encode_corpus_pairs(corpus, vocab, config.max_len)
        labels = [r.label(Aspect.QUALITY) for r in corpus]
        _, sb, scs = tr.model_batch_loss(ids_b, ids_c, labels, params,
                                         config, tc.loss)
        preds = three_way_labels(sb, scs, epsilon=tc.loss.tolerance)
        assert accuracy(preds, labels) >= 0.9
