"""Comparative training of the learned scorer.

One quadruplet yields two scores from a shared parameter set,
s_B = s(B|A) and s_C = s(C|A); the pair loss enforces a margin m between
them when one candidate is labeled better and tolerates a gap up to n
when they are labeled equal:

    y =  1:  max(0, m - (s_B - s_C))
    y =  0:  max(0, |s_B - s_C| - n)
    y = -1:  max(0, m - (s_C - s_B))

Five aspect models are trained independently.  Optimization is Adam with
decoupled weight decay; gradients come from the hand-written backward
pass in scorer.py and are verifiable against central differences.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import scorer as sc
from .corpus import Aspect, Corpus, Vocab, build_vocab, encode_pair, split_corpus
from .stats import accuracy, three_way_labels


@dataclass(frozen=True)
class LossConfig:
    margin: float = 0.1
    tolerance: float = 0.02

    def validate(self):
        if not (0.0 < self.tolerance < self.margin < 1.0):
            raise ValueError(
                f"need 0 < tolerance < margin < 1, got margin={self.margin}, "
                f"tolerance={self.tolerance}"
            )


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 4
    learning_rate: float = 5e-6
    weight_decay: float = 0.01
    epochs: int = 10
    val_fraction: float = 0.1
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)

    def validate(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError(f"val_fraction must be in [0, 1), got {self.val_fraction}")
        self.loss.validate()


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)
    best_epoch: int = -1


def pair_loss(s_b: float, s_c: float, y: int, cfg: LossConfig) -> float:
    """Margin/tolerance hinge loss for one comparison."""
    diff = s_b - s_c
    if y == 1:
        return max(0.0, cfg.margin - diff)
    if y == 0:
        return max(0.0, abs(diff) - cfg.tolerance)
    if y == -1:
        return max(0.0, cfg.margin + diff)
    raise ValueError(f"label must be 1, 0 or -1, got {y!r}")


def pair_loss_grad(s_b: float, s_c: float, y: int, cfg: LossConfig):
    """(d loss / d s_B, d loss / d s_C); ReLU subgradient at 0 is 0."""
    diff = s_b - s_c
    if y == 1:
        return (-1.0, 1.0) if cfg.margin - diff > 0.0 else (0.0, 0.0)
    if y == -1:
        return (1.0, -1.0) if cfg.margin + diff > 0.0 else (0.0, 0.0)
    if y == 0:
        if abs(diff) - cfg.tolerance > 0.0:
            s = 1.0 if diff > 0.0 else -1.0
            return (s, -s)
        return (0.0, 0.0)
    raise ValueError(f"label must be 1, 0 or -1, got {y!r}")


def batch_loss(score_pairs_with_labels, cfg: LossConfig) -> float:
    """Mean pair loss, summed in index order."""
    items = list(score_pairs_with_labels)
    if not items:
        raise ValueError("empty batch")
    total = 0.0
    for s_b, s_c, y in items:
        total += pair_loss(s_b, s_c, y, cfg)
    return total / len(items)


def loss_kink_distance(scores_b, scores_c, labels, cfg: LossConfig) -> float:
    """Distance of the closest hinge argument to its kink at 0."""
    dist = math.inf
    for s_b, s_c, y in zip(scores_b, scores_c, labels):
        diff = s_b - s_c
        if y == 1:
            dist = min(dist, abs(cfg.margin - diff))
        elif y == -1:
            dist = min(dist, abs(cfg.margin + diff))
        else:
            dist = min(dist, abs(abs(diff) - cfg.tolerance))
    return dist


# ---------------------------------------------------------------------------
# Model-level loss and gradients


def model_batch_loss(ids_b, ids_c, labels, params, config, loss_cfg: LossConfig,
                     mode: str = "eval", rng=None):
    """Loss of one quadruplet batch; returns (loss, scores_b, scores_c)."""
    stacked = np.concatenate([ids_b, ids_c], axis=0)
    s, _, _ = sc.score_batch(stacked, params, config, mode=mode, rng=rng)
    n = len(labels)
    s_b, s_c = s[:n], s[n:]
    loss = batch_loss(zip(s_b, s_c, labels), loss_cfg)
    return loss, s_b, s_c


def model_batch_grads(ids_b, ids_c, labels, params, config, loss_cfg: LossConfig,
                      mode: str = "eval", rng=None):
    """Analytic gradient of the mean pair loss w.r.t. every parameter.

    Returns (loss, grads, scores_b, scores_c).  The B and C branches share
    one parameter set (twin evaluation), so their gradients accumulate.
    """
    n = len(labels)
    stacked = np.concatenate([ids_b, ids_c], axis=0)
    s, h, cache = sc.score_batch(stacked, params, config, mode=mode, rng=rng)
    s_b, s_c = s[:n], s[n:]
    loss = batch_loss(zip(s_b, s_c, labels), loss_cfg)

    ds = np.zeros(2 * n)
    for i, y in enumerate(labels):
        gb, gc = pair_loss_grad(s_b[i], s_c[i], y, loss_cfg)
        ds[i] = gb / n
        ds[n + i] = gc / n
    dz = ds * s * (1.0 - s)  # sigmoid derivative

    grads = sc.backward_batch(dz[:, None] * params["head_w"][None, :], cache,
                              params, config)
    grads["head_w"] = dz @ h
    grads["head_b"] = np.asarray(dz.sum())
    return loss, grads, s_b, s_c


def grad_check(params, fixture_batch, config, loss_cfg: LossConfig,
               epsilon: float = 1e-5, samples_per_group: int | None = None,
               seed: int = 0) -> float:
    """Max relative error of analytic vs central-difference gradients.

    fixture_batch is (ids_b, ids_c, labels).  With samples_per_group set,
    a random coordinate subset of each parameter tensor is checked
    (exhaustive otherwise).  64-bit only; fixtures sitting on a hinge kink
    are rejected.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon must be in [1e-7, 1e-3], got {epsilon}")
    ids_b, ids_c, labels = fixture_batch
    loss, grads, s_b, s_c = model_batch_grads(ids_b, ids_c, labels, params,
                                              config, loss_cfg)
    if loss_kink_distance(s_b, s_c, labels, loss_cfg) < 10 * epsilon:
        raise ValueError("fixture batch sits on a hinge kink; regenerate it")

    rng = np.random.default_rng(seed)
    max_rel = 0.0
    for name, tensor in params.items():
        size = tensor.size
        if samples_per_group is None or samples_per_group >= size:
            coords = range(size)
        else:
            coords = rng.choice(size, size=samples_per_group, replace=False)
        flat = tensor.reshape(-1) if tensor.ndim else tensor.reshape(1)
        gflat = np.asarray(grads[name]).reshape(-1)
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + epsilon
            lp, _, _ = model_batch_loss(ids_b, ids_c, labels, params, config, loss_cfg)
            flat[idx] = orig - epsilon
            lm, _, _ = model_batch_loss(ids_b, ids_c, labels, params, config, loss_cfg)
            flat[idx] = orig
            numeric = (lp - lm) / (2.0 * epsilon)
            analytic = gflat[idx]
            if max(abs(analytic), abs(numeric)) < 1e-8:
                # both effectively zero: central-difference roundoff noise
                # (~loss * eps_machine / epsilon) would swamp the ratio
                continue
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
            max_rel = max(max_rel, rel)
    return max_rel


# ---------------------------------------------------------------------------
# Optimizer


class AdamW:
    """Adaptive moment estimation with decoupled weight decay.

    Update: theta -= lr * mhat / (sqrt(vhat) + eps); then
    theta *= (1 - lr * weight_decay).
    """

    def __init__(self, params, learning_rate, weight_decay=0.0,
                 beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = learning_rate
        self.wd = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params, grads):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, theta in params.items():
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * (g * g)
            mhat = self.m[k] / bc1
            vhat = self.v[k] / bc2
            theta -= self.lr * mhat / (np.sqrt(vhat) + self.eps)
            theta *= 1.0 - self.lr * self.wd


# ---------------------------------------------------------------------------
# Training loop


def encode_corpus_pairs(corpus: Corpus, vocab: Vocab, max_len: int):
    """(ids_b, ids_c) integer arrays of encoded (reference, candidate) pairs."""
    ids_b = np.array(
        [encode_pair(r.reference, r.candidate_b, vocab, max_len).ids for r in corpus]
    )
    ids_c = np.array(
        [encode_pair(r.reference, r.candidate_c, vocab, max_len).ids for r in corpus]
    )
    return ids_b, ids_c


def _evaluate(ids_b, ids_c, labels, params, config, loss_cfg, batch_size=32):
    losses = []
    sb_all, sc_all = [], []
    for start in range(0, len(labels), batch_size):
        end = start + batch_size
        loss, s_b, s_c = model_batch_loss(ids_b[start:end], ids_c[start:end],
                                          labels[start:end], params, config, loss_cfg)
        losses.append(loss * (min(end, len(labels)) - start))
        sb_all.extend(s_b)
        sc_all.extend(s_c)
    preds = three_way_labels(sb_all, sc_all, epsilon=loss_cfg.tolerance)
    return sum(losses) / len(labels), accuracy(preds, list(labels))


def train_aspect_model(train_corpus: Corpus, aspect: Aspect,
                       scorer_config: sc.ScorerConfig, train_config: TrainConfig,
                       vocab: Vocab | None = None):
    """Train one aspect model; returns (best params, vocab, TrainHistory).

    A val_fraction share of the corpus is held out for model selection by
    pairwise accuracy (ties: lower val loss, then earlier epoch).  With
    val_fraction = 0 selection falls back to the training split.  Fixed
    seed gives a reproducible history.
    """
    train_config.validate()
    scorer_config.validate()
    if len(train_corpus) == 0:
        raise ValueError("training corpus is empty")
    if vocab is None:
        vocab = build_vocab(train_corpus)
        scorer_config = replace(scorer_config, vocab_size=len(vocab))

    fit, val, _ = split_corpus(train_corpus, 0.0, train_config.val_fraction,
                               train_config.seed)
    if len(fit) == 0:
        raise ValueError("val_fraction leaves no training records")

    max_len = scorer_config.max_len
    ids_b, ids_c = encode_corpus_pairs(fit, vocab, max_len)
    labels = np.array([r.label(aspect) for r in fit])
    if len(val) > 0:
        vids_b, vids_c = encode_corpus_pairs(val, vocab, max_len)
        vlabels = np.array([r.label(aspect) for r in val])
    else:
        vids_b, vids_c, vlabels = ids_b, ids_c, labels

    params = sc.init_params(scorer_config, train_config.seed)
    opt = AdamW(params, train_config.learning_rate, train_config.weight_decay)
    rng = np.random.default_rng(train_config.seed)
    loss_cfg = train_config.loss

    history = TrainHistory()
    best = None  # (val_acc, -val_loss, -epoch)
    best_params = copy.deepcopy(params)
    n = len(labels)
    for epoch in range(train_config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, train_config.batch_size):
            batch = order[start : start + train_config.batch_size]
            loss, grads, _, _ = model_batch_grads(
                ids_b[batch], ids_c[batch], labels[batch], params,
                scorer_config, loss_cfg, mode="train", rng=rng,
            )
            if not math.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss {loss} at epoch {epoch}, batch offset {start}"
                )
            opt.step(params, grads)
            epoch_loss += loss * len(batch)
        val_loss, val_acc = _evaluate(vids_b, vids_c, vlabels, params,
                                      scorer_config, loss_cfg)
        history.train_loss.append(epoch_loss / n)
        history.val_loss.append(val_loss)
        history.val_accuracy.append(val_acc)
        key = (val_acc, -val_loss, -epoch)
        if best is None or key > best:
            best = key
            best_params = copy.deepcopy(params)
            history.best_epoch = epoch
    return best_params, vocab, history
