"""Learned claim-pair scorer: a small transformer encoder with
sliding-window self-attention and a sigmoid scoring head.

Everything is plain numpy (float64 by default) with hand-written forward
and backward passes so gradients can be verified against central
differences.  Token position 0 (CLS) is a global attention anchor and its
final hidden state is the pair representation; the head maps it to a
score in (0, 1).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .corpus import PAD

LN_EPS = 1e-5


@dataclass(frozen=True)
class ScorerConfig:
    vocab_size: int
    hidden_dim: int = 64
    layers: int = 2
    heads: int = 4
    window_size: int = 16
    max_len: int = 512
    ffn_dim: int = 256
    dropout: float = 0.1

    def validate(self):
        if self.hidden_dim % self.heads != 0:
            raise ValueError(
                f"hidden_dim {self.hidden_dim} not divisible by heads {self.heads}"
            )
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        if not 1 <= self.max_len <= 4096:
            raise ValueError(f"max_len must be in 1..4096, got {self.max_len}")
        if self.vocab_size < 5:
            raise ValueError("vocab_size must cover the reserved tokens")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")


def init_params(config: ScorerConfig, seed: int) -> dict:
    """Zero-mean scaled-uniform init (scale 1/sqrt(fan_in)); biases zero,
    layer-norm gains one.  Deterministic given (config, seed)."""
    config.validate()
    rng = np.random.default_rng(seed)
    d, ff = config.hidden_dim, config.ffn_dim

    def uniform(shape, fan_in):
        s = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-s, s, size=shape)

    params = {
        "tok_emb": uniform((config.vocab_size, d), d),
        "pos_emb": uniform((config.max_len, d), d),
        "head_w": uniform((d,), d),
        "head_b": np.zeros(()),
    }
    for l in range(config.layers):
        p = f"layer{l}."
        for name in ("wq", "wk", "wv", "wo"):
            params[p + name] = uniform((d, d), d)
            params[p + name.replace("w", "b")] = np.zeros(d)
        params[p + "ln1_g"] = np.ones(d)
        params[p + "ln1_b"] = np.zeros(d)
        params[p + "ffn_w1"] = uniform((d, ff), d)
        params[p + "ffn_b1"] = np.zeros(ff)
        params[p + "ffn_w2"] = uniform((ff, d), ff)
        params[p + "ffn_b2"] = np.zeros(d)
        params[p + "ln2_g"] = np.ones(d)
        params[p + "ln2_b"] = np.zeros(d)
    return params


def zeros_like_params(params: dict) -> dict:
    return {k: np.zeros_like(v) for k, v in params.items()}


# ---------------------------------------------------------------------------
# Attention


def attention_mask(seq_len: int, window_size: int, global_positions, valid) -> np.ndarray:
    """Boolean allowed[..., i, j] matrix for sliding-window attention.

    Token i may attend j when |i - j| <= window_size, or either is a
    global position; both must be valid (non-PAD).  Rows left with no
    allowed key (PAD rows) fall back to attending self so softmax stays
    finite.
    """
    idx = np.arange(seq_len)
    band = np.abs(idx[:, None] - idx[None, :]) <= window_size
    if len(global_positions) > 0:
        g = np.zeros(seq_len, dtype=bool)
        g[list(global_positions)] = True
        band = band | g[:, None] | g[None, :]
    valid = np.asarray(valid, dtype=bool)
    allowed = band & valid[..., None, :] & valid[..., :, None]
    # degenerate rows: attend self with weight 1
    empty = ~allowed.any(axis=-1)
    eye = np.eye(seq_len, dtype=bool)
    allowed = allowed | (empty[..., None] & eye)
    return allowed


def masked_softmax(logits: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    """Row softmax over the allowed set; disallowed entries get weight 0."""
    neg = np.where(allowed, logits, -np.inf)
    m = neg.max(axis=-1, keepdims=True)
    e = np.exp(neg - m)
    e = np.where(allowed, e, 0.0)
    return e / e.sum(axis=-1, keepdims=True)


def sliding_window_attention(q, k, v, window_size, global_positions=(0,), pad_mask=None):
    """Scaled dot-product attention restricted to a local window plus
    global positions.  q, k, v: (..., T, dk); pad_mask: (..., T) bool of
    valid positions (None means all valid)."""
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    t = q.shape[-2]
    if pad_mask is None:
        pad_mask = np.ones(q.shape[:-1], dtype=bool)
    allowed = attention_mask(t, window_size, global_positions, pad_mask)
    logits = q @ np.swapaxes(k, -1, -2) / math.sqrt(q.shape[-1])
    probs = masked_softmax(logits, allowed)
    return probs @ v


def dense_attention(q, k, v, pad_mask=None):
    """Full attention reference (oracle for the sliding-window mechanism)."""
    t = np.asarray(q).shape[-2]
    return sliding_window_attention(q, k, v, window_size=t, global_positions=(),
                                    pad_mask=pad_mask)


# ---------------------------------------------------------------------------
# Forward / backward


def _layer_norm(x, g, b):
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    invstd = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mean) * invstd
    return xhat * g + b, (xhat, invstd)

def _layer_norm_backward(dy, cache, g):
    xhat, invstd = cache
    n = xhat.shape[-1]
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = invstd / n * (
        n * dxhat
        - dxhat.sum(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
    )
    return dx, dg, db


def _dropout(x, rate, rng):
    if rate <= 0.0 or rng is None:
        return x, None
    keep = rng.random(x.shape) >= rate
    return x * keep / (1.0 - rate), keep

def _dropout_backward(dy, mask, rate):
    if mask is None:
        return dy
    return dy * mask / (1.0 - rate)


def forward_batch(ids: np.ndarray, params: dict, config: ScorerConfig,
                  mode: str = "eval", rng=None):
    """Run the encoder over a batch of id sequences.

    ids: (B, T) int array, T = config.max_len.  Returns (h, cache) where
    h is the (B, d) CLS representation.  Dropout is active only in train
    mode (rng required then).
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    ids = np.asarray(ids)
    if ids.ndim == 1:
        ids = ids[None, :]
    if ids.shape[1] != config.max_len:
        raise ValueError(f"sequence length {ids.shape[1]} != max_len {config.max_len}")
    if ids.min() < 0 or ids.max() >= config.vocab_size:
        raise ValueError("token id out of vocabulary range")
    drop = config.dropout if mode == "train" else 0.0
    if drop > 0.0 and rng is None:
        raise ValueError("train mode with dropout needs an rng")

    b, t = ids.shape
    d, nh = config.hidden_dim, config.heads
    dh = d // nh
    # everything from the first PAD onward is padding, whatever its id
    is_pad = ids == PAD
    first_pad = np.where(is_pad.any(axis=1), is_pad.argmax(axis=1), t)
    valid = np.arange(t)[None, :] < first_pad[:, None]
    allowed = attention_mask(t, config.window_size, (0,), valid)  # (B,T,T)
    allowed = allowed[:, None, :, :]  # broadcast over heads

    x = params["tok_emb"][ids] + params["pos_emb"][None, :t, :]
    cache = {"ids": ids, "allowed": allowed, "layers": [], "drop": drop}

    def split_heads(m):  # (B,T,d) -> (B,H,T,dh)
        return m.reshape(b, t, nh, dh).transpose(0, 2, 1, 3)

    def merge_heads(m):  # (B,H,T,dh) -> (B,T,d)
        return m.transpose(0, 2, 1, 3).reshape(b, t, d)

    for l in range(config.layers):
        p = f"layer{l}."
        lc = {"x_in": x}
        q = split_heads(x @ params[p + "wq"] + params[p + "bq"])
        k = split_heads(x @ params[p + "wk"] + params[p + "bk"])
        v = split_heads(x @ params[p + "wv"] + params[p + "bv"])
        logits = q @ k.swapaxes(-1, -2) / math.sqrt(dh)
        probs = masked_softmax(logits, allowed)
        ctx = merge_heads(probs @ v)
        attn = ctx @ params[p + "wo"] + params[p + "bo"]
        attn, m1 = _dropout(attn, drop, rng)
        res1 = x + attn
        x, ln1c = _layer_norm(res1, params[p + "ln1_g"], params[p + "ln1_b"])

        pre = x @ params[p + "ffn_w1"] + params[p + "ffn_b1"]
        act = np.maximum(pre, 0.0)
        ffn = act @ params[p + "ffn_w2"] + params[p + "ffn_b2"]
        ffn, m2 = _dropout(ffn, drop, rng)
        res2 = x + ffn
        x_out, ln2c = _layer_norm(res2, params[p + "ln2_g"], params[p + "ln2_b"])

        lc.update(q=q, k=k, v=v, probs=probs, ctx=ctx, m1=m1, ln1c=ln1c,
                  x_mid=x, pre=pre, act=act, m2=m2, ln2c=ln2c)
        cache["layers"].append(lc)
        x = x_out

    h = x[:, 0, :]
    cache["x_final"] = x
    return h, cache


def backward_batch(dh: np.ndarray, cache: dict, params: dict,
                   config: ScorerConfig) -> dict:
    """Backpropagate d(loss)/dh through the encoder; returns grads keyed
    like params (head grads excluded — the head is differentiated by the
    caller)."""
    ids = cache["ids"]
    b, t = ids.shape
    d, nh = config.hidden_dim, config.heads
    dh_ = d // nh
    drop = cache["drop"]
    grads = {k: np.zeros_like(v) for k, v in params.items()
             if not k.startswith("head_")}

    dx = np.zeros((b, t, d))
    dx[:, 0, :] = dh

    def split_heads(m):
        return m.reshape(b, t, nh, dh_).transpose(0, 2, 1, 3)

    def merge_heads(m):
        return m.transpose(0, 2, 1, 3).reshape(b, t, d)

    for l in reversed(range(config.layers)):
        p = f"layer{l}."
        lc = cache["layers"][l]

        dres2, dg, dbias = _layer_norm_backward(dx, lc["ln2c"], params[p + "ln2_g"])
        grads[p + "ln2_g"] += dg
        grads[p + "ln2_b"] += dbias
        dffn = _dropout_backward(dres2, lc["m2"], drop)
        grads[p + "ffn_w2"] += np.einsum("btf,btd->fd", lc["act"], dffn)
        grads[p + "ffn_b2"] += dffn.sum(axis=(0, 1))
        dact = dffn @ params[p + "ffn_w2"].T
        dpre = dact * (lc["pre"] > 0.0)
        grads[p + "ffn_w1"] += np.einsum("btd,btf->df", lc["x_mid"], dpre)
        grads[p + "ffn_b1"] += dpre.sum(axis=(0, 1))
        dx_mid = dres2 + dpre @ params[p + "ffn_w1"].T

        dres1, dg, dbias = _layer_norm_backward(dx_mid, lc["ln1c"], params[p + "ln1_g"])
        grads[p + "ln1_g"] += dg
        grads[p + "ln1_b"] += dbias
        dattn = _dropout_backward(dres1, lc["m1"], drop)
        grads[p + "wo"] += np.einsum("btd,bte->de", merge_heads(lc["probs"] @ lc["v"]), dattn)
        grads[p + "bo"] += dattn.sum(axis=(0, 1))
        dctx = split_heads(dattn @ params[p + "wo"].T)

        probs = lc["probs"]
        dprobs = dctx @ lc["v"].swapaxes(-1, -2)
        dv = probs.swapaxes(-1, -2) @ dctx
        dlogits = probs * (dprobs - (dprobs * probs).sum(axis=-1, keepdims=True))
        dlogits /= math.sqrt(dh_)
        dq = dlogits @ lc["k"]
        dk = dlogits.swapaxes(-1, -2) @ lc["q"]

        x_in = lc["x_in"]
        dx_in = dres1
        for name, dmat in (("wq", dq), ("wk", dk), ("wv", dv)):
            dflat = merge_heads(dmat)
            grads[p + name] += np.einsum("btd,bte->de", x_in, dflat)
            grads[p + name.replace("w", "b")] += dflat.sum(axis=(0, 1))
            dx_in = dx_in + dflat @ params[p + name].T
        dx = dx_in

    np.add.at(grads["tok_emb"], ids, dx)
    grads["pos_emb"][:t] += dx.sum(axis=0)
    return grads


def sigmoid(z):
    """Numerically stable sigmoid, clipped to stay strictly inside (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    out = np.clip(out, 1e-12, 1.0 - 1e-12)
    return out[0] if scalar else out


def score_batch(ids: np.ndarray, params: dict, config: ScorerConfig,
                mode: str = "eval", rng=None):
    """Scores in (0, 1) for a batch; returns (scores, h, cache)."""
    h, cache = forward_batch(ids, params, config, mode=mode, rng=rng)
    z = h @ params["head_w"] + params["head_b"]
    return sigmoid(z), h, cache


def forward(token_ids, params: dict, config: ScorerConfig, mode: str = "eval",
            rng=None) -> np.ndarray:
    """Single-sequence representation h (dimension d)."""
    h, _ = forward_batch(np.asarray(token_ids)[None, :], params, config,
                         mode=mode, rng=rng)
    return h[0]


def score(token_ids, params: dict, config: ScorerConfig) -> float:
    """Eval-mode quality score for one encoded pair."""
    s, _, _ = score_batch(np.asarray(token_ids)[None, :], params, config)
    return float(s[0])


# ---------------------------------------------------------------------------
# Model artifact I/O


def save_model(path, params: dict, config: ScorerConfig, vocab_digest: str):
    """Single-file artifact: config, vocab digest, and all named tensors."""
    meta = json.dumps({"config": asdict(config), "vocab_digest": vocab_digest})
    arrays = {"__meta__": np.frombuffer(meta.encode("utf-8"), dtype=np.uint8)}
    arrays.update(params)
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_model(path, vocab_digest: str | None = None):
    """Load (params, config, vocab_digest); rejects a mismatched digest."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
        params = {k: data[k] for k in data.files if k != "__meta__"}
    config = ScorerConfig(**meta["config"])
    if vocab_digest is not None and meta["vocab_digest"] != vocab_digest:
        raise ValueError(
            "vocabulary digest mismatch: model was trained with a different vocab"
        )
    return params, config, meta["vocab_digest"]
