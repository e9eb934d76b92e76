"""N-gram baseline metrics: BLEU, ROUGE-1/2/L, and a METEOR variant.

All functions take token lists (see corpus.tokenize) and return scores in
[0, 1].  Single reference only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass


def ngram_counts(tokens, n: int) -> Counter:
    """Multiset of n-grams via sliding window."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate, reference, max_n: int = 4, smoothing: bool = True) -> float:
    """BLEU with clipped n-gram precision and brevity penalty.

    Geometric mean of precisions for n = 1..max_n over the n-gram orders
    the candidate actually has; add-one smoothing (when enabled) applies
    only to zero higher-order (n >= 2) precisions.  Empty candidate -> 0.
    """
    if not 1 <= max_n <= 4:
        raise ValueError(f"max_n must be in 1..4, got {max_n}")
    if not candidate:
        return 0.0

    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        cand_counts = ngram_counts(candidate, n)
        total = sum(cand_counts.values())
        if total == 0:
            continue  # candidate shorter than n: order not applicable
        ref_counts = ngram_counts(reference, n)
        clipped = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        if clipped == 0:
            if smoothing and n >= 2:
                p = 1.0 / (total + 1)
            else:
                return 0.0
        else:
            p = clipped / total
        log_sum += math.log(p)
        orders += 1

    if orders == 0:
        return 0.0
    geo_mean = math.exp(log_sum / orders)
    if len(candidate) < len(reference):
        bp = math.exp(1.0 - len(reference) / len(candidate))
    else:
        bp = 1.0
    return bp * geo_mean


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def _prf(overlap: float, cand_total: float, ref_total: float) -> PRF:
    p = overlap / cand_total if cand_total > 0 else 0.0
    r = overlap / ref_total if ref_total > 0 else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(precision=p, recall=r, f1=f)


def rouge_n(candidate, reference, n: int) -> PRF:
    """N-gram overlap precision/recall/F1 (overlap clipped by min count)."""
    cand_counts = ngram_counts(candidate, n)
    ref_counts = ngram_counts(reference, n)
    overlap = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    return _prf(overlap, sum(cand_counts.values()), sum(ref_counts.values()))


def lcs_length(a, b) -> int:
    """Longest common subsequence length, O(len(a)*len(b)) DP."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(candidate, reference) -> PRF:
    """LCS-based precision/recall/F1."""
    lcs = lcs_length(candidate, reference)
    return _prf(lcs, len(candidate), len(reference))


@dataclass(frozen=True)
class MeteorConfig:
    alpha: float = 0.9
    beta: float = 3.0
    gamma: float = 0.5
    stem_suffixes: tuple = ("ing", "ed", "es", "s")

    def validate(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")


def _stem(token: str, suffixes) -> str:
    for suf in suffixes:
        if token.endswith(suf) and len(token) > len(suf) + 1:
            return token[: -len(suf)]
    return token


def meteor_lite(candidate, reference, config: MeteorConfig = MeteorConfig()) -> float:
    """Unigram-matching metric with a fragmentation penalty.

    Greedy one-to-one alignment in two passes (exact, then stem-equal);
    F_mean = PR / (alpha*P + (1-alpha)*R); penalty = gamma *
    (chunks/matches)^beta; score = F_mean * (1 - penalty).  No synonym
    dictionary (stemming only).
    """
    config.validate()
    if not candidate or not reference:
        return 0.0

    # alignment[i] = index into reference matched by candidate position i
    alignment = [None] * len(candidate)
    ref_used = [False] * len(reference)

    def match_pass(key):
        cand_keys = [key(t) for t in candidate]
        ref_keys = [key(t) for t in reference]
        for i, ck in enumerate(cand_keys):
            if alignment[i] is not None:
                continue
            for j, rk in enumerate(ref_keys):
                if not ref_used[j] and ck == rk:
                    alignment[i] = j
                    ref_used[j] = True
                    break

    match_pass(lambda t: t)
    match_pass(lambda t: _stem(t, config.stem_suffixes))

    matched = [(i, j) for i, j in enumerate(alignment) if j is not None]
    m = len(matched)
    if m == 0:
        return 0.0

    p = m / len(candidate)
    r = m / len(reference)
    f_mean = p * r / (config.alpha * p + (1.0 - config.alpha) * r)

    chunks = 1
    for (i0, j0), (i1, j1) in zip(matched, matched[1:]):
        if i1 != i0 + 1 or j1 != j0 + 1:
            chunks += 1

    penalty = config.gamma * (chunks / m) ** config.beta
    return f_mean * (1.0 - penalty)
