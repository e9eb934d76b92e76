"""Agreement statistics: tie-aware rank correlations and three-way
classification scores.

Degenerate inputs (a vector with every element tied) make the rank
correlations undefined; those return None rather than NaN so report rows
can render a dash.
"""

from __future__ import annotations

import math

LABEL_CLASSES = (1, 0, -1)


def _check_lengths(x, y, min_len: int):
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < min_len:
        raise ValueError(f"need at least {min_len} elements, got {len(x)}")


def kendall_tau_b(x, y):
    """Tie-corrected Kendall rank correlation (tau-b).

    tau_b = (C - D) / sqrt((n0 - n1) (n0 - n2)) where n0 = n(n-1)/2 and
    n1, n2 count tied pairs within x and y.  Returns None when either
    vector is entirely tied.
    """
    _check_lengths(x, y, 2)
    n = len(x)
    n0 = n * (n - 1) // 2

    def tie_pairs(v):
        counts = {}
        for val in v:
            counts[val] = counts.get(val, 0) + 1
        return sum(t * (t - 1) // 2 for t in counts.values())

    n1 = tie_pairs(x)
    n2 = tie_pairs(y)
    if n1 == n0 or n2 == n0:
        return None

    concordant = 0
    discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = (x[i] > x[j]) - (x[i] < x[j])
            b = (y[i] > y[j]) - (y[i] < y[j])
            s = a * b
            if s > 0:
                concordant += 1
            elif s < 0:
                discordant += 1

    return (concordant - discordant) / math.sqrt((n0 - n1) * (n0 - n2))


def midranks(v):
    """Average ranks (1-based) with ties sharing their mean rank."""
    order = sorted(range(len(v)), key=lambda i: v[i])
    ranks = [0.0] * len(v)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and v[order[j + 1]] == v[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman_rho(x, y):
    """Pearson correlation of mid-ranks; None on an all-tied vector."""
    _check_lengths(x, y, 2)
    rx = midranks(x)
    ry = midranks(y)
    n = len(x)
    mx = sum(rx) / n
    my = sum(ry) / n
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    return sxy / math.sqrt(sxx * syy)


def three_way_labels(scores_b, scores_c, epsilon: float = 1e-4):
    """Discretize score pairs into {1, 0, -1} with an equality band.

    |s_B - s_C| < epsilon -> 0; s_B > s_C -> 1; otherwise -1.
    """
    if len(scores_b) != len(scores_c):
        raise ValueError(f"length mismatch: {len(scores_b)} vs {len(scores_c)}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    labels = []
    for sb, sc in zip(scores_b, scores_c):
        if abs(sb - sc) < epsilon:
            labels.append(0)
        elif sb > sc:
            labels.append(1)
        else:
            labels.append(-1)
    return labels


def accuracy(pred, gold) -> float:
    """Exact-match fraction."""
    _check_lengths(pred, gold, 1)
    return sum(p == g for p, g in zip(pred, gold)) / len(pred)


def macro_f1(pred, gold) -> float:
    """Macro-averaged F1 over the three classes {1, 0, -1}.

    A class absent from both pred and gold contributes F1 = 0 and is
    still averaged.
    """
    _check_lengths(pred, gold, 1)
    f1s = []
    for cls in LABEL_CLASSES:
        tp = sum(p == cls and g == cls for p, g in zip(pred, gold))
        fp = sum(p == cls and g != cls for p, g in zip(pred, gold))
        fn = sum(p != cls and g == cls for p, g in zip(pred, gold))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom > 0 else 0.0)
    return sum(f1s) / len(f1s)
