"""Agreement statistics walkthrough: tie-aware rank correlations and the
three-way label discretization used to compare metric judgements with
human comparison labels.

Run:  python3 demos/03_agreement_stats.py
"""

from claimeval.stats import (
    accuracy,
    kendall_tau_b,
    macro_f1,
    spearman_rho,
    three_way_labels,
)

# --- 1. Kendall tau-b handles ties in either vector; the classic worked
# example with one tie on each side gives exactly 0.8.
x = [1, 1, 2, 3]
y = [1, 2, 2, 3]
print(f"tau_b({x}, {y}) = {kendall_tau_b(x, y):.3f}")
print(f"spearman({x}, {y}) = {spearman_rho(x, y):.3f}  (mid-ranks for ties)")

# A completely tied vector carries no ranking information, so the
# correlations are undefined; the library returns None instead of NaN.
print("degenerate:", kendall_tau_b([2, 2, 2], [1, 2, 3]))

# --- 2. Continuous score pairs are discretized into {1, 0, -1} with an
# equality band: gaps smaller than epsilon count as "equal".
scores_b = [0.90, 0.50, 0.300049, 0.10]
scores_c = [0.10, 0.50, 0.300000, 0.90]
labels = three_way_labels(scores_b, scores_c, epsilon=1e-4)
print("three-way labels:", labels)

# --- 3. Classification agreement: accuracy is the exact-match rate,
# macro-F1 averages per-class F1 over all three classes (a class absent
# from both predictions and gold contributes zero).
gold = [1, 0, 0, -1]
print(f"accuracy {accuracy(labels, gold):.2f}  "
      f"macro-F1 {macro_f1(labels, gold):.2f}")
