"""Lexical overlap metrics walkthrough: BLEU, ROUGE-n, ROUGE-L and a
METEOR variant, all implemented from scratch on token lists.

Run:  python3 demos/02_lexical_metrics.py
"""

from claimeval.corpus import tokenize
from claimeval.lexmetrics import bleu, meteor_lite, rouge_l, rouge_n

reference = tokenize(
    "1. A sensing device comprising a housing, a temperature sensor "
    "mounted in the housing, and a processor coupled to the sensor."
)
close = tokenize(
    "1. A sensing device comprising a housing, a temperature sensor in "
    "the housing, and a processor coupled to the sensor."
)
loose = tokenize("1. A device with a sensor and a processor inside a box.")

for name, cand in (("close paraphrase", close), ("loose paraphrase", loose)):
    print(f"--- {name} ---")
    print(f"  BLEU-1 {bleu(cand, reference, max_n=1):.3f}   "
          f"BLEU-4 {bleu(cand, reference, max_n=4):.3f}")
    r1 = rouge_n(cand, reference, 1)
    rl = rouge_l(cand, reference)
    print(f"  ROUGE-1 P/R/F {r1.precision:.3f}/{r1.recall:.3f}/{r1.f1:.3f}")
    print(f"  ROUGE-L F {rl.f1:.3f}   METEOR {meteor_lite(cand, reference):.3f}")

# Identity sanity check: every metric gives 1.0 on a verbatim copy.
print("\nidentity check:",
      bleu(reference, reference),
      rouge_n(reference, reference, 2).f1,
      rouge_l(reference, reference).f1,
      meteor_lite(reference, reference))

# BLEU's brevity penalty kicks in when the candidate is shorter than the
# reference even if every candidate n-gram matches: 3 perfect unigrams
# against a 4-token reference score exp(1 - 4/3), not 1.0.
print("brevity penalty example:",
      f"{bleu(['a', 'b', 'c'], ['a', 'b', 'c', 'd'], max_n=1):.6f}")

# METEOR penalises fragmentation: the same unigram matches score lower
# when they appear out of order (more chunks).
ordered = ["the", "sensor", "sends", "data"]
shuffled = ["data", "sends", "the", "sensor"]
print("fragmentation:",
      f"in order {meteor_lite(ordered, ordered):.3f} vs "
      f"scrambled {meteor_lite(shuffled, ordered):.3f}")
