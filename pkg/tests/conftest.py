import json

import numpy as np
import pytest

from claimeval.corpus import ASPECTS, Corpus, Quadruplet

WORDS = [
    "device", "system", "module", "claim", "wherein", "comprising", "signal",
    "processor", "memory", "network", "sensor", "unit", "circuit", "data",
    "interface", "housing", "member", "portion", "element", "assembly",
]


def make_record(i, reference="a mobile device", candidate_b="a mobile device",
                candidate_c="a portable device", label=1, labels=None,
                source="uspto_generation"):
    if labels is None:
        labels = {a: label for a in ASPECTS}
    return Quadruplet(id=f"q-{i}", source=source, reference=reference,
                      candidate_b=candidate_b, candidate_c=candidate_c,
                      labels=labels)


def make_corpus(records):
    return Corpus(records=tuple(records))


def record_json(i, label=1, **overrides):
    obj = {
        "id": f"q-{i}",
        "source": "uspto_generation",
        "reference": "a mobile device",
        "candidate_b": "a mobile device",
        "candidate_c": "a portable device",
        "labels": {a.value: label for a in ASPECTS},
    }
    obj.update(overrides)
    return json.dumps(obj, ensure_ascii=False)


def write_corpus(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def planted_corpus(n=50, seed=42, base_len=20, corruption_levels=(1, 8),
                   equal_fraction=0.2):
    """Synthetic corpus whose labels follow a hidden corruption rule: the
    candidate with fewer randomly substituted tokens is better."""
    rng = np.random.default_rng(seed)

    def corrupt(tokens, k):
        toks = list(tokens)
        idx = rng.choice(len(toks), size=min(k, len(toks)), replace=False)
        for j in idx:
            toks[j] = str(rng.choice(WORDS))
        return " ".join(toks)

    records = []
    for i in range(n):
        ref_tokens = [str(w) for w in rng.choice(WORDS, size=base_len)]
        ref = " ".join(ref_tokens)
        if rng.random() < equal_fraction:
            kb = kc = int(sum(corruption_levels) // 2)
        else:
            kb, kc = rng.choice(corruption_levels, size=2, replace=False)
        y = 0 if kb == kc else (1 if kb < kc else -1)
        records.append(Quadruplet(
            id=f"p-{i}", source="new_annotation", reference=ref,
            candidate_b=corrupt(ref_tokens, int(kb)),
            candidate_c=corrupt(ref_tokens, int(kc)),
            labels={a: y for a in ASPECTS},
        ))
    return Corpus(records=tuple(records))


@pytest.fixture
def tiny_corpus():
    return make_corpus([
        make_record(0, reference="a mobile communications device",
                    candidate_b="a mobile communications device",
                    candidate_c="a stationary telegraph machine", label=1),
        make_record(1, reference="the vent housing comprises a filter",
                    candidate_b="a vent housing with some filter",
                    candidate_c="the vent housing comprises a filter", label=-1),
        make_record(2, reference="claim 1, wherein the sensor",
                    candidate_b="claim 1, wherein the sensor",
                    candidate_c="claim 1, wherein the sensor", label=0),
    ])
