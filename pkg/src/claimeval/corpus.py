"""Quadruplet corpus: data model, JSONL I/O, splits, tokenization, statistics.

A corpus record compares two candidate claim sets (B and C) against one
reference claim set (A).  Each of the five evaluation aspects carries a
label in {1, 0, -1}: 1 means B is better, 0 means equal, -1 means C is
better.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Aspect(Enum):
    """The five expert evaluation criteria."""

    COMPLETENESS = "completeness"
    CLARITY = "clarity"
    CONSISTENCY = "consistency"
    LINKAGE = "linkage"
    QUALITY = "quality"


ASPECTS = tuple(Aspect)

VALID_SOURCES = ("uspto_generation", "epo_revision", "new_annotation")
VALID_LABELS = (1, 0, -1)

# Fixed field order for byte-identical re-serialization.
_FIELD_ORDER = ("id", "source", "reference", "candidate_b", "candidate_c", "labels")


class CorpusError(Exception):
    """Base class for corpus ingestion problems."""


class RecordParseError(CorpusError):
    """The line is not valid JSON."""


class RecordSchemaError(CorpusError):
    """A required key is missing or has the wrong type."""


class RecordValueError(CorpusError):
    """A field value is outside its allowed domain."""


class DuplicateIdError(CorpusError):
    """Two records share the same id."""


@dataclass(frozen=True)
class Quadruplet:
    id: str
    source: str
    reference: str
    candidate_b: str
    candidate_c: str
    labels: dict  # Aspect -> int in {1, 0, -1}

    def label(self, aspect: Aspect) -> int:
        return self.labels[aspect]

    def to_json(self) -> str:
        """Serialize with fixed field order (round-trip identity)."""
        obj = {
            "id": self.id,
            "source": self.source,
            "reference": self.reference,
            "candidate_b": self.candidate_b,
            "candidate_c": self.candidate_c,
            "labels": {a.value: self.labels[a] for a in ASPECTS},
        }
        return json.dumps(obj, ensure_ascii=False)


@dataclass(frozen=True)
class Corpus:
    records: tuple
    source_path: str = ""
    digest: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def parse_quadruplet_record(line: str, line_no: int = 0) -> Quadruplet:
    """Parse one JSONL line into a validated Quadruplet.

    Unknown extra keys are ignored with a warning.  Raises
    RecordParseError / RecordSchemaError / RecordValueError.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise RecordParseError(f"line {line_no}: malformed JSON: {e}") from e
    if not isinstance(obj, dict):
        raise RecordSchemaError(f"line {line_no}: record must be a JSON object")

    missing = [k for k in _FIELD_ORDER if k not in obj]
    if missing:
        raise RecordSchemaError(f"line {line_no}: missing keys: {', '.join(missing)}")

    extra = [k for k in obj if k not in _FIELD_ORDER]
    if extra:
        warnings.warn(f"line {line_no}: ignoring unknown keys: {', '.join(extra)}")

    for key in ("id", "source", "reference", "candidate_b", "candidate_c"):
        if not isinstance(obj[key], str):
            raise RecordSchemaError(f"line {line_no}: field '{key}' must be a string")
    for key in ("reference", "candidate_b", "candidate_c"):
        if not obj[key]:
            raise RecordValueError(f"line {line_no}: field '{key}' must be non-empty")
    if obj["source"] not in VALID_SOURCES:
        raise RecordValueError(
            f"line {line_no}: field 'source' must be one of {VALID_SOURCES}, "
            f"got {obj['source']!r}"
        )

    raw_labels = obj["labels"]
    if not isinstance(raw_labels, dict):
        raise RecordSchemaError(f"line {line_no}: field 'labels' must be an object")
    labels = {}
    for aspect in ASPECTS:
        if aspect.value not in raw_labels:
            raise RecordSchemaError(
                f"line {line_no}: labels missing aspect '{aspect.value}'"
            )
        val = raw_labels[aspect.value]
        if not isinstance(val, int) or isinstance(val, bool) or val not in VALID_LABELS:
            raise RecordValueError(
                f"line {line_no}: labels.{aspect.value} must be 1, 0 or -1, got {val!r}"
            )
        labels[aspect] = val
    unknown_aspects = [k for k in raw_labels if k not in {a.value for a in ASPECTS}]
    if unknown_aspects:
        warnings.warn(
            f"line {line_no}: ignoring unknown label keys: {', '.join(unknown_aspects)}"
        )

    return Quadruplet(
        id=obj["id"],
        source=obj["source"],
        reference=obj["reference"],
        candidate_b=obj["candidate_b"],
        candidate_c=obj["candidate_c"],
        labels=labels,
    )


def load_corpus(path) -> Corpus:
    """Load a JSONL corpus, preserving file order.

    An empty file yields an empty Corpus.  Duplicate ids are rejected
    with both line numbers.
    """
    path = Path(path)
    data = path.read_bytes()
    records = []
    seen = {}
    for line_no, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        rec = parse_quadruplet_record(line, line_no)
        if rec.id in seen:
            raise DuplicateIdError(
                f"duplicate id {rec.id!r} at lines {seen[rec.id]} and {line_no}"
            )
        seen[rec.id] = line_no
        records.append(rec)
    return Corpus(
        records=tuple(records),
        source_path=str(path),
        digest=hashlib.sha256(data).hexdigest(),
    )


def split_corpus(corpus: Corpus, test_fraction: float, val_fraction: float, seed: int):
    """Deterministic (train, val, test) partition.

    Sizes are round(N * fraction) with the remainder going to train; the
    rounding is half-up so 1228 records at test_fraction=0.15 give a
    184-record test set.
    """
    for name, f in (("test_fraction", test_fraction), ("val_fraction", val_fraction)):
        if not (0.0 <= f < 1.0):
            raise ValueError(f"{name} must be in [0, 1), got {f}")
    if test_fraction + val_fraction >= 1.0:
        raise ValueError("test_fraction + val_fraction must be < 1")

    n = len(corpus)
    n_test = int(math.floor(n * test_fraction + 0.5))
    n_val = int(math.floor(n * val_fraction + 0.5))

    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    test_idx = sorted(indices[:n_test])
    val_idx = sorted(indices[n_test : n_test + n_val])
    train_idx = sorted(indices[n_test + n_val :])

    def take(idx):
        return Corpus(
            records=tuple(corpus.records[i] for i in idx),
            source_path=corpus.source_path,
            digest=corpus.digest,
        )

    return take(train_idx), take(val_idx), take(test_idx)


def label_distribution(corpus: Corpus, aspect: Aspect):
    """Counts of (B better, equal, C better) for one aspect."""
    counts = {1: 0, 0: 0, -1: 0}
    for rec in corpus:
        counts[rec.label(aspect)] += 1
    return counts[1], counts[0], counts[-1]


# ---------------------------------------------------------------------------
# Tokenization and vocabulary


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True


_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> list:
    """Deterministic word+punctuation tokenizer.

    Whitespace is collapsed, punctuation becomes its own token, and the
    text is lowercased when the config says so.
    """
    if config.lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def detokenize(tokens) -> str:
    return " ".join(tokens)


PAD, UNK, CLS, SEP = 0, 1, 2, 3
RESERVED_TOKENS = ("<pad>", "<unk>", "<cls>", "<sep>")


@dataclass(frozen=True)
class Vocab:
    token_to_id: dict
    id_to_token: tuple

    def __len__(self) -> int:
        return len(self.id_to_token)

    def get(self, token: str) -> int:
        return self.token_to_id.get(token, UNK)

    @property
    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.id_to_token).encode("utf-8")).hexdigest()


def build_vocab(
    corpus: Corpus,
    min_freq: int = 1,
    max_size: int | None = None,
    tokenizer_config: TokenizerConfig = TokenizerConfig(),
) -> Vocab:
    """Frequency-ranked vocabulary with fixed reserved ids 0..3.

    Ties in frequency break lexicographically (smaller token, smaller id).
    """
    if len(corpus) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    freq = {}
    for rec in corpus:
        for text in (rec.reference, rec.candidate_b, rec.candidate_c):
            for tok in tokenize(text, tokenizer_config):
                freq[tok] = freq.get(tok, 0) + 1
    ranked = sorted(
        (t for t, c in freq.items() if c >= min_freq),
        key=lambda t: (-freq[t], t),
    )
    if max_size is not None:
        ranked = ranked[: max(0, max_size - len(RESERVED_TOKENS))]
    id_to_token = RESERVED_TOKENS + tuple(ranked)
    token_to_id = {t: i for i, t in enumerate(id_to_token)}
    return Vocab(token_to_id=token_to_id, id_to_token=id_to_token)


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple
    length: int  # positions before padding


def encode_pair(reference, candidate, vocab: Vocab, max_len: int) -> TokenSequence:
    """Encode a (reference, candidate) pair as [CLS] ref [SEP] cand [SEP] + PAD.

    When the pair exceeds the budget, each side is truncated to an equal
    half of (max_len - 3), the odd remainder token going to the reference.
    Accepts raw text or pre-tokenized lists.
    """
    if max_len < 8:
        raise ValueError(f"max_len must be >= 8, got {max_len}")
    ref = tokenize(reference) if isinstance(reference, str) else list(reference)
    cand = tokenize(candidate) if isinstance(candidate, str) else list(candidate)

    budget = max_len - 3
    if len(ref) + len(cand) > budget:
        cand_half = budget // 2
        ref_half = budget - cand_half
        ref = ref[:ref_half]
        cand = cand[:cand_half]

    ids = [CLS] + [vocab.get(t) for t in ref] + [SEP] + [vocab.get(t) for t in cand] + [SEP]
    length = len(ids)
    ids.extend([PAD] * (max_len - length))
    return TokenSequence(ids=tuple(ids), length=length)


# ---------------------------------------------------------------------------
# Length statistics


@dataclass(frozen=True)
class LengthStats:
    min: int
    max: int
    mean: float
    median: float
    std: float
    count: int


def length_stats(
    corpus: Corpus, tokenizer_config: TokenizerConfig = TokenizerConfig()
) -> LengthStats:
    """Token-count statistics over every claim text (each text counted
    separately: reference, candidate B, candidate C).

    The median of an even count is the mean of the middle two; std is the
    population standard deviation.
    """
    if len(corpus) == 0:
        raise ValueError("cannot compute length statistics on an empty corpus")
    lengths = []
    for rec in corpus:
        for text in (rec.reference, rec.candidate_b, rec.candidate_c):
            lengths.append(len(tokenize(text, tokenizer_config)))
    lengths.sort()
    n = len(lengths)
    mean = sum(lengths) / n
    if n % 2 == 1:
        median = float(lengths[n // 2])
    else:
        median = (lengths[n // 2 - 1] + lengths[n // 2]) / 2.0
    var = sum((x - mean) ** 2 for x in lengths) / n
    return LengthStats(
        min=lengths[0],
        max=lengths[-1],
        mean=mean,
        median=median,
        std=math.sqrt(var),
        count=n,
    )
