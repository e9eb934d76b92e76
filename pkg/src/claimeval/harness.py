"""End-to-end evaluation pipeline.

Runs any scorer (lexical metric, trained model, external score file, or
judge) over a corpus per aspect, derives three-way predictions, and
measures agreement with the human labels.  Renders report tables with per
column best-value flags, plus a structured JSON document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import lexmetrics as lex
from .corpus import ASPECTS, Aspect, Corpus, Vocab, encode_pair, tokenize
from .stats import accuracy, kendall_tau_b, macro_f1, spearman_rho, three_way_labels

DEFAULT_EPSILON = 1e-4

KINDS = ("lexical", "learned", "external_file", "judge")

OVERALL_WEIGHTS = {
    Aspect.COMPLETENESS: 4.0,
    Aspect.CLARITY: 2.0,
    Aspect.CONSISTENCY: 2.0,
    Aspect.LINKAGE: 3.0,
}


@dataclass(frozen=True)
class ScorerHandle:
    """A named scoring strategy.

    score_pair(reference, candidate, aspect) -> float for computing
    kinds; table maps quadruplet id -> (score_b, score_c) for the
    external_file kind.
    """

    name: str
    kind: str
    score_pair: object = None
    table: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class EvalScores:
    tau: float | None
    rho: float | None
    accuracy: float
    macro_f1: float


@dataclass(frozen=True)
class EvalResult:
    metric: str
    kind: str
    aspect: Aspect
    scores: EvalScores
    mode: str
    n: int


# ---------------------------------------------------------------------------
# Scorer constructors

LEXICAL_METRICS = {
    "bleu1": lambda cand, ref: lex.bleu(cand, ref, max_n=1),
    "bleu4": lambda cand, ref: lex.bleu(cand, ref, max_n=4),
    "rouge1": lambda cand, ref: lex.rouge_n(cand, ref, 1).f1,
    "rouge2": lambda cand, ref: lex.rouge_n(cand, ref, 2).f1,
    "rougeL": lambda cand, ref: lex.rouge_l(cand, ref).f1,
    "meteor": lambda cand, ref: lex.meteor_lite(cand, ref),
}


def lexical_scorer(name: str) -> ScorerHandle:
    """Lexical metrics score every aspect identically; text goes through
    the corpus tokenizer first."""
    fn = LEXICAL_METRICS[name]

    def score_pair(reference, candidate, aspect):
        return fn(tokenize(candidate), tokenize(reference))

    return ScorerHandle(name=name, kind="lexical", score_pair=score_pair)


def learned_scorer(name: str, models: dict, vocab: Vocab) -> ScorerHandle:
    """models: Aspect -> (params, ScorerConfig); one trained model per aspect."""
    from . import scorer as sc

    def score_pair(reference, candidate, aspect):
        if aspect not in models:
            raise ValueError(f"no trained model for aspect {aspect.value!r}")
        params, config = models[aspect]
        seq = encode_pair(reference, candidate, vocab, config.max_len)
        return sc.score(seq.ids, params, config)

    return ScorerHandle(name=name, kind="learned", score_pair=score_pair)


def external_file_scorer(name: str, path) -> ScorerHandle:
    """Precomputed scores, JSONL of {"id", "score_b", "score_c"}."""
    table = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        table[obj["id"]] = (float(obj["score_b"]), float(obj["score_c"]))
    return ScorerHandle(name=name, kind="external_file", table=table)


def judge_scorer(name: str, judge_fn) -> ScorerHandle:
    """judge_fn(reference, candidate) -> JudgeVerdict; per-aspect scores
    come from the verdict's criteria, overall quality from the weighted
    formula."""

    def score_pair(reference, candidate, aspect):
        verdict = judge_fn(reference, candidate)
        if aspect is Aspect.QUALITY:
            return verdict.overall()
        return float(verdict.scores[aspect])

    return ScorerHandle(name=name, kind="judge", score_pair=score_pair)


# ---------------------------------------------------------------------------
# Pipeline operations


def score_corpus(handle: ScorerHandle, corpus: Corpus, aspect: Aspect):
    """Aligned (scores_B, scores_C) lists in corpus order."""
    if handle.kind == "external_file":
        missing = [r.id for r in corpus if r.id not in handle.table]
        if missing:
            raise KeyError(
                f"score file for {handle.name!r} is missing ids: {', '.join(missing)}"
            )
        pairs = [handle.table[r.id] for r in corpus]
        return [p[0] for p in pairs], [p[1] for p in pairs]
    scores_b = [handle.score_pair(r.reference, r.candidate_b, aspect) for r in corpus]
    scores_c = [handle.score_pair(r.reference, r.candidate_c, aspect) for r in corpus]
    return scores_b, scores_c


def evaluate_metric(handle: ScorerHandle, corpus: Corpus, aspect: Aspect,
                    mode: str = "discrete",
                    epsilon: float = DEFAULT_EPSILON) -> EvalResult:
    """Agreement of one scorer with the human labels on one aspect.

    discrete mode correlates predicted labels with human labels; raw_diff
    mode correlates the raw score differences instead.  Accuracy and
    macro-F1 always use the discretized labels.
    """
    if mode not in ("discrete", "raw_diff"):
        raise ValueError(f"mode must be 'discrete' or 'raw_diff', got {mode!r}")
    scores_b, scores_c = score_corpus(handle, corpus, aspect)
    gold = [r.label(aspect) for r in corpus]
    preds = three_way_labels(scores_b, scores_c, epsilon)
    if mode == "discrete":
        xs = preds
    else:
        xs = [sb - sc for sb, sc in zip(scores_b, scores_c)]
    scores = EvalScores(
        tau=kendall_tau_b(xs, gold),
        rho=spearman_rho(xs, gold),
        accuracy=accuracy(preds, gold),
        macro_f1=macro_f1(preds, gold),
    )
    return EvalResult(metric=handle.name, kind=handle.kind, aspect=aspect,
                      scores=scores, mode=mode, n=len(corpus))


def overall_quality(aspect_scores: dict, scale_max: float) -> float:
    """Weighted overall rating: (completeness*4 + clarity*2 +
    consistency*2 + linkage*3) / 11, on the given scale."""
    total = 0.0
    for aspect, weight in OVERALL_WEIGHTS.items():
        value = float(aspect_scores[aspect])
        if not 0.0 <= value <= scale_max:
            raise ValueError(
                f"{aspect.value} score {value} outside [0, {scale_max}]"
            )
        total += weight * value
    return total / sum(OVERALL_WEIGHTS.values())


# ---------------------------------------------------------------------------
# Reports


def _sorted_results(results):
    kind_rank = {k: i for i, k in enumerate(KINDS)}
    aspect_rank = {a: i for i, a in enumerate(ASPECTS)}
    return sorted(results, key=lambda r: (kind_rank[r.kind], r.metric,
                                          aspect_rank[r.aspect]))


def _fmt(value, best):
    if value is None:
        return "-"
    mark = "*" if best is not None and value == best else " "
    return f"{value:.3f}{mark}"


def _render_table(rows, aspects, columns, title):
    """rows: list of (metric, kind, {aspect: {col: value}})."""
    header = ["Type", "Metric"]
    for a in aspects:
        for col in columns:
            header.append(f"{a.value[:5]}.{col}")
    best = {}
    for a in aspects:
        for col in columns:
            vals = [r[2][a][col] for r in rows if a in r[2] and r[2][a][col] is not None]
            best[(a, col)] = max(vals) if vals else None
    lines = [title]
    table = [header]
    for metric, kind, cells in rows:
        row = [kind, metric]
        for a in aspects:
            for col in columns:
                if a in cells:
                    row.append(_fmt(cells[a][col], best[(a, col)]))
                else:
                    row.append("-")
        table.append(row)
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    for r in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def render_report(results, fmt: str = "text") -> str:
    """Deterministic report over EvalResults; '*' flags each column's best
    value (ties flag all maximal cells), '-' marks degenerate statistics.
    """
    if not results:
        raise ValueError("no results to report")
    results = _sorted_results(results)
    if fmt == "json":
        rows = [
            {
                "metric": r.metric,
                "type": r.kind,
                "aspect": r.aspect.value,
                "tau": r.scores.tau,
                "rho": r.scores.rho,
                "accuracy": r.scores.accuracy,
                "macro_f1": r.scores.macro_f1,
                "mode": r.mode,
                "n": r.n,
            }
            for r in results
        ]
        return json.dumps(rows, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    aspects = [a for a in ASPECTS if any(r.aspect is a for r in results)]
    grouped = {}
    order = []
    for r in results:
        key = (r.metric, r.kind)
        if key not in grouped:
            grouped[key] = {}
            order.append(key)
        grouped[key][r.aspect] = {
            "tau": r.scores.tau,
            "rho": r.scores.rho,
            "acc": r.scores.accuracy,
            "f1": r.scores.macro_f1,
        }
    rows = [(metric, kind, grouped[(metric, kind)]) for metric, kind in order]
    part1 = _render_table(rows, aspects, ("tau", "rho"),
                          "Correlation with human labels (tau-b / Spearman)")
    part2 = _render_table(rows, aspects, ("acc", "f1"),
                          "Three-way classification (accuracy / macro-F1)")
    return part1 + "\n\n" + part2 + "\n"
