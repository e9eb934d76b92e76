"""Command-line entry point.

Subcommands: validate, stats, split, train, score, judge, evaluate,
report.  Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime
error.  A JSON config file can supply defaults; explicit flags win, and
the resolved configuration is written into the output directory.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from . import harness, judge as judge_mod, scorer as sc, trainer
from .corpus import (
    ASPECTS,
    Aspect,
    CorpusError,
    build_vocab,
    label_distribution,
    length_stats,
    load_corpus,
    split_corpus,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="claimeval", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", help="JSON config file with default flag values")
        s.add_argument("--corpus", help="corpus JSONL path")
        return s

    add("validate", "schema-check a corpus file")
    add("stats", "dataset label distribution and token-length statistics")

    s = add("split", "deterministic train/val/test split")
    s.add_argument("--test-fraction", type=float, default=None)
    s.add_argument("--val-fraction", type=float, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--output-dir", default=None)

    s = add("train", "train learned scorer(s) on one or all aspects")
    s.add_argument("--aspect", choices=[a.value for a in ASPECTS])
    s.add_argument("--all-aspects", action="store_true")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--epochs", type=int, default=None)
    s.add_argument("--batch-size", type=int, default=None)
    s.add_argument("--learning-rate", type=float, default=None)
    s.add_argument("--weight-decay", type=float, default=None)
    s.add_argument("--val-fraction", type=float, default=None)
    s.add_argument("--margin", type=float, default=None)
    s.add_argument("--tolerance", type=float, default=None)
    s.add_argument("--hidden-dim", type=int, default=None)
    s.add_argument("--layers", type=int, default=None)
    s.add_argument("--heads", type=int, default=None)
    s.add_argument("--window-size", type=int, default=None)
    s.add_argument("--max-len", type=int, default=None)
    s.add_argument("--ffn-dim", type=int, default=None)
    s.add_argument("--dropout", type=float, default=None)
    s.add_argument("--output-dir", default=None)

    s = add("score", "write per-record scores for one metric or model")
    s.add_argument("--metric", help="lexical metric name (bleu1, rouge1, ...)")
    s.add_argument("--model", help="trained model artifact (.npz)")
    s.add_argument("--vocab", help="vocab file saved by train (required with --model)")
    s.add_argument("--output", default=None)

    s = add("judge", "run the LLM judge, writing external score files per aspect")
    s.add_argument("--endpoint", default=None)
    s.add_argument("--model", default=None)
    s.add_argument("--temperature", type=float, default=None)
    s.add_argument("--max-retries", type=int, default=None)
    s.add_argument("--max-in-flight", type=int, default=None)
    s.add_argument("--cache-dir", default=None)
    s.add_argument("--output-dir", default=None)

    s = add("evaluate", "full agreement pipeline over one or more scorers")
    s.add_argument("--metrics", help="comma-separated lexical metric names")
    s.add_argument("--external", action="append", default=[],
                   metavar="NAME=PATH", help="external score file (repeatable)")
    s.add_argument("--model-dir", help="directory of trained per-aspect artifacts")
    s.add_argument("--mode", choices=["discrete", "raw_diff"], default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--output-dir", default=None)

    s = add("report", "re-render a report from its JSON rows")
    s.add_argument("--results", required=True, help="report.json path")
    s.add_argument("--format", choices=["text", "json"], default="text")
    return p


def _merge_config(args):
    """Config-file values fill in flags left at None; flags win."""
    if not getattr(args, "config", None):
        return args
    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, [], False):
            setattr(args, attr, value)
    return args


def _require_corpus(args):
    if not args.corpus:
        raise UsageError("--corpus is required")
    return load_corpus(args.corpus)


def _write_resolved_config(out_dir: Path, payload: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _default(value, fallback):
    return fallback if value is None else value


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args):
    corpus = _require_corpus(args)
    print(f"OK: {len(corpus)} records, digest {corpus.digest[:12]}")
    return EXIT_OK


def cmd_stats(args):
    corpus = _require_corpus(args)
    print(f"records: {len(corpus)}")
    print(f"{'aspect':<14}{'B better':>9}{'equal':>7}{'C better':>9}")
    for aspect in ASPECTS:
        b, e, c = label_distribution(corpus, aspect)
        print(f"{aspect.value:<14}{b:>9}{e:>7}{c:>9}")
    if len(corpus) > 0:
        ls = length_stats(corpus)
        print(
            f"token lengths (per claim text): min {ls.min}, max {ls.max}, "
            f"mean {ls.mean:.1f}, median {ls.median:.1f}, std {ls.std:.1f}"
        )
    return EXIT_OK


def cmd_split(args):
    corpus = _require_corpus(args)
    test_f = _default(args.test_fraction, 0.15)
    val_f = _default(args.val_fraction, 0.0)
    seed = _default(args.seed, 0)
    out = Path(_default(args.output_dir, "splits"))
    train, val, test = split_corpus(corpus, test_f, val_f, seed)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", train), ("val", val), ("test", test)):
        (out / f"{name}.jsonl").write_text(
            "".join(rec.to_json() + "\n" for rec in part), encoding="utf-8"
        )
    _write_resolved_config(out, {
        "command": "split", "corpus": args.corpus, "test_fraction": test_f,
        "val_fraction": val_f, "seed": seed,
    })
    print(f"train {len(train)}  val {len(val)}  test {len(test)} -> {out}")
    return EXIT_OK


def _train_configs(args):
    seed = _default(args.seed, 0)
    loss_cfg = trainer.LossConfig(
        margin=_default(args.margin, 0.1),
        tolerance=_default(args.tolerance, 0.02),
    )
    train_cfg = trainer.TrainConfig(
        batch_size=_default(args.batch_size, 4),
        learning_rate=_default(args.learning_rate, 5e-6),
        weight_decay=_default(args.weight_decay, 0.01),
        epochs=_default(args.epochs, 10),
        val_fraction=_default(args.val_fraction, 0.1),
        seed=seed,
        loss=loss_cfg,
    )
    scorer_cfg = sc.ScorerConfig(
        vocab_size=5,  # replaced once the vocab is built
        hidden_dim=_default(args.hidden_dim, 64),
        layers=_default(args.layers, 2),
        heads=_default(args.heads, 4),
        window_size=_default(args.window_size, 16),
        max_len=_default(args.max_len, 512),
        ffn_dim=_default(args.ffn_dim, 256),
        dropout=_default(args.dropout, 0.1),
    )
    return scorer_cfg, train_cfg


def cmd_train(args):
    corpus = _require_corpus(args)
    if bool(args.aspect) == bool(args.all_aspects):
        raise UsageError("give exactly one of --aspect or --all-aspects")
    aspects = list(ASPECTS) if args.all_aspects else [Aspect(args.aspect)]
    scorer_cfg, train_cfg = _train_configs(args)
    out = Path(_default(args.output_dir, "runs"))
    out.mkdir(parents=True, exist_ok=True)

    vocab = build_vocab(corpus)
    scorer_cfg = dataclasses.replace(scorer_cfg, vocab_size=len(vocab))
    (out / "vocab.txt").write_text(
        "\n".join(vocab.id_to_token) + "\n", encoding="utf-8"
    )

    for aspect in aspects:
        params, vocab, history = trainer.train_aspect_model(
            corpus, aspect, scorer_cfg, train_cfg, vocab=vocab
        )
        sc.save_model(out / f"model_{aspect.value}.npz", params, scorer_cfg,
                      vocab.digest)
        with open(out / f"history_{aspect.value}.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "train_loss", "val_loss", "val_acc"])
            for i in range(len(history.train_loss)):
                writer.writerow([
                    i, f"{history.train_loss[i]:.10f}",
                    f"{history.val_loss[i]:.10f}",
                    f"{history.val_accuracy[i]:.10f}",
                ])
        print(
            f"{aspect.value}: best epoch {history.best_epoch} "
            f"(val acc {history.val_accuracy[history.best_epoch]:.3f})"
        )

    _write_resolved_config(out, {
        "command": "train", "corpus": args.corpus,
        "aspects": [a.value for a in aspects],
        "scorer": dataclasses.asdict(scorer_cfg),
        "train": dataclasses.asdict(train_cfg),
        "seed": train_cfg.seed,
    })
    return EXIT_OK


def _load_learned_handle(model_dir: Path, corpus):
    vocab_path = model_dir / "vocab.txt"
    tokens = vocab_path.read_text(encoding="utf-8").splitlines()
    from .corpus import Vocab

    vocab = Vocab(token_to_id={t: i for i, t in enumerate(tokens)},
                  id_to_token=tuple(tokens))
    models = {}
    for aspect in ASPECTS:
        path = model_dir / f"model_{aspect.value}.npz"
        if path.exists():
            params, config, _ = sc.load_model(path, vocab.digest)
            models[aspect] = (params, config)
    if not models:
        raise FileNotFoundError(f"no model_<aspect>.npz artifacts in {model_dir}")
    return harness.learned_scorer("learned", models, vocab)


def cmd_score(args):
    corpus = _require_corpus(args)
    if bool(args.metric) == bool(args.model):
        raise UsageError("give exactly one of --metric or --model")
    if args.metric:
        if args.metric not in harness.LEXICAL_METRICS:
            raise UsageError(
                f"unknown metric {args.metric!r}; choose from "
                f"{', '.join(sorted(harness.LEXICAL_METRICS))}"
            )
        handle = harness.lexical_scorer(args.metric)
        aspect = ASPECTS[0]  # lexical scorers ignore the aspect
        name = args.metric
    else:
        if not args.vocab:
            raise UsageError("--vocab is required with --model")
        tokens = Path(args.vocab).read_text(encoding="utf-8").splitlines()
        from .corpus import Vocab

        vocab = Vocab(token_to_id={t: i for i, t in enumerate(tokens)},
                      id_to_token=tuple(tokens))
        params, config, _ = sc.load_model(args.model, vocab.digest)
        stem = Path(args.model).stem
        aspect = next((a for a in ASPECTS if a.value in stem), ASPECTS[0])
        handle = harness.learned_scorer(stem, {aspect: (params, config)}, vocab)
        name = stem
    scores_b, scores_c = harness.score_corpus(handle, corpus, aspect)
    out_path = Path(_default(args.output, f"scores_{name}.jsonl"))
    with open(out_path, "w", encoding="utf-8") as f:
        for rec, sb, scv in zip(corpus, scores_b, scores_c):
            f.write(json.dumps({"id": rec.id, "score_b": sb, "score_c": scv}) + "\n")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_judge(args):
    corpus = _require_corpus(args)
    if not args.endpoint or not args.model:
        raise UsageError("--endpoint and --model are required")
    config = judge_mod.JudgeConfig(
        endpoint=args.endpoint,
        model=args.model,
        temperature=_default(args.temperature, 0.0),
        max_retries=_default(args.max_retries, 3),
        max_in_flight=_default(args.max_in_flight, 4),
        cache_dir=_default(args.cache_dir, ".judge_cache"),
    )
    client = judge_mod.JudgeClient(config)
    out = Path(_default(args.output_dir, "judge_out"))
    out.mkdir(parents=True, exist_ok=True)

    pairs = []
    for rec in corpus:
        pairs.append((rec.reference, rec.candidate_b))
        pairs.append((rec.reference, rec.candidate_c))
    verdicts = client.judge_many(pairs)

    files = {}
    for aspect in ASPECTS:
        files[aspect] = open(out / f"scores_{aspect.value}.jsonl", "w",
                             encoding="utf-8")
    try:
        for i, rec in enumerate(corpus):
            vb, vc = verdicts[2 * i], verdicts[2 * i + 1]
            for aspect in ASPECTS:
                if aspect is Aspect.QUALITY:
                    sb, scv = vb.overall(), vc.overall()
                else:
                    sb, scv = float(vb.scores[aspect]), float(vc.scores[aspect])
                files[aspect].write(
                    json.dumps({"id": rec.id, "score_b": sb, "score_c": scv}) + "\n"
                )
    finally:
        for f in files.values():
            f.close()
    _write_resolved_config(out, {
        "command": "judge", "corpus": args.corpus,
        "judge": dataclasses.asdict(config),
    })
    print(f"judged {len(corpus)} records -> {out}")
    return EXIT_OK


def cmd_evaluate(args):
    corpus = _require_corpus(args)
    mode = _default(args.mode, "discrete")
    epsilon = _default(args.epsilon, harness.DEFAULT_EPSILON)
    out = Path(_default(args.output_dir, "eval_out"))

    handles = []
    if args.metrics:
        for name in args.metrics.split(","):
            name = name.strip()
            if name not in harness.LEXICAL_METRICS:
                raise UsageError(
                    f"unknown metric {name!r}; choose from "
                    f"{', '.join(sorted(harness.LEXICAL_METRICS))}"
                )
            handles.append(harness.lexical_scorer(name))
    for spec_str in args.external:
        if "=" not in spec_str:
            raise UsageError("--external expects NAME=PATH")
        name, path = spec_str.split("=", 1)
        handles.append(harness.external_file_scorer(name, path))
    if args.model_dir:
        handles.append(_load_learned_handle(Path(args.model_dir), corpus))
    if not handles:
        raise UsageError("nothing to evaluate: give --metrics, --external "
                         "or --model-dir")

    results = []
    for handle in handles:
        for aspect in ASPECTS:
            results.append(
                harness.evaluate_metric(handle, corpus, aspect, mode=mode,
                                        epsilon=epsilon)
            )
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(harness.render_report(results, "text"),
                                    encoding="utf-8")
    (out / "report.json").write_text(harness.render_report(results, "json"),
                                     encoding="utf-8")
    _write_resolved_config(out, {
        "command": "evaluate", "corpus": args.corpus, "mode": mode,
        "epsilon": epsilon, "scorers": [h.name for h in handles],
    })
    print((out / "report.txt").read_text(encoding="utf-8"))
    return EXIT_OK


def cmd_report(args):
    rows = json.loads(Path(args.results).read_text(encoding="utf-8"))
    results = [
        harness.EvalResult(
            metric=r["metric"], kind=r["type"], aspect=Aspect(r["aspect"]),
            scores=harness.EvalScores(tau=r["tau"], rho=r["rho"],
                                      accuracy=r["accuracy"],
                                      macro_f1=r["macro_f1"]),
            mode=r["mode"], n=r["n"],
        )
        for r in rows
    ]
    print(harness.render_report(results, args.format), end="")
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "split": cmd_split,
    "train": cmd_train,
    "score": cmd_score,
    "judge": cmd_judge,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args = _merge_config(args)
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # argparse --help exits 0
        return int(e.code or 0)
    except (CorpusError, FileNotFoundError, KeyError, ValueError,
            json.JSONDecodeError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
