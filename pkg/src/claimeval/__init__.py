"""claimeval: reference-based comparative evaluation of generated patent claims."""

from .corpus import (
    ASPECTS,
    Aspect,
    Corpus,
    Quadruplet,
    Vocab,
    build_vocab,
    encode_pair,
    label_distribution,
    length_stats,
    load_corpus,
    parse_quadruplet_record,
    split_corpus,
    tokenize,
)
from .harness import (
    EvalResult,
    EvalScores,
    ScorerHandle,
    evaluate_metric,
    external_file_scorer,
    judge_scorer,
    learned_scorer,
    lexical_scorer,
    overall_quality,
    render_report,
    score_corpus,
)
from .scorer import ScorerConfig, forward, init_params, load_model, save_model, score
from .stats import (
    accuracy,
    kendall_tau_b,
    macro_f1,
    spearman_rho,
    three_way_labels,
)
from .trainer import (
    LossConfig,
    TrainConfig,
    TrainHistory,
    batch_loss,
    grad_check,
    pair_loss,
    train_aspect_model,
)

__version__ = "0.1.0"
