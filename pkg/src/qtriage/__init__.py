"""Question triage toolkit: ineffective-question identification for course forums."""

from .corpus import (
    Corpus,
    EFFECTIVE,
    EFFICACY_LABELS,
    FoldPlan,
    HierLabel,
    INEFFECTIVE,
    IRRELEVANT,
    LEAF_LABELS,
    LabelCounts,
    Question,
    RELEVANCE_LABELS,
    RELEVANT,
    RubricFlags,
    SyntheticSpec,
    cohen_kappa,
    corpus_stats,
    gen_synthetic,
    load_corpus,
    save_corpus,
    stratified_kfold,
)
from .features import (
    PipelineConfig,
    SparseVector,
    TokenizerConfig,
    Vocabulary,
    WeightingScheme,
    build_vocab,
    chi2_select,
    tokenize,
    vectorize,
)
from .hierarchy import (
    FLAT,
    SINGLE_PATH,
    StrategyModel,
    StrategySpec,
    predict_strategy,
    train_flat,
    train_single_path,
    train_strategy,
)
from .learners import Hyperparams, LearnerKind, TrainedLearner, predict, train

__version__ = "0.1.0"
