"""Flat and single-path composition of the four learners.

Flat: one classifier over the three leaf categories.
Single-path: a relevance classifier first; only questions it marks relevant
are passed to the efficacy classifier, so exactly one root-to-leaf path is
taken per question.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import (
    Corpus,
    EFFICACY_LABELS,
    IRRELEVANT,
    RELEVANT,
    RELEVANCE_LABELS,
    Question,
)
from .errors import DegenerateTrainingError, TrainingError
from .features import (
    PipelineConfig,
    SparseVector,
    TokenizerConfig,
    Vocabulary,
    build_vocab,
    chi2_select,
    restrict_vocab,
    tokenize,
    vectorize,
)
from .learners import Hyperparams, LearnerKind, TrainedLearner, predict as learner_predict, train

FLAT = "flat"
SINGLE_PATH = "single-path"


@dataclass(frozen=True)
class FeaturePipeline:
    """Fitted feature extraction shared by every learner in a strategy."""

    tokenizer: TokenizerConfig
    vocab: Vocabulary
    min_df: int
    top_k_features: int | None

    def vector(self, text: str, learner: TrainedLearner) -> SparseVector:
        return vectorize(tokenize(text, self.tokenizer), self.vocab, learner.weighting)


@dataclass
class StrategyModel:
    mode: str
    pipeline: FeaturePipeline
    flat: TrainedLearner | None = None
    level1: TrainedLearner | None = None
    level2: TrainedLearner | None = None

    def __post_init__(self) -> None:
        if self.mode == FLAT:
            if self.flat is None or self.level1 is not None or self.level2 is not None:
                raise ValueError("flat mode holds exactly one learner")
        elif self.mode == SINGLE_PATH:
            if self.flat is not None or self.level1 is None or self.level2 is None:
                raise ValueError("single-path mode holds exactly two learners")
            if IRRELEVANT in self.level2.labels:
                raise ValueError("level-2 label universe must exclude Irrelevant")
        else:
            raise ValueError(f"unknown strategy mode: {self.mode!r}")


@dataclass(frozen=True)
class StrategySpec:
    """Untrained description of a strategy run (algorithms + pipeline + knobs)."""

    mode: str
    kind: LearnerKind | None = None
    kind_level1: LearnerKind | None = None
    kind_level2: LearnerKind | None = None
    pipeline: PipelineConfig = PipelineConfig()
    hyper: Hyperparams = Hyperparams()

    def __post_init__(self) -> None:
        if self.mode == FLAT:
            if self.kind is None or self.kind_level1 or self.kind_level2:
                raise ValueError("flat spec needs exactly `kind`")
        elif self.mode == SINGLE_PATH:
            if self.kind is not None or not (self.kind_level1 and self.kind_level2):
                raise ValueError("single-path spec needs kind_level1 and kind_level2")
        else:
            raise ValueError(f"unknown strategy mode: {self.mode!r}")

    def algo_id(self) -> str:
        if self.mode == FLAT:
            return self.kind.value
        return f"{self.kind_level1.value}+{self.kind_level2.value}"


def _labeled(corpus: Corpus) -> list[Question]:
    return [q for q in corpus.questions if q.gold is not None]


def _fit_pipeline(questions: Sequence[Question], cfg: PipelineConfig,
                  leaf_labels: Sequence[str]) -> FeaturePipeline:
    docs = [tokenize(q.text, cfg.tokenizer) for q in questions]
    vocab = build_vocab(docs, min_df=cfg.min_df)
    if cfg.top_k_features is not None and vocab.size > 0:
        from .features import WeightingScheme

        vectors = [vectorize(doc, vocab, WeightingScheme.BINARY_PRESENCE) for doc in docs]
        selected = chi2_select(vectors, list(leaf_labels), cfg.top_k_features)
        vocab = restrict_vocab(vocab, selected)
    return FeaturePipeline(
        tokenizer=cfg.tokenizer,
        vocab=vocab,
        min_df=cfg.min_df,
        top_k_features=cfg.top_k_features,
    )


def _train_on(questions: Sequence[Question], labels: Sequence[str],
              kind: LearnerKind, pipeline: FeaturePipeline,
              cfg: PipelineConfig, h: Hyperparams) -> TrainedLearner:
    scheme = cfg.scheme_for(kind.value)
    X = [
        vectorize(tokenize(q.text, pipeline.tokenizer), pipeline.vocab, scheme)
        for q in questions
    ]
    return train(kind, X, list(labels), h, weighting=scheme)


def train_flat(corpus: Corpus, kind: LearnerKind, cfg: PipelineConfig,
               h: Hyperparams) -> StrategyModel:
    """One learner over the three leaf labels; vocabulary from training texts."""
    questions = _labeled(corpus)
    if not questions:
        raise TrainingError("no labeled questions to train on")
    leaves = [q.gold.leaf for q in questions]
    pipeline = _fit_pipeline(questions, cfg, leaves)
    learner = _train_on(questions, leaves, LearnerKind(kind), pipeline, cfg, h)
    return StrategyModel(mode=FLAT, pipeline=pipeline, flat=learner)


def train_single_path(corpus: Corpus, kind1: LearnerKind, kind2: LearnerKind,
                      cfg: PipelineConfig, h: Hyperparams) -> StrategyModel:
    """Relevance learner on everything, efficacy learner on the gold-relevant
    subset; both share one vocabulary built from all training texts."""
    questions = _labeled(corpus)
    if not questions:
        raise TrainingError("no labeled questions to train on")
    relevance = [q.gold.relevance for q in questions]
    if set(relevance) != set(RELEVANCE_LABELS):
        raise DegenerateTrainingError(
            "single-path training needs both relevance labels present"
        )
    relevant_qs = [q for q in questions if q.gold.relevance == RELEVANT]
    efficacy = [q.gold.efficacy for q in relevant_qs]
    if set(efficacy) != set(EFFICACY_LABELS):
        raise DegenerateTrainingError(
            "single-path training needs both efficacy labels among gold-relevant questions"
        )
    leaves = [q.gold.leaf for q in questions]
    pipeline = _fit_pipeline(questions, cfg, leaves)
    level1 = _train_on(questions, relevance, LearnerKind(kind1), pipeline, cfg, h)
    level2 = _train_on(relevant_qs, efficacy, LearnerKind(kind2), pipeline, cfg, h)
    return StrategyModel(mode=SINGLE_PATH, pipeline=pipeline,
                         level1=level1, level2=level2)


def train_strategy(corpus: Corpus, spec: StrategySpec) -> StrategyModel:
    if spec.mode == FLAT:
        return train_flat(corpus, spec.kind, spec.pipeline, spec.hyper)
    return train_single_path(corpus, spec.kind_level1, spec.kind_level2,
                             spec.pipeline, spec.hyper)


def predict_strategy(model: StrategyModel, text: str) -> tuple[str, dict]:
    """Classify one question; the trace records per-level scores and the path.

    Single-path never emits an efficacy label when level 1 says Irrelevant;
    the trace's level2_invoked flag makes the path auditable.
    """
    if model.mode == FLAT:
        leaf, scores = learner_predict(model.flat, model.pipeline.vector(text, model.flat))
        trace = {
            "strategy": FLAT,
            "levels": [{"level": "leaf", "predicted": leaf, "scores": scores}],
        }
        return leaf, trace

    rel, rel_scores = learner_predict(model.level1, model.pipeline.vector(text, model.level1))
    levels = [{"level": "relevance", "predicted": rel, "scores": rel_scores}]
    if rel == IRRELEVANT:
        leaf = IRRELEVANT
        trace = {"strategy": SINGLE_PATH, "levels": levels, "level2_invoked": False}
        return leaf, trace
    eff, eff_scores = learner_predict(model.level2, model.pipeline.vector(text, model.level2))
    levels.append({"level": "efficacy", "predicted": eff, "scores": eff_scores})
    leaf = eff
    assert leaf != IRRELEVANT
    trace = {"strategy": SINGLE_PATH, "levels": levels, "level2_invoked": True}
    return leaf, trace


def predict_efficacy(model: StrategyModel, text: str) -> tuple[str, dict[str, float]]:
    """Level-2 prediction regardless of the level-1 outcome (evaluation aid)."""
    if model.mode != SINGLE_PATH:
        raise ValueError("predict_efficacy needs a single-path model")
    return learner_predict(model.level2, model.pipeline.vector(text, model.level2))
