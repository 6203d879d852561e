"""Model persistence: a single versioned JSON document per trained strategy.

JSON float serialization round-trips exactly in Python, so a saved model
reproduces bit-identical predictions after loading.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import DataError
from .features import TokenizerConfig, Vocabulary, WeightingScheme
from .hierarchy import FLAT, FeaturePipeline, StrategyModel
from .learners import Hyperparams, LearnerKind, TrainedLearner

FORMAT_VERSION = 1

_INT_PARAMS = {"tree_feature", "tree_left", "tree_right", "tree_leaf", "tree_offsets"}
_SCALAR_PARAMS = {"fallback"}


def _learner_to_dict(m: TrainedLearner) -> dict:
    params: dict[str, Any] = {}
    for key, value in m.params.items():
        params[key] = value.tolist() if isinstance(value, np.ndarray) else value
    return {
        "kind": m.kind.value,
        "labels": list(m.labels),
        "dim": m.dim,
        "weighting": m.weighting.value,
        "hyper": {
            "nbm_alpha": m.hyper.nbm_alpha,
            "lg_lambda": m.hyper.lg_lambda,
            "lg_eta0": m.hyper.lg_eta0,
            "lg_epochs": m.hyper.lg_epochs,
            "lg_batch_size": m.hyper.lg_batch_size,
            "svm_lambda": m.hyper.svm_lambda,
            "svm_epochs": m.hyper.svm_epochs,
            "bdt_rounds": m.hyper.bdt_rounds,
            "bdt_max_depth": m.hyper.bdt_max_depth,
            "seed": m.hyper.seed,
        },
        "params": params,
    }


def _learner_from_dict(d: dict) -> TrainedLearner:
    params: dict[str, Any] = {}
    for key, value in d["params"].items():
        if key in _SCALAR_PARAMS:
            params[key] = value
        elif key in _INT_PARAMS:
            params[key] = np.array(value, dtype=np.int64)
        else:
            params[key] = np.array(value, dtype=np.float64)
    return TrainedLearner(
        kind=LearnerKind(d["kind"]),
        labels=tuple(d["labels"]),
        dim=d["dim"],
        params=params,
        hyper=Hyperparams(**d["hyper"]),
        weighting=WeightingScheme(d["weighting"]),
    )


def save_model(model: StrategyModel, path, metadata: dict | None = None) -> None:
    pipeline = model.pipeline
    doc = {
        "format_version": FORMAT_VERSION,
        "strategy": model.mode,
        "pipeline": {
            "tokenizer": {
                "lowercase": pipeline.tokenizer.lowercase,
                "ngram_max": pipeline.tokenizer.ngram_max,
                "strip_code_blocks": pipeline.tokenizer.strip_code_blocks,
                "stopwords": sorted(pipeline.tokenizer.stopwords),
            },
            "min_df": pipeline.min_df,
            "top_k_features": pipeline.top_k_features,
            "vocab": {
                "tokens": pipeline.vocab.tokens(),
                "doc_freq": pipeline.vocab.doc_freq.tolist(),
            },
        },
        "learners": {},
        "metadata": metadata or {},
    }
    if model.mode == FLAT:
        doc["learners"]["flat"] = _learner_to_dict(model.flat)
    else:
        doc["learners"]["level1"] = _learner_to_dict(model.level1)
        doc["learners"]["level2"] = _learner_to_dict(model.level2)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> tuple[StrategyModel, dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc.msg}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported model format version: {version!r}")

    p = doc["pipeline"]
    tokenizer = TokenizerConfig(
        lowercase=p["tokenizer"]["lowercase"],
        ngram_max=p["tokenizer"]["ngram_max"],
        strip_code_blocks=p["tokenizer"]["strip_code_blocks"],
        stopwords=frozenset(p["tokenizer"]["stopwords"]),
    )
    tokens = p["vocab"]["tokens"]
    vocab = Vocabulary(
        index={tok: i for i, tok in enumerate(tokens)},
        doc_freq=np.array(p["vocab"]["doc_freq"], dtype=np.int64),
    )
    pipeline = FeaturePipeline(
        tokenizer=tokenizer,
        vocab=vocab,
        min_df=p["min_df"],
        top_k_features=p["top_k_features"],
    )
    learners = doc["learners"]
    if doc["strategy"] == FLAT:
        model = StrategyModel(mode=FLAT, pipeline=pipeline,
                              flat=_learner_from_dict(learners["flat"]))
    else:
        model = StrategyModel(
            mode=doc["strategy"],
            pipeline=pipeline,
            level1=_learner_from_dict(learners["level1"]),
            level2=_learner_from_dict(learners["level2"]),
        )
    return model, doc.get("metadata", {})
