"""Run configuration: JSON config file + CLI overrides, validated up front."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .errors import ConfigError
from .features import (
    DEFAULT_WEIGHTING,
    PipelineConfig,
    TokenizerConfig,
    WeightingScheme,
    load_stopwords,
)
from .hierarchy import FLAT, SINGLE_PATH, StrategySpec
from .learners import Hyperparams, LearnerKind

_ALGOS = ("nbm", "lg", "svm", "bdt")
_HYPER_KEYS = {
    "nbm_alpha", "lg_lambda", "lg_eta0", "lg_epochs", "lg_batch_size",
    "svm_lambda", "svm_epochs", "bdt_rounds", "bdt_max_depth",
}
_TOP_KEYS = {
    "strategy", "algo", "algo_level1", "algo_level2", "tokenizer", "weighting",
    "hyperparams", "folds", "seed", "min_df", "top_k_features", "level2_eval",
    "paths",
}
_TOKENIZER_KEYS = {"lowercase", "ngram_max", "strip_code_blocks", "stopwords_path"}
_PATH_KEYS = {"corpus", "model_out", "report_out"}


@dataclass(frozen=True)
class RunConfig:
    strategy: str
    algo: str | None
    algo_level1: str | None
    algo_level2: str | None
    tokenizer: TokenizerConfig
    weighting: dict[str, WeightingScheme]
    hyper: Hyperparams
    folds: int
    seed: int
    min_df: int
    top_k_features: int | None
    level2_eval: str
    corpus_path: str | None
    model_path: str | None
    report_path: str | None

    def algo_kinds(self) -> tuple[LearnerKind, ...]:
        if self.strategy == FLAT:
            return (LearnerKind(self.algo),)
        return (LearnerKind(self.algo_level1), LearnerKind(self.algo_level2))

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            tokenizer=self.tokenizer,
            min_df=self.min_df,
            weighting=dict(self.weighting),
            top_k_features=self.top_k_features,
        )

    def strategy_spec(self) -> StrategySpec:
        if self.strategy == FLAT:
            return StrategySpec(
                mode=FLAT,
                kind=LearnerKind(self.algo),
                pipeline=self.pipeline(),
                hyper=self.hyper,
            )
        return StrategySpec(
            mode=SINGLE_PATH,
            kind_level1=LearnerKind(self.algo_level1),
            kind_level2=LearnerKind(self.algo_level2),
            pipeline=self.pipeline(),
            hyper=self.hyper,
        )

    def canonical(self) -> dict:
        """Echo of every setting that affects results (paths excluded)."""
        return {
            "strategy": self.strategy,
            "algo": self.algo,
            "algo_level1": self.algo_level1,
            "algo_level2": self.algo_level2,
            "tokenizer": {
                "lowercase": self.tokenizer.lowercase,
                "ngram_max": self.tokenizer.ngram_max,
                "strip_code_blocks": self.tokenizer.strip_code_blocks,
                "stopwords": sorted(self.tokenizer.stopwords),
            },
            "weighting": {k: v.value for k, v in sorted(self.weighting.items())},
            "hyperparams": {
                "nbm_alpha": self.hyper.nbm_alpha,
                "lg_lambda": self.hyper.lg_lambda,
                "lg_eta0": self.hyper.lg_eta0,
                "lg_epochs": self.hyper.lg_epochs,
                "lg_batch_size": self.hyper.lg_batch_size,
                "svm_lambda": self.hyper.svm_lambda,
                "svm_epochs": self.hyper.svm_epochs,
                "bdt_rounds": self.hyper.bdt_rounds,
                "bdt_max_depth": self.hyper.bdt_max_depth,
            },
            "folds": self.folds,
            "seed": self.seed,
            "min_df": self.min_df,
            "top_k_features": self.top_k_features,
            "level2_eval": self.level2_eval,
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _check_algo(name: object, field: str) -> str:
    _require(isinstance(name, str) and name in _ALGOS,
             f"{field} must be one of {{{', '.join(_ALGOS)}}}, got {name!r}")
    return name


def load_run_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a config file, then apply CLI overrides."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from None
        _require(isinstance(raw, dict), "config root must be a JSON object")
    unknown = sorted(set(raw) - _TOP_KEYS)
    _require(not unknown, f"unknown config keys: {unknown}")

    merged = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    strategy = merged.get("strategy")
    _require(strategy in (FLAT, SINGLE_PATH),
             f"strategy must be '{FLAT}' or '{SINGLE_PATH}', got {strategy!r}")
    algo = algo_level1 = algo_level2 = None
    if strategy == FLAT:
        _require("algo" in merged, "flat strategy requires 'algo'")
        _require(merged.get("algo_level1") is None and merged.get("algo_level2") is None,
                 "algo_level1/algo_level2 are only valid for single-path")
        algo = _check_algo(merged["algo"], "algo")
    else:
        _require(merged.get("algo") is None,
                 "'algo' is only valid for the flat strategy")
        _require("algo_level1" in merged and "algo_level2" in merged,
                 "single-path strategy requires 'algo_level1' and 'algo_level2'")
        algo_level1 = _check_algo(merged["algo_level1"], "algo_level1")
        algo_level2 = _check_algo(merged["algo_level2"], "algo_level2")

    _require("seed" in merged, "config requires an explicit 'seed'")
    seed = merged["seed"]
    _require(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
             f"seed must be a non-negative integer, got {seed!r}")
    folds = merged.get("folds", 10)
    _require(isinstance(folds, int) and not isinstance(folds, bool) and folds >= 2,
             f"folds must be an integer >= 2, got {folds!r}")
    min_df = merged.get("min_df", 2)
    _require(isinstance(min_df, int) and min_df >= 1,
             f"min_df must be an integer >= 1, got {min_df!r}")
    top_k = merged.get("top_k_features")
    if top_k is not None:
        _require(isinstance(top_k, int) and top_k >= 1,
                 f"top_k_features must be an integer >= 1, got {top_k!r}")
    level2_eval = merged.get("level2_eval", "gold_relevant")
    _require(level2_eval in ("gold_relevant", "predicted_relevant"),
             f"level2_eval must be 'gold_relevant' or 'predicted_relevant', got {level2_eval!r}")

    tok_raw = merged.get("tokenizer", {})
    _require(isinstance(tok_raw, dict), "'tokenizer' must be an object")
    unknown = sorted(set(tok_raw) - _TOKENIZER_KEYS)
    _require(not unknown, f"unknown tokenizer keys: {unknown}")
    stopwords = frozenset()
    if tok_raw.get("stopwords_path"):
        try:
            stopwords = load_stopwords(tok_raw["stopwords_path"])
        except OSError as exc:
            raise ConfigError(f"cannot read stopword list: {exc}") from None
    try:
        tokenizer = TokenizerConfig(
            lowercase=bool(tok_raw.get("lowercase", True)),
            ngram_max=tok_raw.get("ngram_max", 1),
            strip_code_blocks=bool(tok_raw.get("strip_code_blocks", False)),
            stopwords=stopwords,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    weighting = dict(DEFAULT_WEIGHTING)
    w_raw = merged.get("weighting", {})
    _require(isinstance(w_raw, dict), "'weighting' must be an object")
    for kind, scheme in w_raw.items():
        _require(kind in _ALGOS, f"weighting key must be an algorithm name, got {kind!r}")
        try:
            weighting[kind] = WeightingScheme(scheme)
        except ValueError:
            valid = ", ".join(s.value for s in WeightingScheme)
            raise ConfigError(
                f"weighting[{kind}] must be one of {{{valid}}}, got {scheme!r}"
            ) from None

    h_raw = merged.get("hyperparams", {})
    _require(isinstance(h_raw, dict), "'hyperparams' must be an object")
    unknown = sorted(set(h_raw) - _HYPER_KEYS)
    _require(not unknown, f"unknown hyperparameter keys: {unknown}")
    try:
        hyper = Hyperparams(seed=seed, **h_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad hyperparameters: {exc}") from None

    paths = merged.get("paths", {})
    _require(isinstance(paths, dict), "'paths' must be an object")
    unknown = sorted(set(paths) - _PATH_KEYS)
    _require(not unknown, f"unknown path keys: {unknown}")

    return RunConfig(
        strategy=strategy,
        algo=algo,
        algo_level1=algo_level1,
        algo_level2=algo_level2,
        tokenizer=tokenizer,
        weighting=weighting,
        hyper=hyper,
        folds=folds,
        seed=seed,
        min_df=min_df,
        top_k_features=top_k,
        level2_eval=level2_eval,
        corpus_path=paths.get("corpus"),
        model_path=paths.get("model_out"),
        report_path=paths.get("report_out"),
    )
