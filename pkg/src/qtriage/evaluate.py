"""Confusion matrices, class metrics, cross-validation and report rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .corpus import (
    Corpus,
    EFFECTIVE,
    EFFICACY_LABELS,
    INEFFECTIVE,
    IRRELEVANT,
    LEAF_LABELS,
    RELEVANCE_LABELS,
    RELEVANT,
    FoldPlan,
    stratified_kfold,
)
from .errors import DegenerateTrainingError, StratificationError
from .hierarchy import (
    FLAT,
    SINGLE_PATH,
    StrategyModel,
    StrategySpec,
    predict_efficacy,
    predict_strategy,
    train_strategy,
)

REPORT_VERSION = 1

GOLD_RELEVANT = "gold_relevant"
PREDICTED_RELEVANT = "predicted_relevant"


@dataclass(eq=False)
class ConfusionMatrix:
    """counts[i][j] = questions with gold label i predicted as label j."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValueError("confusion matrices must share a label universe")
        return ConfusionMatrix(self.labels, self.counts + other.counts)


def confusion(gold: Sequence[str], pred: Sequence[str],
              labels: Sequence[str]) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise ValueError(f"gold and pred must align: {len(gold)} vs {len(pred)}")
    labels = tuple(labels)
    lookup = {l: i for i, l in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, pred):
        if g not in lookup:
            raise ValueError(f"gold label {g!r} outside universe {labels}")
        if p not in lookup:
            raise ValueError(f"predicted label {p!r} outside universe {labels}")
        counts[lookup[g], lookup[p]] += 1
    return ConfusionMatrix(labels, counts)


def f_measure(precision: float | None, recall: float | None) -> float | None:
    """Harmonic mean; None when either side is undefined or both are zero."""
    if precision is None or recall is None:
        return None
    if precision + recall == 0:
        return None
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ClassMetrics:
    positive_label: str
    precision: float | None
    recall: float | None
    f1: float | None
    support: int


def class_metrics(cm: ConfusionMatrix, positive: str) -> ClassMetrics:
    """Precision/recall/F1 for one label; undefined values stay None, never 0."""
    if positive not in cm.labels:
        raise ValueError(f"label {positive!r} outside universe {cm.labels}")
    i = cm.labels.index(positive)
    tp = int(cm.counts[i, i])
    fp = int(cm.counts[:, i].sum()) - tp
    fn = int(cm.counts[i, :].sum()) - tp
    support = tp + fn
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / support if support > 0 else None
    return ClassMetrics(
        positive_label=positive,
        precision=precision,
        recall=recall,
        f1=f_measure(precision, recall),
        support=support,
    )


def overall_accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ValueError("cannot compute accuracy of an empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def majority_baseline(corpus: Corpus, level: str = "leaf") -> float:
    """Largest label share at the requested level of the hierarchy."""
    c = corpus.counts
    labeled = c.total - c.unlabeled
    if level == "leaf":
        if labeled == 0:
            raise ValueError("no labeled questions")
        return max(c.irrelevant, c.effective, c.ineffective) / labeled
    if level == "relevance":
        if labeled == 0:
            raise ValueError("no labeled questions")
        return max(c.irrelevant, c.relevant) / labeled
    if level == "efficacy":
        if c.relevant == 0:
            raise ValueError("no gold-relevant questions")
        return max(c.effective, c.ineffective) / c.relevant
    raise ValueError(f"unknown level {level!r}")


#: Designated positive label per report section, following the evaluation
#: focus: the ineffective class for leaf/efficacy sections, the relevant
#: class for the relevance section.
SECTION_POSITIVE = {
    "leaf": INEFFECTIVE,
    "level1": RELEVANT,
    "level2_gold": INEFFECTIVE,
    "level2_predicted": INEFFECTIVE,
}

_SECTION_ORDER = ("leaf", "level1", "level2_gold", "level2_predicted")


@dataclass(eq=False)
class SectionReport:
    name: str
    labels: tuple[str, ...]
    positive_label: str
    folds: list[ConfusionMatrix]
    majority: float | None
    intruders: list[int] | None = None  # per fold; level2_predicted only

    @property
    def pooled(self) -> ConfusionMatrix:
        counts = np.zeros((len(self.labels), len(self.labels)), dtype=np.int64)
        for cm in self.folds:
            counts += cm.counts
        return ConfusionMatrix(self.labels, counts)

    def pooled_metrics(self) -> ClassMetrics:
        return class_metrics(self.pooled, self.positive_label)

    def pooled_accuracy(self) -> float | None:
        pooled = self.pooled
        return overall_accuracy(pooled) if pooled.total > 0 else None

    def fold_accuracies(self) -> list[float | None]:
        return [overall_accuracy(cm) if cm.total > 0 else None for cm in self.folds]


def _mean_std(values: list[float | None]) -> tuple[float | None, float | None]:
    present = [v for v in values if v is not None]
    if not present:
        return None, None
    mean = sum(present) / len(present)
    var = sum((v - mean) ** 2 for v in present) / len(present)
    return mean, math.sqrt(var)


@dataclass(eq=False)
class EvalReport:
    strategy: str
    algo: str
    k: int
    seed: int
    corpus_digest: str
    config_digest: str
    sections: dict[str, SectionReport]
    level2_eval: str | None = None

    def primary_section(self) -> SectionReport:
        if self.strategy == FLAT:
            return self.sections["leaf"]
        key = "level2_gold" if self.level2_eval == GOLD_RELEVANT else "level2_predicted"
        return self.sections[key]

    def to_dict(self) -> dict:
        out = {
            "report_version": REPORT_VERSION,
            "strategy": self.strategy,
            "algo": self.algo,
            "k": self.k,
            "seed": self.seed,
            "corpus_digest": self.corpus_digest,
            "config_digest": self.config_digest,
            "level2_eval": self.level2_eval,
            "sections": {},
        }
        for name in _SECTION_ORDER:
            if name not in self.sections:
                continue
            s = self.sections[name]
            pooled = s.pooled
            per_label = {}
            for label in s.labels:
                m = class_metrics(pooled, label)
                per_label[label] = {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
            fold_items = []
            for i, cm in enumerate(s.folds):
                fm = class_metrics(cm, s.positive_label)
                fold_items.append({
                    "fold": i,
                    "confusion": cm.counts.tolist(),
                    "accuracy": overall_accuracy(cm) if cm.total > 0 else None,
                    "positive": {
                        "precision": fm.precision,
                        "recall": fm.recall,
                        "f1": fm.f1,
                        "support": fm.support,
                    },
                })
            accs = s.fold_accuracies()
            acc_mean, acc_std = _mean_std(accs)
            entry = {
                "labels": list(s.labels),
                "positive_label": s.positive_label,
                "pooled_confusion": pooled.counts.tolist(),
                "pooled_accuracy": s.pooled_accuracy(),
                "majority_baseline": s.majority,
                "per_label": per_label,
                "folds": fold_items,
                "fold_accuracy_mean": acc_mean,
                "fold_accuracy_std": acc_std,
            }
            if s.intruders is not None:
                entry["intruders_per_fold"] = list(s.intruders)
                entry["intruder_total"] = int(sum(s.intruders))
            out["sections"][name] = entry
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        if d.get("report_version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version: {d.get('report_version')!r}")
        sections = {}
        for name, entry in d["sections"].items():
            labels = tuple(entry["labels"])
            folds = [
                ConfusionMatrix(labels, np.array(f["confusion"], dtype=np.int64))
                for f in entry["folds"]
            ]
            sections[name] = SectionReport(
                name=name,
                labels=labels,
                positive_label=entry["positive_label"],
                folds=folds,
                majority=entry["majority_baseline"],
                intruders=entry.get("intruders_per_fold"),
            )
        return cls(
            strategy=d["strategy"],
            algo=d["algo"],
            k=d["k"],
            seed=d["seed"],
            corpus_digest=d["corpus_digest"],
            config_digest=d["config_digest"],
            sections=sections,
            level2_eval=d.get("level2_eval"),
        )


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def train_fold(corpus: Corpus, spec: StrategySpec, plan: FoldPlan,
               fold: int, seed: int) -> StrategyModel:
    """Train on every fold except `fold`; the vocabulary is rebuilt from the
    training questions only, so held-out text cannot leak into the model."""
    train_idx = plan.train_indices(fold)
    sub = Corpus(tuple(corpus.questions[i] for i in train_idx))
    fold_spec = replace(spec, hyper=replace(spec.hyper, seed=fold_seed(seed, fold)))
    try:
        return train_strategy(sub, fold_spec)
    except DegenerateTrainingError as exc:
        raise StratificationError(f"fold {fold}: {exc}") from exc


def cross_validate(corpus: Corpus, spec: StrategySpec, k: int, seed: int,
                   level2_eval: str = GOLD_RELEVANT,
                   config_digest: str = "") -> EvalReport:
    """Stratified k-fold evaluation of one strategy.

    Flat reports a single 3-way leaf section. Single-path reports the
    relevance section over every test question plus both level-2 framings:
    gold-relevant questions scored directly by the efficacy learner, and
    predicted-relevant questions scored against gold efficacy with
    gold-irrelevant intruders tallied separately. `level2_eval` selects which
    framing counts as the headline section; both are always present.
    """
    if level2_eval not in (GOLD_RELEVANT, PREDICTED_RELEVANT):
        raise ValueError(f"unknown level2_eval {level2_eval!r}")
    plan = stratified_kfold(corpus, k, seed)

    if spec.mode == FLAT:
        sections = {
            "leaf": SectionReport("leaf", LEAF_LABELS, SECTION_POSITIVE["leaf"],
                                  [], majority_baseline(corpus, "leaf")),
        }
    else:
        sections = {
            "level1": SectionReport("level1", RELEVANCE_LABELS,
                                    SECTION_POSITIVE["level1"], [],
                                    majority_baseline(corpus, "relevance")),
            "level2_gold": SectionReport("level2_gold", EFFICACY_LABELS,
                                         SECTION_POSITIVE["level2_gold"], [],
                                         majority_baseline(corpus, "efficacy")),
            "level2_predicted": SectionReport("level2_predicted", EFFICACY_LABELS,
                                              SECTION_POSITIVE["level2_predicted"], [],
                                              majority_baseline(corpus, "efficacy"),
                                              intruders=[]),
        }

    for fold in range(k):
        model = train_fold(corpus, spec, plan, fold, seed)
        test_idx = plan.fold_indices(fold)
        questions = [corpus.questions[i] for i in test_idx]
        if spec.mode == FLAT:
            gold = [q.gold.leaf for q in questions]
            pred = [predict_strategy(model, q.text)[0] for q in questions]
            sections["leaf"].folds.append(confusion(gold, pred, LEAF_LABELS))
            continue

        rel_gold, rel_pred = [], []
        eff_gold_direct, eff_pred_direct = [], []
        eff_gold_routed, eff_pred_routed = [], []
        intruders = 0
        for q in questions:
            leaf, trace = predict_strategy(model, q.text)
            predicted_rel = trace["levels"][0]["predicted"]
            rel_gold.append(q.gold.relevance)
            rel_pred.append(predicted_rel)
            if q.gold.relevance == RELEVANT:
                eff_gold_direct.append(q.gold.efficacy)
                eff_pred_direct.append(predict_efficacy(model, q.text)[0])
            if predicted_rel == RELEVANT:
                if q.gold.relevance == RELEVANT:
                    eff_gold_routed.append(q.gold.efficacy)
                    eff_pred_routed.append(leaf)
                else:
                    intruders += 1
        sections["level1"].folds.append(
            confusion(rel_gold, rel_pred, RELEVANCE_LABELS))
        sections["level2_gold"].folds.append(
            confusion(eff_gold_direct, eff_pred_direct, EFFICACY_LABELS))
        sections["level2_predicted"].folds.append(
            confusion(eff_gold_routed, eff_pred_routed, EFFICACY_LABELS))
        sections["level2_predicted"].intruders.append(intruders)

    return EvalReport(
        strategy=spec.mode,
        algo=spec.algo_id(),
        k=k,
        seed=seed,
        corpus_digest=corpus.digest(),
        config_digest=config_digest,
        sections=sections,
        level2_eval=level2_eval if spec.mode == SINGLE_PATH else None,
    )


_SECTION_TITLES = {
    "leaf": "Flat leaf classification",
    "level1": "Relevance classification (level 1)",
    "level2_gold": "Efficacy classification on gold-relevant questions (level 2)",
    "level2_predicted": "Efficacy classification on predicted-relevant questions (level 2)",
}


def _fmt(v: float | None) -> str:
    return f"{v:.3f}" if v is not None else "--"


def render_report(reports: EvalReport | Sequence[EvalReport],
                  format: str = "text_table") -> str:
    """Render one or more reports; rows within a section sort by F-measure
    descending (undefined last)."""
    if isinstance(reports, EvalReport):
        reports = [reports]
    reports = list(reports)
    if format == "json":
        payload = [r.to_dict() for r in reports]
        return json.dumps(payload[0] if len(payload) == 1 else payload,
                          sort_keys=True, indent=2) + "\n"
    if format == "csv":
        return _render_csv(reports)
    if format != "text_table":
        raise ValueError(f"unknown report format {format!r}")

    lines: list[str] = []
    for name in _SECTION_ORDER:
        rows = []
        for r in reports:
            if name not in r.sections:
                continue
            s = r.sections[name]
            m = s.pooled_metrics()
            rows.append((r.algo, s.pooled_accuracy(), m, s))
        if not rows:
            continue
        rows.sort(key=lambda item: -(item[2].f1 if item[2].f1 is not None else -1.0))
        positive = rows[0][3].positive_label
        lines.append(f"== {_SECTION_TITLES[name]} (positive label: {positive}) ==")
        lines.append(f"{'Algorithm':<12}{'Accuracy':>10}{'Recall':>10}"
                     f"{'Precision':>11}{'F-Measure':>11}")
        for algo, acc, m, s in rows:
            lines.append(f"{algo:<12}{_fmt(acc):>10}{_fmt(m.recall):>10}"
                         f"{_fmt(m.precision):>11}{_fmt(m.f1):>11}")
        majority = rows[0][3].majority
        if majority is not None:
            lines.append(f"(majority-class baseline accuracy: {_fmt(majority)})")
        intruder_rows = [(algo, s) for algo, _, _, s in rows if s.intruders is not None]
        for algo, s in intruder_rows:
            lines.append(f"({algo}: {sum(s.intruders)} gold-irrelevant intruders "
                         "among predicted-relevant)")
        lines.append("")
    return "\n".join(lines)


def _render_csv(reports: list[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([
        "algo", "strategy", "k", "seed", "level2_eval", "corpus_digest",
        "config_digest", "section", "scope", "labels", "positive_label",
        "accuracy", "precision", "recall", "f1", "support",
        "majority_baseline", "intruders", "confusion",
    ])
    for r in reports:
        for name in _SECTION_ORDER:
            if name not in r.sections:
                continue
            s = r.sections[name]
            scopes = [("pooled", s.pooled, None)]
            scopes += [(f"fold{i}", cm,
                        s.intruders[i] if s.intruders is not None else None)
                       for i, cm in enumerate(s.folds)]
            for scope, cm, intr in scopes:
                if scope == "pooled" and s.intruders is not None:
                    intr = sum(s.intruders)
                m = class_metrics(cm, s.positive_label)
                acc = overall_accuracy(cm) if cm.total > 0 else None
                writer.writerow([
                    r.algo, r.strategy, r.k, r.seed, r.level2_eval or "",
                    r.corpus_digest, r.config_digest, name, scope,
                    json.dumps(list(s.labels)), s.positive_label,
                    acc, m.precision, m.recall, m.f1, m.support,
                    s.majority, intr if intr is not None else "",
                    json.dumps(cm.counts.tolist()),
                ])
    return buf.getvalue()
