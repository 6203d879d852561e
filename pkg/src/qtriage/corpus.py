"""Corpus ingestion, label schema, fold construction, agreement, synthetic data.

A corpus is an ordered collection of forum questions. Labels are
hierarchical: level 1 decides learning relevance, level 2 (present only for
relevant questions) decides efficacy. The three leaf categories are
Irrelevant, Effective and Ineffective.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, StratificationError, ValidationError

IRRELEVANT = "Irrelevant"
RELEVANT = "Relevant"
EFFECTIVE = "Effective"
INEFFECTIVE = "Ineffective"

#: The three terminal categories, in lexicographic order.
LEAF_LABELS = (EFFECTIVE, INEFFECTIVE, IRRELEVANT)
#: Level-1 label universe, in lexicographic order.
RELEVANCE_LABELS = (IRRELEVANT, RELEVANT)
#: Level-2 label universe, in lexicographic order.
EFFICACY_LABELS = (EFFECTIVE, INEFFECTIVE)

_KNOWN_RECORD_KEYS = {"id", "text", "label", "rubrics", "source"}


@dataclass(frozen=True)
class HierLabel:
    """Two-level label: relevance at level 1, efficacy only when relevant."""

    relevance: str
    efficacy: str | None = None

    def __post_init__(self) -> None:
        if self.relevance not in RELEVANCE_LABELS:
            raise ValidationError(f"unknown relevance label: {self.relevance!r}")
        if self.relevance == RELEVANT:
            if self.efficacy not in EFFICACY_LABELS:
                raise ValidationError(
                    f"relevant question needs an efficacy label, got {self.efficacy!r}"
                )
        elif self.efficacy is not None:
            raise ValidationError(
                f"efficacy={self.efficacy!r} not allowed when relevance is {IRRELEVANT!r}"
            )

    @property
    def leaf(self) -> str:
        return self.efficacy if self.relevance == RELEVANT else IRRELEVANT

    @classmethod
    def from_leaf(cls, leaf: str) -> "HierLabel":
        if leaf == IRRELEVANT:
            return cls(IRRELEVANT)
        if leaf in EFFICACY_LABELS:
            return cls(RELEVANT, leaf)
        raise ValidationError(f"unknown leaf label: {leaf!r}")


@dataclass(frozen=True)
class RubricFlags:
    """Annotation rubric flags; every combination is storable."""

    has_prior_effort: bool
    asks_direct_answer: bool
    is_specific: bool


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    gold: HierLabel | None = None
    rubrics: RubricFlags | None = None
    source_tag: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("question id must be non-empty")


@dataclass(frozen=True)
class LabelCounts:
    total: int
    irrelevant: int
    relevant: int
    effective: int
    ineffective: int
    unlabeled: int

    def __post_init__(self) -> None:
        if self.relevant != self.effective + self.ineffective:
            raise ValidationError("relevant count must equal effective + ineffective")
        if self.total != self.irrelevant + self.relevant + self.unlabeled:
            raise ValidationError("total must equal irrelevant + relevant + unlabeled")

    def as_dict(self) -> dict[str, int]:
        return {
            "total": self.total,
            "irrelevant": self.irrelevant,
            "relevant": self.relevant,
            "effective": self.effective,
            "ineffective": self.ineffective,
            "unlabeled": self.unlabeled,
        }


def _count_labels(questions: Sequence[Question]) -> LabelCounts:
    irrelevant = relevant = effective = ineffective = unlabeled = 0
    for q in questions:
        if q.gold is None:
            unlabeled += 1
        elif q.gold.leaf == IRRELEVANT:
            irrelevant += 1
        elif q.gold.leaf == EFFECTIVE:
            relevant += 1
            effective += 1
        else:
            relevant += 1
            ineffective += 1
    return LabelCounts(
        total=len(questions),
        irrelevant=irrelevant,
        relevant=relevant,
        effective=effective,
        ineffective=ineffective,
        unlabeled=unlabeled,
    )


@dataclass(frozen=True)
class Corpus:
    """Ordered, immutable question collection with cached label counts."""

    questions: tuple[Question, ...]
    counts: LabelCounts = field(init=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for q in self.questions:
            if q.id in seen:
                raise ValidationError(f"duplicate question id: {q.id!r}")
            seen.add(q.id)
        object.__setattr__(self, "counts", _count_labels(self.questions))

    def __len__(self) -> int:
        return len(self.questions)

    def __iter__(self):
        return iter(self.questions)

    def labeled_indices(self) -> list[int]:
        return [i for i, q in enumerate(self.questions) if q.gold is not None]

    def digest(self) -> str:
        """Stable content digest over ids, texts and labels."""
        import hashlib

        h = hashlib.sha256()
        for q in self.questions:
            h.update(
                json.dumps(_question_to_record(q), sort_keys=True, ensure_ascii=False).encode(
                    "utf-8"
                )
            )
            h.update(b"\n")
        return h.hexdigest()


def _label_from_record(raw: object, where: str) -> HierLabel:
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: 'label' must be an object")
    relevance = raw.get("relevance")
    efficacy = raw.get("efficacy")
    if relevance == "irrelevant":
        if efficacy is not None:
            raise ValidationError(
                f"{where}: efficacy given for an irrelevant question"
            )
        return HierLabel(IRRELEVANT)
    if relevance == "relevant":
        if efficacy == "effective":
            return HierLabel(RELEVANT, EFFECTIVE)
        if efficacy == "ineffective":
            return HierLabel(RELEVANT, INEFFECTIVE)
        raise ValidationError(
            f"{where}: relevant question needs efficacy 'effective' or 'ineffective', "
            f"got {efficacy!r}"
        )
    raise ValidationError(f"{where}: unknown relevance value {relevance!r}")


def _question_from_record(rec: dict, where: str) -> Question:
    unknown = sorted(set(rec) - _KNOWN_RECORD_KEYS)
    if unknown:
        warnings.warn(f"{where}: ignoring unknown keys {unknown}", stacklevel=3)
    qid = rec.get("id")
    if not isinstance(qid, str) or not qid:
        raise ParseError(f"{where}: 'id' must be a non-empty string")
    text = rec.get("text")
    if not isinstance(text, str):
        raise ParseError(f"{where}: 'text' must be a string")
    gold = _label_from_record(rec["label"], where) if rec.get("label") is not None else None
    rubrics = None
    if rec.get("rubrics") is not None:
        raw = rec["rubrics"]
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: 'rubrics' must be an object")
        try:
            rubrics = RubricFlags(
                has_prior_effort=bool(raw["prior_effort"]),
                asks_direct_answer=bool(raw["direct_answer"]),
                is_specific=bool(raw["specific"]),
            )
        except KeyError as exc:
            raise ParseError(f"{where}: rubrics missing key {exc}") from None
    return Question(
        id=qid,
        text=text,
        gold=gold,
        rubrics=rubrics,
        source_tag=rec.get("source"),
    )


def _question_to_record(q: Question) -> dict:
    rec: dict = {"id": q.id, "text": q.text}
    if q.gold is not None:
        label: dict = {"relevance": q.gold.relevance.lower()}
        if q.gold.efficacy is not None:
            label["efficacy"] = q.gold.efficacy.lower()
        rec["label"] = label
    if q.rubrics is not None:
        rec["rubrics"] = {
            "prior_effort": q.rubrics.has_prior_effort,
            "direct_answer": q.rubrics.asks_direct_answer,
            "specific": q.rubrics.is_specific,
        }
    if q.source_tag is not None:
        rec["source"] = q.source_tag
    return rec


def load_corpus(path, format: str = "jsonl") -> Corpus:
    """Load a JSONL corpus file, preserving record order.

    Raises ParseError (with line number) on malformed lines and
    ValidationError on duplicate ids or inconsistent labels.
    """
    if format != "jsonl":
        raise ValidationError(f"unsupported corpus format: {format!r}")
    questions: list[Question] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise ParseError(f"{where}: record must be a JSON object")
            questions.append(_question_from_record(rec, where))
    return Corpus(tuple(questions))


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in corpus.questions:
            fh.write(json.dumps(_question_to_record(q), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def corpus_stats(corpus: Corpus) -> LabelCounts:
    return corpus.counts


@dataclass(frozen=True)
class FoldPlan:
    """Stratified fold assignment; -1 marks unlabeled questions."""

    k: int
    assignments: np.ndarray

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero((self.assignments >= 0) & (self.assignments != fold))


def stratified_kfold(
    corpus: Corpus, k: int, seed: int, allow_sparse: bool = False
) -> FoldPlan:
    """Assign labeled questions to k folds, stratified by leaf label.

    Deterministic given (corpus, k, seed). Within each label the members are
    shuffled by a seeded generator and dealt round-robin, so per-label fold
    counts differ by at most one.
    """
    if k < 2:
        raise ValueError(f"fold count must be >= 2, got {k}")
    by_label: dict[str, list[int]] = {}
    for i, q in enumerate(corpus.questions):
        if q.gold is not None:
            by_label.setdefault(q.gold.leaf, []).append(i)
    if not allow_sparse:
        for label in sorted(by_label):
            if len(by_label[label]) < k:
                raise StratificationError(
                    f"label {label!r} has {len(by_label[label])} members, fewer than k={k} "
                    "(pass allow_sparse=True to permit empty folds)"
                )
    rng = np.random.Generator(np.random.PCG64(seed))
    assignments = np.full(len(corpus.questions), -1, dtype=np.int64)
    start = 0
    for label in sorted(by_label):
        members = np.array(by_label[label], dtype=np.int64)
        rng.shuffle(members)
        for j, idx in enumerate(members):
            assignments[idx] = (start + j) % k
        # rotate the dealing start so overall fold sizes stay balanced
        start = (start + len(members)) % k
    return FoldPlan(k=k, assignments=assignments)


def cohen_kappa(a: Sequence, b: Sequence) -> float:
    """Chance-corrected agreement between two raters over the same items."""
    if len(a) != len(b):
        raise ValueError(f"rating lists differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise ValueError("rating lists must be non-empty")
    agree = sum(1 for x, y in zip(a, b) if x == y)
    p_o = agree / n
    if p_o == 1.0:
        return 1.0
    count_a = Counter(a)
    count_b = Counter(b)
    p_e = sum(count_a[l] * count_b.get(l, 0) for l in count_a) / (n * n)
    if p_e == 1.0:
        raise ValueError("degenerate marginals: chance agreement is 1 but observed is not")
    return (p_o - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a label-conditional multinomial corpus.

    separation=1 gives disjoint per-label token pools; separation=0 collapses
    everything onto a single shared pool.
    """

    counts: Mapping[str, int]
    vocab_size: int = 150
    separation: float = 1.0
    doc_len_range: tuple[int, int] = (8, 25)

    def __post_init__(self) -> None:
        for label, n in self.counts.items():
            if label not in LEAF_LABELS:
                raise ValueError(f"unknown leaf label in counts: {label!r}")
            if n < 0:
                raise ValueError(f"count for {label!r} must be >= 0")
        if not 0.0 <= self.separation <= 1.0:
            raise ValueError("separation must lie in [0, 1]")
        if self.vocab_size < len([l for l in self.counts if self.counts[l] > 0]):
            raise ValueError("vocab_size smaller than the number of labels used")
        lo, hi = self.doc_len_range
        if not (1 <= lo <= hi):
            raise ValueError("doc_len_range must satisfy 1 <= lo <= hi")


def synthetic_token_pools(spec: SyntheticSpec) -> dict[str, list[str]]:
    """The dedicated token block of each label (contiguous vocabulary slices)."""
    labels = [l for l in LEAF_LABELS if spec.counts.get(l, 0) > 0]
    tokens = [f"w{i:05d}" for i in range(spec.vocab_size)]
    pools: dict[str, list[str]] = {}
    base = spec.vocab_size // len(labels)
    extra = spec.vocab_size % len(labels)
    lo = 0
    for j, label in enumerate(labels):
        size = base + (1 if j < extra else 0)
        pools[label] = tokens[lo : lo + size]
        lo += size
    return pools


def gen_synthetic(spec: SyntheticSpec, seed: int) -> Corpus:
    """Sample a gold-labeled corpus from label-conditional multinomials.

    Deterministic given (spec, seed): same inputs produce byte-identical
    corpora when serialized.
    """
    labels = [l for l in LEAF_LABELS if spec.counts.get(l, 0) > 0]
    rng = np.random.Generator(np.random.PCG64(seed))
    pools = synthetic_token_pools(spec)
    vocab = np.array([f"w{i:05d}" for i in range(spec.vocab_size)])

    # per-label token distribution: separation * own block + (1-sep) * shared uniform
    dists: dict[str, np.ndarray] = {}
    for label in labels:
        p = np.full(spec.vocab_size, (1.0 - spec.separation) / spec.vocab_size)
        block = [int(t[1:]) for t in pools[label]]
        p[block] += spec.separation / len(block)
        dists[label] = p / p.sum()

    leaf_seq = [label for label in labels for _ in range(spec.counts[label])]
    order = rng.permutation(len(leaf_seq))
    lo, hi = spec.doc_len_range
    questions = []
    for pos, src in enumerate(order):
        leaf = leaf_seq[src]
        length = int(rng.integers(lo, hi + 1))
        toks = rng.choice(spec.vocab_size, size=length, p=dists[leaf])
        questions.append(
            Question(
                id=f"syn-{pos:05d}",
                text=" ".join(vocab[toks]),
                gold=HierLabel.from_leaf(leaf),
                source_tag="synthetic",
            )
        )
    return Corpus(tuple(questions))


def leaf_labels_of(corpus: Corpus, indices: Iterable[int] | None = None) -> list[str]:
    """Gold leaf labels for the given indices (labeled questions only)."""
    if indices is None:
        indices = corpus.labeled_indices()
    out = []
    for i in indices:
        gold = corpus.questions[i].gold
        if gold is None:
            raise ValidationError(f"question {corpus.questions[i].id!r} has no gold label")
        out.append(gold.leaf)
    return out
