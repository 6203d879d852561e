"""Tokenization, vocabulary, sparse vectors and chi-square feature selection."""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_FENCED_CODE_RE = re.compile(r"```.*?```", re.DOTALL)
_INLINE_CODE_RE = re.compile(r"`[^`\n]*`")


class WeightingScheme(str, enum.Enum):
    RAW_COUNT = "raw_count"
    BINARY_PRESENCE = "binary_presence"
    L2_NORMALIZED = "l2_normalized"


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    ngram_max: int = 1
    strip_code_blocks: bool = False
    stopwords: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.ngram_max not in (1, 2):
            raise ValueError(f"ngram_max must be 1 or 2, got {self.ngram_max}")


def load_stopwords(path) -> frozenset[str]:
    """One token per line; blank lines ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def _trim_token(tok: str) -> str:
    lo, hi = 0, len(tok)
    while lo < hi and not tok[lo].isalnum():
        lo += 1
    while hi > lo and not tok[hi - 1].isalnum():
        hi -= 1
    return tok[lo:hi]


def tokenize(text: str, cfg: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Whitespace tokenizer with edge trimming and optional bigrams.

    Tokens are split on Unicode whitespace, trimmed of leading/trailing
    non-alphanumeric characters, optionally lowercased, and stopword-filtered.
    With ngram_max=2 the adjacent pairs of the filtered unigrams are appended,
    joined by "_".
    """
    if cfg.strip_code_blocks:
        text = _FENCED_CODE_RE.sub(" ", text)
        text = _INLINE_CODE_RE.sub(" ", text)
    unigrams = []
    for raw in text.split():
        tok = _trim_token(raw)
        if not tok:
            continue
        if cfg.lowercase:
            tok = tok.lower()
        if tok in cfg.stopwords:
            continue
        unigrams.append(tok)
    if cfg.ngram_max == 2:
        return unigrams + [f"{a}_{b}" for a, b in zip(unigrams, unigrams[1:])]
    return unigrams


@dataclass(frozen=True)
class Vocabulary:
    """Frozen token -> dense index map, indices in lexicographic token order."""

    index: dict[str, int]
    doc_freq: np.ndarray

    @property
    def size(self) -> int:
        return len(self.index)

    def tokens(self) -> list[str]:
        return list(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index


def build_vocab(docs: Iterable[Sequence[str]], min_df: int = 1) -> Vocabulary:
    """Keep tokens whose document frequency reaches min_df.

    Index assignment is lexicographic, so it does not depend on document
    order or platform hash seeds.
    """
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc))
    kept = sorted(tok for tok, n in df.items() if n >= min_df)
    index = {tok: i for i, tok in enumerate(kept)}
    freq = np.array([df[tok] for tok in kept], dtype=np.int64)
    return Vocabulary(index=index, doc_freq=freq)


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, value) pairs over a fixed dimension; values > 0."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must align")
        if len(self.indices) > 0:
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError("index out of range for dimension")
            if np.any(self.values <= 0):
                raise ValueError("stored values must be positive")

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.indices] = self.values
        return dense


def vectorize(
    tokens: Sequence[str],
    vocab: Vocabulary,
    scheme: WeightingScheme = WeightingScheme.RAW_COUNT,
) -> SparseVector:
    """Count in-vocabulary tokens and weight them; OOV tokens are dropped."""
    counts: Counter[int] = Counter()
    for tok in tokens:
        idx = vocab.index.get(tok)
        if idx is not None:
            counts[idx] += 1
    if not counts:
        return SparseVector(
            indices=np.empty(0, dtype=np.int64),
            values=np.empty(0, dtype=np.float64),
            dim=vocab.size,
        )
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    if scheme == WeightingScheme.BINARY_PRESENCE:
        values = np.ones_like(values)
    elif scheme == WeightingScheme.L2_NORMALIZED:
        values = values / np.sqrt(np.sum(values * values))
    return SparseVector(indices=indices, values=values, dim=vocab.size)


def chi2_select(
    vectors: Sequence[SparseVector],
    labels: Sequence[str],
    top_k: int,
) -> np.ndarray:
    """Select the top_k features by max-over-labels chi-square association.

    The statistic is computed on the 2x2 (term presence x label) table per
    feature per label. Ties are broken toward the lower feature index; the
    returned indices are sorted ascending. top_k beyond the vocabulary size
    returns every index.
    """
    if len(vectors) != len(labels):
        raise ValueError("vectors and labels must align")
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    if not vectors:
        return np.empty(0, dtype=np.int64)
    dim = vectors[0].dim
    label_list = sorted(set(labels))
    n = len(vectors)
    codes = np.array([label_list.index(l) for l in labels], dtype=np.int64)
    label_totals = np.bincount(codes, minlength=len(label_list)).astype(np.float64)

    # presence[c, j] = number of label-c documents containing feature j
    presence = np.zeros((len(label_list), dim))
    doc_freq = np.zeros(dim)
    for vec, c in zip(vectors, codes):
        presence[c, vec.indices] += 1.0
        doc_freq[vec.indices] += 1.0

    scores = np.zeros(dim)
    for c in range(len(label_list)):
        a = presence[c]
        b = doc_freq - a
        c_ = label_totals[c] - a
        d = (n - label_totals[c]) - b
        num = n * (a * d - b * c_) ** 2
        den = (a + b) * (c_ + d) * (a + c_) * (b + d)
        with np.errstate(divide="ignore", invalid="ignore"):
            chi2 = np.where(den > 0, num / den, 0.0)
        scores = np.maximum(scores, chi2)

    k = min(top_k, dim)
    # stable sort on -score keeps the lower index first among ties
    ranked = np.argsort(-scores, kind="stable")[:k]
    return np.sort(ranked)


def restrict_vocab(vocab: Vocabulary, selected: np.ndarray) -> Vocabulary:
    """Reduced vocabulary keeping only the selected feature indices.

    Kept tokens stay in lexicographic order, so the reduced index map is
    again lexicographic.
    """
    tokens = vocab.tokens()
    kept = [tokens[i] for i in selected]
    index = {tok: i for i, tok in enumerate(kept)}
    freq = vocab.doc_freq[np.asarray(selected, dtype=np.int64)]
    return Vocabulary(index=index, doc_freq=freq)


#: Default weighting per learner kind (value = WeightingScheme).
DEFAULT_WEIGHTING = {
    "nbm": WeightingScheme.RAW_COUNT,
    "lg": WeightingScheme.L2_NORMALIZED,
    "svm": WeightingScheme.L2_NORMALIZED,
    "bdt": WeightingScheme.BINARY_PRESENCE,
}


@dataclass(frozen=True)
class PipelineConfig:
    """Feature pipeline settings shared by all training entry points."""

    tokenizer: TokenizerConfig = TokenizerConfig()
    min_df: int = 2
    weighting: dict[str, WeightingScheme] = field(
        default_factory=lambda: dict(DEFAULT_WEIGHTING)
    )
    top_k_features: int | None = None

    def scheme_for(self, kind: str) -> WeightingScheme:
        return self.weighting.get(kind, DEFAULT_WEIGHTING[kind])
