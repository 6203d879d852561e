"""Shared learner surface: kinds, hyperparameters, the trained-model record."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DegenerateTrainingError
from ..features import SparseVector, WeightingScheme
from ..sparse import CSRMatrix, pack_csr


class LearnerKind(str, enum.Enum):
    NBM = "nbm"
    LG = "lg"
    SVM = "svm"
    BDT = "bdt"


@dataclass(frozen=True)
class Hyperparams:
    """Training knobs for all four algorithms; seed drives every RNG."""

    nbm_alpha: float = 1.0
    lg_lambda: float = 1e-3
    lg_eta0: float = 0.1
    lg_epochs: int = 50
    lg_batch_size: int = 32
    svm_lambda: float = 1e-3
    svm_epochs: int = 50
    bdt_rounds: int = 100
    bdt_max_depth: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.nbm_alpha <= 0:
            raise ValueError("nbm_alpha must be > 0")
        if self.lg_lambda < 0 or self.svm_lambda <= 0:
            raise ValueError("regularization strengths out of range")
        if self.lg_eta0 <= 0:
            raise ValueError("lg_eta0 must be > 0")
        if min(self.lg_epochs, self.svm_epochs, self.bdt_rounds) < 0:
            raise ValueError("epoch/round counts must be >= 0")
        if self.lg_batch_size < 1:
            raise ValueError("lg_batch_size must be >= 1")
        if self.bdt_max_depth < 1:
            raise ValueError("bdt_max_depth must be >= 1")


@dataclass
class TrainedLearner:
    """One fitted learner; params layout depends on kind.

    NBM: log_prior (L,), log_prob (L, dim)
    LG / SVM: W (L, dim), b (L,)
    BDT: flattened tree arrays + stage weights + fallback label code
    """

    kind: LearnerKind
    labels: tuple[str, ...]
    dim: int
    params: dict
    hyper: Hyperparams
    weighting: WeightingScheme
    diagnostics: dict = field(default_factory=dict)

    def label_codes(self, y: Sequence[str]) -> np.ndarray:
        lookup = {l: i for i, l in enumerate(self.labels)}
        return np.array([lookup[v] for v in y], dtype=np.int64)


def sorted_label_universe(y: Sequence[str]) -> tuple[str, ...]:
    return tuple(sorted(set(y)))


def encode_labels(y: Sequence[str], labels: tuple[str, ...]) -> np.ndarray:
    lookup = {l: i for i, l in enumerate(labels)}
    return np.array([lookup[v] for v in y], dtype=np.int64)


def check_training_inputs(X: Sequence[SparseVector], y: Sequence[str],
                          min_labels: int = 1) -> tuple[str, ...]:
    if len(X) != len(y):
        raise ValueError(f"X and y must align: {len(X)} vs {len(y)}")
    if len(X) == 0:
        raise DegenerateTrainingError("cannot train on an empty dataset")
    labels = sorted_label_universe(y)
    if len(labels) < min_labels:
        raise DegenerateTrainingError(
            f"training needs >= {min_labels} distinct labels, got {len(labels)}"
        )
    return labels


def pack_training_matrix(X: Sequence[SparseVector]) -> CSRMatrix:
    return pack_csr(X)
