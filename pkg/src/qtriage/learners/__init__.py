"""Four classifiers behind one train/predict contract."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels
from ..features import SparseVector, WeightingScheme
from ..sparse import pack_csr
from .base import (
    Hyperparams,
    LearnerKind,
    TrainedLearner,
    encode_labels,
    sorted_label_universe,
)
from .bdt import fit_tree, train_bdt, tree_predict
from .logreg import loss_and_grad, predict_proba, softmax, train_logreg
from .nbm import train_nbm
from .svm import hinge_objective, train_svm

__all__ = [
    "Hyperparams",
    "LearnerKind",
    "TrainedLearner",
    "train",
    "train_nbm",
    "train_logreg",
    "train_svm",
    "train_bdt",
    "decision_scores",
    "predict",
    "predict_batch",
    "predict_proba",
    "loss_and_grad",
    "hinge_objective",
    "softmax",
    "fit_tree",
    "tree_predict",
    "encode_labels",
    "sorted_label_universe",
]

_TRAINERS = {
    LearnerKind.NBM: train_nbm,
    LearnerKind.LG: train_logreg,
    LearnerKind.SVM: train_svm,
    LearnerKind.BDT: train_bdt,
}


def train(
    kind: LearnerKind,
    X: Sequence[SparseVector],
    y: Sequence[str],
    h: Hyperparams = Hyperparams(),
    weighting: WeightingScheme | None = None,
) -> TrainedLearner:
    trainer = _TRAINERS[LearnerKind(kind)]
    if weighting is None:
        return trainer(X, y, h)
    return trainer(X, y, h, weighting=weighting)


def decision_scores(model: TrainedLearner, vectors: Sequence[SparseVector]) -> np.ndarray:
    """Per-label decision scores, one row per input vector."""
    for x in vectors:
        if x.dim != model.dim:
            raise ValueError(f"dimension mismatch: {x.dim} vs model {model.dim}")
    if not vectors:
        return np.zeros((0, len(model.labels)))
    m = pack_csr(list(vectors))
    rows = np.arange(m.n_rows, dtype=np.int64)
    if model.kind == LearnerKind.NBM:
        return kernels.logreg_scores(
            m.indptr, m.indices, m.values, rows,
            model.params["log_prob"], model.params["log_prior"],
        )
    if model.kind in (LearnerKind.LG, LearnerKind.SVM):
        return kernels.logreg_scores(
            m.indptr, m.indices, m.values, rows,
            model.params["W"], model.params["b"],
        )
    return kernels.forest_votes(
        model.params["tree_feature"], model.params["tree_threshold"],
        model.params["tree_left"], model.params["tree_right"],
        model.params["tree_leaf"], model.params["tree_offsets"],
        model.params["alphas"], m.indptr, m.indices, m.values, rows,
        model.dim, len(model.labels),
    )


def predict_batch(model: TrainedLearner, vectors: Sequence[SparseVector]) -> list[str]:
    scores = decision_scores(model, vectors)
    if model.kind == LearnerKind.BDT and len(model.params["alphas"]) == 0:
        return [model.labels[model.params["fallback"]]] * len(vectors)
    # np.argmax keeps the first maximum; labels are sorted, so ties resolve
    # lexicographically
    return [model.labels[i] for i in np.argmax(scores, axis=1)]


def predict(model: TrainedLearner, x: SparseVector) -> tuple[str, dict[str, float]]:
    scores = decision_scores(model, [x])[0]
    if model.kind == LearnerKind.BDT and len(model.params["alphas"]) == 0:
        label = model.labels[model.params["fallback"]]
    else:
        label = model.labels[int(np.argmax(scores))]
    return label, {l: float(s) for l, s in zip(model.labels, scores)}
