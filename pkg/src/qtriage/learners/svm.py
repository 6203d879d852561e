"""One-vs-rest linear SVMs trained by stochastic subgradient descent."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels
from ..features import SparseVector, WeightingScheme
from ..sparse import CSRMatrix, pack_csr
from .base import Hyperparams, LearnerKind, TrainedLearner, check_training_inputs, encode_labels


def hinge_objective(m: CSRMatrix, y_pm: np.ndarray, w: np.ndarray, bias: float,
                    lam: float) -> float:
    """(lam/2)||w||^2 + mean hinge loss over the whole training set."""
    scores = kernels.logreg_scores(
        m.indptr, m.indices, m.values,
        np.arange(m.n_rows, dtype=np.int64),
        w.reshape(1, -1), np.array([bias]),
    )[:, 0]
    hinge = np.maximum(0.0, 1.0 - y_pm * scores)
    return 0.5 * lam * float(w @ w) + float(hinge.mean())


def train_svm(
    X: Sequence[SparseVector],
    y: Sequence[str],
    h: Hyperparams = Hyperparams(),
    weighting: WeightingScheme = WeightingScheme.L2_NORMALIZED,
    track_objective: bool = False,
) -> TrainedLearner:
    """Pegasos-style training, step size 1/(lambda*t), bias unregularized.

    With track_objective=True, diagnostics["objective_trace"][label] holds
    one value per epoch: the regularized objective of the running-averaged
    iterate. That averaged sequence is the quantity the subgradient method
    actually drives down (raw per-update objectives oscillate with the
    shuffle), and it decreases epoch over epoch. Tracking steps the kernel
    one update at a time, so it stays off outside of tests.
    """
    labels = check_training_inputs(X, y, min_labels=2)
    codes = encode_labels(y, labels)
    dim = X[0].dim
    m = pack_csr(X)
    n = m.n_rows

    W = np.zeros((len(labels), dim))
    b = np.zeros(len(labels))
    rng = np.random.Generator(np.random.PCG64(h.seed))
    traces: dict[str, list[float]] = {}
    for c, label in enumerate(labels):
        y_pm = np.where(codes == c, 1.0, -1.0)
        w = np.zeros(dim)
        bias = 0.0
        t = 1
        w_avg = np.zeros(dim)
        b_avg = 0.0
        trace: list[float] = []
        for _ in range(h.svm_epochs):
            order = rng.permutation(n).astype(np.int64)
            if track_objective:
                for k in range(n):
                    bias, t = kernels.svm_epoch(
                        m.indptr, m.indices, m.values, order[k : k + 1],
                        y_pm, w, bias, h.svm_lambda, t,
                    )
                    w_avg += w
                    b_avg += bias
                trace.append(
                    hinge_objective(m, y_pm, w_avg / (t - 1), b_avg / (t - 1),
                                    h.svm_lambda)
                )
            else:
                bias, t = kernels.svm_epoch(
                    m.indptr, m.indices, m.values, order,
                    y_pm, w, bias, h.svm_lambda, t,
                )
        W[c] = w
        b[c] = bias
        if track_objective:
            traces[label] = trace

    diagnostics = {"objective_trace": traces} if track_objective else {}
    return TrainedLearner(
        kind=LearnerKind.SVM,
        labels=labels,
        dim=dim,
        params={"W": W, "b": b},
        hyper=h,
        weighting=weighting,
        diagnostics=diagnostics,
    )
