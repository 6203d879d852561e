"""Multinomial logistic regression trained by mini-batch gradient descent."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels
from ..features import SparseVector, WeightingScheme
from ..sparse import CSRMatrix, pack_csr
from .base import Hyperparams, LearnerKind, TrainedLearner, check_training_inputs, encode_labels


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(
    m: CSRMatrix,
    rows: np.ndarray,
    codes: np.ndarray,
    W: np.ndarray,
    b: np.ndarray,
    lam: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (lam/2)||W||^2 and its exact gradient.

    The bias is unregularized. Exposed separately so the gradient can be
    checked against finite differences.
    """
    scores = kernels.logreg_scores(m.indptr, m.indices, m.values, rows, W, b)
    probs = softmax(scores)
    n = len(rows)
    ce = -np.mean(np.log(probs[np.arange(n), codes[rows]]))
    loss = ce + 0.5 * lam * float(np.sum(W * W))
    G = probs.copy()
    G[np.arange(n), codes[rows]] -= 1.0
    G /= n
    grad_W = kernels.logreg_grad(m.indptr, m.indices, m.values, rows, G, m.n_cols)
    grad_W += lam * W
    grad_b = G.sum(axis=0)
    return loss, grad_W, grad_b


def train_logreg(
    X: Sequence[SparseVector],
    y: Sequence[str],
    h: Hyperparams = Hyperparams(),
    weighting: WeightingScheme = WeightingScheme.L2_NORMALIZED,
) -> TrainedLearner:
    """Softmax regression; learning rate decays as eta0 / (1 + epoch/epochs)."""
    labels = check_training_inputs(X, y, min_labels=2)
    codes = encode_labels(y, labels)
    n_labels = len(labels)
    dim = X[0].dim
    m = pack_csr(X)
    n = m.n_rows

    W = np.zeros((n_labels, dim))
    b = np.zeros(n_labels)
    rng = np.random.Generator(np.random.PCG64(h.seed))
    batch = min(h.lg_batch_size, n)
    for epoch in range(h.lg_epochs):
        eta = h.lg_eta0 / (1.0 + epoch / h.lg_epochs)
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            _, grad_W, grad_b = loss_and_grad(m, rows, codes, W, b, h.lg_lambda)
            W -= eta * grad_W
            b -= eta * grad_b

    return TrainedLearner(
        kind=LearnerKind.LG,
        labels=labels,
        dim=dim,
        params={"W": W, "b": b},
        hyper=h,
        weighting=weighting,
    )


def predict_proba(model: TrainedLearner, x: SparseVector) -> np.ndarray:
    """Per-label probabilities; they sum to 1 up to float rounding."""
    if model.kind != LearnerKind.LG:
        raise ValueError("predict_proba is defined for logistic regression models")
    if x.dim != model.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs model {model.dim}")
    single = pack_csr([x])
    scores = kernels.logreg_scores(
        single.indptr, single.indices, single.values,
        np.array([0], dtype=np.int64), model.params["W"], model.params["b"],
    )
    return softmax(scores)[0]
