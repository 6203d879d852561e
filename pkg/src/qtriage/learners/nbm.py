"""Multinomial naive Bayes with add-alpha smoothing."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..features import SparseVector, WeightingScheme
from .base import Hyperparams, LearnerKind, TrainedLearner, check_training_inputs, encode_labels


def train_nbm(
    X: Sequence[SparseVector],
    y: Sequence[str],
    h: Hyperparams = Hyperparams(),
    weighting: WeightingScheme = WeightingScheme.RAW_COUNT,
) -> TrainedLearner:
    """Fit class priors and smoothed token log-probabilities.

    Prior: count(label)/N. Token probability under a label:
    (token count + alpha) / (label total + alpha * dim).
    """
    labels = check_training_inputs(X, y, min_labels=1)
    codes = encode_labels(y, labels)
    n_labels = len(labels)
    dim = X[0].dim

    class_count = np.bincount(codes, minlength=n_labels).astype(np.float64)
    token_count = np.zeros((n_labels, dim))
    for vec, c in zip(X, codes):
        if vec.nnz and vec.values.min() < 0:
            raise ValueError("naive Bayes requires non-negative feature values")
        token_count[c, vec.indices] += vec.values

    log_prior = np.log(class_count / len(X))
    if dim > 0:
        totals = token_count.sum(axis=1)
        log_prob = np.log(token_count + h.nbm_alpha) - np.log(
            totals + h.nbm_alpha * dim
        ).reshape(-1, 1)
    else:
        log_prob = np.zeros((n_labels, 0))

    return TrainedLearner(
        kind=LearnerKind.NBM,
        labels=labels,
        dim=dim,
        params={"log_prior": log_prior, "log_prob": log_prob},
        hyper=h,
        weighting=weighting,
    )
