"""Boosted depth-limited decision trees (multiclass exponential-loss boosting).

Each round fits a weighted-Gini tree on the current example weights; stage
weight is ln((1-err)/err) + ln(L-1); weights of misclassified examples are
multiplied by exp(stage weight) and renormalized. Rounds whose weighted error
reaches 1 - 1/L are discarded and boosting stops.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels
from ..features import SparseVector, WeightingScheme
from ..sparse import CSCMatrix, CSRMatrix, csr_to_csc, pack_csr
from .base import Hyperparams, LearnerKind, TrainedLearner, check_training_inputs, encode_labels

_ERR_CAP_EPS = 1e-10


def fit_tree(
    csr: CSRMatrix,
    csc: CSCMatrix,
    codes: np.ndarray,
    sample_w: np.ndarray,
    n_labels: int,
    max_depth: int,
) -> dict[str, np.ndarray]:
    """Greedy weighted-Gini tree; thresholds at midpoints of observed values.

    Returns flat node arrays: feature (-1 at leaves), threshold, left/right
    child ids, leaf label code (-1 at internal nodes).
    """
    n = csr.n_rows
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf: list[int] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf.append(-1)
        return len(feature) - 1

    in_node = np.zeros(n, dtype=bool)
    right_set = np.zeros(n, dtype=bool)
    root = new_node()
    stack: list[tuple[np.ndarray, int, int]] = [
        (np.arange(n, dtype=np.int64), 0, root)
    ]
    while stack:
        members, depth, slot = stack.pop()
        class_w = np.bincount(codes[members], weights=sample_w[members],
                              minlength=n_labels)
        counts = np.bincount(codes[members], minlength=n_labels)

        def make_leaf() -> None:
            leaf[slot] = int(np.argmax(class_w))

        if depth >= max_depth or np.count_nonzero(counts) <= 1:
            make_leaf()
            continue
        in_node[members] = True
        feat, thr, child_imp = kernels.best_split(
            csc.indptr, csc.rows, csc.values, in_node, len(members),
            class_w, codes, sample_w, n_labels,
        )
        in_node[members] = False
        if feat < 0:
            make_leaf()
            continue
        total_w = float(np.sum(class_w))
        parent_imp = total_w - float(np.sum(class_w * class_w)) / total_w if total_w > 0 else 0.0
        if not child_imp < parent_imp:
            make_leaf()
            continue

        lo, hi = csc.indptr[feat], csc.indptr[feat + 1]
        col_rows = csc.rows[lo:hi]
        in_node[members] = True
        sel = in_node[col_rows]
        in_node[members] = False
        going_right = col_rows[sel][csc.values[lo:hi][sel] > thr]
        right_set[going_right] = True
        left_members = members[~right_set[members]]
        right_members = members[right_set[members]]
        right_set[going_right] = False

        feature[slot] = int(feat)
        threshold[slot] = float(thr)
        left_id = new_node()
        right_id = new_node()
        left[slot] = left_id
        right[slot] = right_id
        stack.append((right_members, depth + 1, right_id))
        stack.append((left_members, depth + 1, left_id))

    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=np.float64),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "leaf": np.array(leaf, dtype=np.int64),
    }


def tree_predict(tree: dict[str, np.ndarray], csr: CSRMatrix,
                 rows: np.ndarray, n_labels: int) -> np.ndarray:
    votes = kernels.forest_votes(
        tree["feature"], tree["threshold"], tree["left"], tree["right"],
        tree["leaf"], np.array([0, len(tree["feature"])], dtype=np.int64),
        np.array([1.0]), csr.indptr, csr.indices, csr.values, rows,
        csr.n_cols, n_labels,
    )
    return np.argmax(votes, axis=1)


def _concat_trees(trees: list[dict[str, np.ndarray]]) -> dict[str, np.ndarray]:
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        offsets[i + 1] = offsets[i] + len(t["feature"])
    if trees:
        cat = {key: np.concatenate([t[key] for t in trees]) for key in trees[0]}
    else:
        cat = {
            "feature": np.empty(0, dtype=np.int64),
            "threshold": np.empty(0, dtype=np.float64),
            "left": np.empty(0, dtype=np.int64),
            "right": np.empty(0, dtype=np.int64),
            "leaf": np.empty(0, dtype=np.int64),
        }
    return {
        "tree_feature": cat["feature"],
        "tree_threshold": cat["threshold"],
        "tree_left": cat["left"],
        "tree_right": cat["right"],
        "tree_leaf": cat["leaf"],
        "tree_offsets": offsets,
    }


def train_bdt(
    X: Sequence[SparseVector],
    y: Sequence[str],
    h: Hyperparams = Hyperparams(),
    weighting: WeightingScheme = WeightingScheme.BINARY_PRESENCE,
) -> TrainedLearner:
    labels = check_training_inputs(X, y, min_labels=1)
    codes = encode_labels(y, labels)
    n_labels = len(labels)
    dim = X[0].dim
    csr = pack_csr(X)
    csc = csr_to_csc(csr)
    n = csr.n_rows
    all_rows = np.arange(n, dtype=np.int64)

    w = np.full(n, 1.0 / n)
    fallback = int(np.argmax(np.bincount(codes, weights=w, minlength=n_labels)))
    trees: list[dict[str, np.ndarray]] = []
    alphas: list[float] = []
    round_errors: list[float] = []
    weight_sums: list[float] = []
    discarded_final = False

    ln_lm1 = float(np.log(n_labels - 1)) if n_labels > 1 else 0.0
    for _ in range(h.bdt_rounds):
        tree = fit_tree(csr, csc, codes, w, n_labels, h.bdt_max_depth)
        pred = tree_predict(tree, csr, all_rows, n_labels)
        miss = pred != codes
        err = float(np.sum(w[miss]))
        if err == 0.0:
            alpha = float(np.log((1.0 - _ERR_CAP_EPS) / _ERR_CAP_EPS)) + ln_lm1
            trees.append(tree)
            alphas.append(alpha)
            round_errors.append(err)
            w /= w.sum()
            weight_sums.append(float(w.sum()))
            break
        if err >= 1.0 - 1.0 / n_labels:
            discarded_final = True
            break
        alpha = float(np.log((1.0 - err) / err)) + ln_lm1
        trees.append(tree)
        alphas.append(alpha)
        round_errors.append(err)
        w[miss] *= np.exp(alpha)
        w /= w.sum()
        weight_sums.append(float(w.sum()))

    params = _concat_trees(trees)
    params["alphas"] = np.array(alphas, dtype=np.float64)
    params["fallback"] = fallback
    return TrainedLearner(
        kind=LearnerKind.BDT,
        labels=labels,
        dim=dim,
        params=params,
        hyper=h,
        weighting=weighting,
        diagnostics={
            "round_errors": round_errors,
            "weight_sums": weight_sums,
            "n_rounds": len(alphas),
            "discarded_final_round": discarded_final,
        },
    )
