"""Pure-numpy implementations of the hot training kernels.

These are the fallback path when numba is unavailable or disabled via
QTRIAGE_BACKEND=numpy. Each function mirrors the numba backend's contract
exactly; sums are arranged so both backends accumulate in the same order
wherever tie-breaking could be affected.
"""

from __future__ import annotations

import numpy as np


def _densify(indptr, indices, values, rows, n_cols):
    out = np.zeros((len(rows), n_cols))
    for k, r in enumerate(rows):
        lo, hi = indptr[r], indptr[r + 1]
        out[k, indices[lo:hi]] = values[lo:hi]
    return out


def logreg_scores(indptr, indices, values, rows, W, b):
    """Scores X[rows] @ W.T + b for a CSR matrix."""
    D = _densify(indptr, indices, values, rows, W.shape[1])
    return D @ W.T + b


def logreg_grad(indptr, indices, values, rows, G, n_cols):
    """G.T @ X[rows] for a CSR matrix; G is (len(rows), n_labels)."""
    D = _densify(indptr, indices, values, rows, n_cols)
    return G.T @ D


def svm_epoch(indptr, indices, values, order, y_pm, w, bias, lam, t_start):
    """One pass of Pegasos-style subgradient updates, sequential over `order`.

    Mutates w in place; returns (bias, next step counter). The update order
    is inherently sequential, so the fallback keeps the per-example loop and
    only vectorizes the inner products.
    """
    t = t_start
    for r in order:
        lo, hi = indptr[r], indptr[r + 1]
        idx = indices[lo:hi]
        val = values[lo:hi]
        eta = 1.0 / (lam * t)
        margin = y_pm[r] * (float(w[idx] @ val) + bias)
        w *= 1.0 - eta * lam
        if margin < 1.0:
            w[idx] += eta * y_pm[r] * val
            bias += eta * y_pm[r]
        t += 1
    return bias, t


def best_split(col_indptr, col_rows, col_values, in_node, node_size,
               node_class_w, y, w, n_labels):
    """Best weighted-Gini threshold split over all features for one node.

    Candidate thresholds sit at midpoints of consecutive distinct observed
    values (zeros included for absent entries). Returns (feature, threshold,
    children impurity); feature is -1 when no candidate exists. Ties go to
    the lowest feature index, then the lowest threshold.
    """
    n_features = len(col_indptr) - 1
    node_total = float(np.sum(node_class_w))
    best_feat = -1
    best_thr = 0.0
    best_imp = np.inf
    for j in range(n_features):
        lo, hi = col_indptr[j], col_indptr[j + 1]
        if lo == hi:
            continue
        rows_j = col_rows[lo:hi]
        mask = in_node[rows_j]
        m = int(np.count_nonzero(mask))
        if m == 0:
            continue
        gvals = col_values[lo:hi][mask]
        grows = rows_j[mask]
        # rows within a column are ascending, so a stable sort by value
        # yields the canonical (value, row) order shared with the numba path
        order = np.argsort(gvals, kind="stable")
        sv = gvals[order]
        sw = w[grows][order]
        sc = y[grows][order]
        onehot = np.zeros((m, n_labels))
        onehot[np.arange(m), sc] = sw
        pref = np.cumsum(onehot, axis=0)
        zero_cnt = node_size - m

        # candidate left prefixes: block boundaries, plus the zero block
        bounds = np.flatnonzero(sv[:-1] != sv[1:])
        if zero_cnt > 0:
            zero_w = node_class_w - pref[-1]
            lefts = np.concatenate([zero_w[None, :], zero_w[None, :] + pref[bounds]])
            thrs = np.concatenate([[0.5 * sv[0]], 0.5 * (sv[bounds] + sv[bounds + 1])])
        else:
            if len(bounds) == 0:
                continue
            lefts = pref[bounds]
            thrs = 0.5 * (sv[bounds] + sv[bounds + 1])

        wl = np.sum(lefts, axis=1)
        sl = np.sum(lefts * lefts, axis=1)
        rights = node_class_w[None, :] - lefts
        wr = node_total - wl
        sr = np.sum(rights * rights, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            imp = (np.where(wl > 0, wl - sl / wl, 0.0)
                   + np.where(wr > 0, wr - sr / wr, 0.0))
        pos = int(np.argmin(imp))
        if imp[pos] < best_imp:
            best_imp = float(imp[pos])
            best_feat = j
            best_thr = float(thrs[pos])
    return best_feat, best_thr, best_imp


def forest_votes(tfeat, tthr, tleft, tright, tleaf, tree_offsets, alphas,
                 indptr, indices, values, rows, n_cols, n_labels):
    """Weighted leaf votes of every tree for the given CSR rows.

    Routing is vectorized per tree over dense row chunks; trees are stored
    concatenated with per-tree child indices relative to tree_offsets.
    """
    n = len(rows)
    votes = np.zeros((n, n_labels))
    n_trees = len(tree_offsets) - 1
    if n == 0 or n_trees == 0:
        return votes
    chunk = 512
    for start in range(0, n, chunk):
        sel = rows[start : start + chunk]
        D = _densify(indptr, indices, values, sel, n_cols)
        for t in range(n_trees):
            base = tree_offsets[t]
            node = np.zeros(len(sel), dtype=np.int64)
            while True:
                feats = tfeat[base + node]
                active = feats >= 0
                if not np.any(active):
                    break
                cur = node[active]
                rows_act = np.flatnonzero(active)
                x = D[rows_act, feats[active]]
                go_right = x > tthr[base + cur]
                nxt = np.where(go_right, tright[base + cur], tleft[base + cur])
                node[rows_act] = nxt
            leaf = tleaf[base + node]
            votes[start + np.arange(len(sel)), leaf] += alphas[t]
    return votes
